#pragma once

#include <string>

#include "msvar/pipeline.hpp"

namespace msvar::pipeline {

// Fixed-width text tables rendered from the results document alone.
// Numbers are printed with six decimals.
std::string render_tables(const Json& doc);

}  // namespace msvar::pipeline

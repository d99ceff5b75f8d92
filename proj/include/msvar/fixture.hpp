#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "msvar/ms_model.hpp"

namespace msvar::pipeline {

// MSIH(2)-VAR(2) on two monthly return series with a calm positive-mean
// regime and a volatile negative-mean one.
ms::MsVarModel fixture_model();

// Writes <out>/tsx.csv and <out>/wti.csv (columns date,value; 1970-01 to
// 2021-05) from simulated returns. Returns the written paths.
std::vector<std::filesystem::path> write_fixture(const std::filesystem::path& out, std::uint64_t seed);

}  // namespace msvar::pipeline

#pragma once

namespace msvar {

enum class Deterministic { constant, constant_trend };

const char* to_string(Deterministic d);

struct CriticalValues {
  double pct10;
  double pct5;
  double pct1;
};

}  // namespace msvar

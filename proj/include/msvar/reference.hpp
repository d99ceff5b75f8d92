#pragma once

#include <cstddef>

// Reference values the report compares estimates against. Bands are the
// tolerances allowed for data-vintage drift.
namespace msvar::reference {

struct ReturnMoments {
  double mean;
  double std_dev;
};
inline constexpr ReturnMoments kReturns[2] = {{0.0048, 0.046}, {0.0048, 0.092}};
inline constexpr std::size_t kReturnCount = 616;
inline constexpr double kMeanTol = 0.001;
inline constexpr double kStdTol = 0.005;

inline constexpr double kAdfReturns[2] = {-22.3, -19.3};
inline constexpr double kAdfReturnsTol = 3.0;

inline constexpr std::size_t kAicLag = 2;

// Univariate two-regime fit on the first series.
inline constexpr double kUniInterceptBand[2][2] = {{0.005, 0.02}, {-0.025, -0.005}};
inline constexpr double kUniStay[2] = {0.9598, 0.8325};
inline constexpr double kUniStayTol = 0.05;

// Bivariate fit.
inline constexpr double kBiStay[2] = {0.9615, 0.8214};
inline constexpr double kBiStayTol = 0.06;

// Reference trace statistics (r = 0, r <= 1); they increase with r.
inline constexpr double kReferenceTrace[2] = {5.95, 16.04};

}  // namespace msvar::reference

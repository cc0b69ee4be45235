#pragma once

#include <cmath>
#include <string>

#include "hybridq/qspace.hpp"

namespace hybridq::testing {

inline constexpr double pi = 3.14159265358979323846;

inline std::string source_path(const std::string& rel) { return std::string(HYBRIDQ_SOURCE_DIR) + "/" + rel; }

// Composite index of a four-factor hybrid layout.
inline Index basis_index(const SpaceLayout& layout, Index cavity, Index ens1, Index ens2, Index cpb) {
  const Index digits[4] = {cavity, ens1, ens2, cpb};
  return layout.composite(digits);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace hybridq::testing

#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "grid.hpp"
#include "systems.hpp"

namespace testing_helpers {

inline velmat::BoxDomain box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  velmat::BoxDomain d;
  d.dim = static_cast<int>(lo.size());
  int a = 0;
  for (double v : lo) d.lower[a++] = v;
  a = 0;
  for (double v : hi) d.upper[a++] = v;
  return d;
}

inline velmat::BoxDomain unbounded(velmat::BoxDomain d) {
  for (int a = 0; a < d.dim; ++a) d.unbounded_lower[a] = d.unbounded_upper[a] = true;
  return d;
}

/// Real matrix-entry expressions from rows of strings.
inline velmat::MatrixExpr mexpr(std::initializer_list<std::initializer_list<const char*>> rows) {
  velmat::MatrixExpr m;
  for (const auto& r : rows) {
    std::vector<velmat::EntryExpr> row;
    for (const char* e : r) row.push_back({e, "0"});
    m.push_back(row);
  }
  return m;
}

}  // namespace testing_helpers

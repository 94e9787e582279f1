#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

namespace subspace_uq {

// Problem dimensions: a d1 x d2 matrix of rank r, plus the derived
// combinations that show up in every bias/variance formula.
struct Dims {
  int d1 = 0;
  int d2 = 0;
  int r = 0;

  Dims() = default;
  Dims(int d1_, int d2_, int r_) : d1(d1_), d2(d2_), r(r_) {
    if (d1 < 1 || d2 < 1)
      throw std::invalid_argument("Dims: d1 and d2 must be >= 1");
    if (r < 1 || r > std::min(d1, d2))
      throw std::invalid_argument("Dims: need 1 <= r <= min(d1, d2), got r=" +
                                  std::to_string(r));
  }

  int d_max() const { return std::max(d1, d2); }
  int d_min() const { return std::min(d1, d2); }
  int total() const { return d1 + d2; }
  int d_star() const { return d1 + d2 - 2 * r; }
  int d1m() const { return d1 - r; }
  int d2m() const { return d2 - r; }
  int delta_d() const { return d1 - d2; }

  bool operator==(const Dims& o) const {
    return d1 == o.d1 && d2 == o.d2 && r == o.r;
  }
};

}  // namespace subspace_uq

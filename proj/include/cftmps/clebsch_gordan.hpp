// su(2) coupling matrices built by ladder-operator recursion.
#pragma once

#include <cmath>
#include <vector>

#include "cftmps/common.hpp"

namespace cftmps {

/// Intertwiner t: V_{j3} (x) V_{j1} -> V_{j2}, returned as one matrix per
/// basis element of V_{j3}: t_v maps V_{j1} -> V_{j2}. Normalized so the
/// amplitude <j2 j2| t (|j3 j3> (x) |j1, j2-j3>) equals 1. Basis index i
/// corresponds to weight m = j - i throughout. Returns zero matrices when the
/// triple is not coupled.
inline std::vector<Matrix> su2_intertwiner(int two_j3, int two_j1, int two_j2) {
  const int d3 = two_j3 + 1, d1 = two_j1 + 1, d2 = two_j2 + 1;
  std::vector<Matrix> t(d3, Matrix::Zero(d2, d1));
  if (two_j2 < std::abs(two_j1 - two_j3) || two_j2 > two_j1 + two_j3 ||
      (two_j1 + two_j2 + two_j3) % 2 != 0)
    return t;
  const double j1 = two_j1 / 2.0, j2 = two_j2 / 2.0, j3 = two_j3 / 2.0;

  // u_{m2} as coefficients over (m3, m1 = m2 - m3); start from the top state.
  // J+_tot u_{j2} = 0 gives a_{m3} = -a_{m3+1} sqrt((j1-j2+m3+1)(j1+j2-m3)) /
  //                                   sqrt((j3-m3)(j3+m3+1)), seeded a_{j3} = 1.
  auto i3_of = [&](double m3) { return static_cast<int>(std::lround(j3 - m3)); };
  auto i1_of = [&](double m1) { return static_cast<int>(std::lround(j1 - m1)); };
  Matrix u = Matrix::Zero(d3, d2);  // u(i3, i2) = coeff of |m3> (x) |m2 - m3> in u_{m2}
  {
    double a = 1.0;
    for (double m3 = j3; m3 >= -j3 - 0.5; m3 -= 1.0) {
      const double m1 = j2 - m3;
      if (m1 >= -j1 - 0.5 && m1 <= j1 + 0.5) u(i3_of(m3), 0) = a;
      const double den = (j3 - (m3 - 1.0)) * (j3 + (m3 - 1.0) + 1.0);
      if (den <= 0) break;
      a = -a * std::sqrt((j1 - j2 + m3) * (j1 + j2 - m3 + 1.0)) / std::sqrt(den);
    }
  }
  // lower: u_{m2-1} = J-_tot u_{m2} / sqrt((j2+m2)(j2-m2+1))
  for (int i2 = 1; i2 < d2; ++i2) {
    const double m2 = j2 - i2;  // building u at m2 from u at m2+1
    const double norm = std::sqrt((j2 + m2 + 1.0) * (j2 - m2));
    for (int i3 = 0; i3 < d3; ++i3) {
      const double m3 = j3 - i3;
      const double m1_here = m2 - m3;
      if (m1_here < -j1 - 0.5 || m1_here > j1 + 0.5) continue;
      double c = 0.0;
      // J- on the V_{j3} slot: takes (m3+1, m1_here) down to (m3, m1_here)
      if (m3 + 1.0 <= j3 + 0.5) c += std::sqrt((j3 + m3 + 1.0) * (j3 - m3)) * u(i3_of(m3 + 1.0), i2 - 1);
      // J- on the V_{j1} slot: takes (m3, m1_here+1) down
      if (m1_here + 1.0 <= j1 + 0.5) c += std::sqrt((j1 + m1_here + 1.0) * (j1 - m1_here)) * u(i3_of(m3), i2 - 1);
      u(i3, i2) = c / norm;
    }
  }
  for (int i3 = 0; i3 < d3; ++i3)
    for (int i2 = 0; i2 < d2; ++i2) {
      const double m1 = (j2 - i2) - (j3 - i3);
      if (m1 < -j1 - 0.5 || m1 > j1 + 0.5) continue;
      t[i3](i2, i1_of(m1)) = u(i3, i2);
    }
  return t;
}

}  // namespace cftmps

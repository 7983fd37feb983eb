// Multipartition counting, the Siegel-type asymptotic bound and the
// bond-dimension bound, plus graded dimensions from character formulas.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cftmps/common.hpp"

namespace cftmps {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

/// Exact table of d-component multipartition counts p(m, d), built from the
/// generating function prod_k (1 - x^k)^{-d}.
class PartitionTable {
 public:
  PartitionTable(int m_max, int d_max) : m_max_(m_max), d_max_(d_max) {
    if (m_max < 0 || d_max < 0) throw ValidationError("PartitionTable: negative size");
    table_.assign(d_max + 1, std::vector<BigInt>(m_max + 1, 0));
    for (int m = 0; m <= m_max; ++m) table_[0][m] = (m == 0) ? 1 : 0;
    // Column d is column d-1 multiplied by one more Euler factor product.
    for (int d = 1; d <= d_max; ++d) {
      std::vector<BigInt>& cur = table_[d];
      cur = table_[d - 1];
      for (int k = 1; k <= m_max; ++k)
        for (int m = k; m <= m_max; ++m) cur[m] += cur[m - k];
    }
  }

  /// p(m, d): number of d-tuples of partitions with total size m.
  const BigInt& count(int m, int d) const {
    if (m < 0 || d < 0) throw ValidationError("multipartition_count: negative argument");
    if (m > m_max_ || d > d_max_) throw RangeError("multipartition_count: outside table");
    return table_[d][m];
  }

  int m_max() const { return m_max_; }
  int d_max() const { return d_max_; }

 private:
  int m_max_, d_max_;
  std::vector<std::vector<BigInt>> table_;
};

inline BigInt multipartition_count(int m, int d) {
  if (m < 0 || d < 0) throw ValidationError("multipartition_count: negative argument");
  return PartitionTable(m, d).count(m, d);
}

/// Siegel-type bound exp(2 pi sqrt(d m / 6)) >= p(m, d).
inline double siegel_bound(int m, int d) {
  if (m < 0 || d < 0) throw ValidationError("siegel_bound: negative argument");
  return std::exp(2.0 * M_PI * std::sqrt(static_cast<double>(d) * m / 6.0));
}

/// log of the bond-dimension bound dim_g * n * N * exp(2 pi sqrt(n N dim_g / 6)).
inline double log_bond_dim_bound(double n, double N, double dim_g) {
  return std::log(dim_g * n * N) + 2.0 * M_PI * std::sqrt(n * N * dim_g / 6.0);
}

/// Bond-dimension bound, evaluated in extended precision; overflows double
/// quickly in sweeps. N = 0 is degenerate: the projected space always
/// contains the vacuum, so the reported bound is clamped below at 1.
inline BigFloat bond_dim_bound(int n, int N, int dim_g) {
  if (n < 1 || dim_g < 1 || N < 0) throw ValidationError("bond_dim_bound: bad arguments");
  if (N == 0) return BigFloat(1);
  BigFloat arg = BigFloat(2) * boost::math::constants::pi<BigFloat>() *
                 sqrt(BigFloat(n) * N * dim_g / 6);
  BigFloat v = BigFloat(dim_g) * n * N * exp(arg);
  return v < 1 ? BigFloat(1) : v;
}

/// Graded dimensions of the level-k spin-j su(2) module from the Weyl-Kac
/// character: d_m = sum_n (2j+1 + 2n(k+2)) p(m - n((k+2)n + 2j+1), 3).
/// two_j is 2j; d_0 equals dim V_j = 2j+1.
inline BigInt su2_graded_dimension(int k, int two_j, int m, const PartitionTable& p3) {
  if (two_j < 0 || two_j > k) throw ValidationError("su2_graded_dimension: weight not integrable");
  if (m < 0) throw ValidationError("su2_graded_dimension: negative level");
  BigInt total = BigInt(two_j + 1) * p3.count(m, 3);
  for (int n = 1;; ++n) {  // +n and -n terms; -n has the smaller exponent
    const long long e_pos = static_cast<long long>(n) * ((k + 2) * n + two_j + 1);
    const long long e_neg = static_cast<long long>(n) * ((k + 2) * n - two_j - 1);
    if (e_pos > m && e_neg > m) break;
    if (e_pos <= m)
      total += (two_j + 1 + 2LL * n * (k + 2)) * p3.count(m - static_cast<int>(e_pos), 3);
    if (e_neg <= m)
      total += (two_j + 1 - 2LL * n * (k + 2)) * p3.count(m - static_cast<int>(e_neg), 3);
  }
  return total;
}

}  // namespace cftmps

// Regularized primary fields W_q = q^{L0} Phi q^{L0} as graded block
// operators, their grade-shift truncations, power-iteration norm estimates
// and the replacement error bounds (single step and telescoped chain).
#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "cftmps/common.hpp"
#include "cftmps/primary_field.hpp"

namespace cftmps {

/// A vector in a graded module, stored level by level up to a support bound.
struct GradedVector {
  std::vector<Vector> comp;  // comp[m] has the dimension of level m

  int max_level() const { return static_cast<int>(comp.size()) - 1; }
  double squared_norm() const {
    double s = 0.0;
    for (const Vector& v : comp) s += v.squaredNorm();
    return s;
  }
  double norm() const { return std::sqrt(squared_norm()); }
  double dot(const GradedVector& o) const {
    double s = 0.0;
    const int top = std::min(max_level(), o.max_level());
    for (int m = 0; m <= top; ++m) s += comp[m].dot(o.comp[m]);
    return s;
  }
  GradedVector& operator-=(const GradedVector& o) {
    for (int m = 0; m <= std::min(max_level(), o.max_level()); ++m) comp[m] -= o.comp[m];
    return *this;
  }

  static GradedVector zero(const GradedModule& mod, int max_level) {
    GradedVector g;
    g.comp.resize(max_level + 1);
    for (int m = 0; m <= max_level; ++m) g.comp[m] = Vector::Zero(mod.dim(m));
    return g;
  }
  /// unit vector on one highest-weight component
  static GradedVector highest_weight(const GradedModule& mod, int max_level, int component = 0) {
    GradedVector g = zero(mod, max_level);
    g.comp[0](component) = 1.0;
    return g;
  }
};

/// W_q = q^{L0} Phi_v q^{L0} between two truncated modules, for one charge
/// component v; optionally renormalized by discarding grade shifts |delta| > N.
/// Entry scale on block (m_src -> m_tgt): q^{(wt_src + m_src) + (wt_tgt + m_tgt)}.
struct RegularizedField {
  std::shared_ptr<const PrimaryFieldModes> modes;
  int component = 0;
  double q = 0.0;
  double wt_src = 0.0, wt_tgt = 0.0;
  int m_src_max = 0, m_tgt_max = 0;
  int trunc_N = -1;  // -1: untruncated

  bool block_kept(int m_src, int m_tgt) const {
    return trunc_N < 0 || std::abs(m_tgt - m_src) <= trunc_N;
  }
  double block_scale(int m_src, int m_tgt) const {
    return std::pow(q, wt_src + m_src + wt_tgt + m_tgt);
  }

  /// Apply to a graded vector; the input must fit inside the source cutoff.
  GradedVector apply(const GradedVector& in) const {
    if (in.max_level() > m_src_max) throw RangeError("RegularizedField: input exceeds source cutoff");
    GradedVector out;
    out.comp.resize(m_tgt_max + 1);
    for (int mt = 0; mt <= m_tgt_max; ++mt) {
      Vector acc = Vector::Zero(modes->block(component, 0, mt).rows());
      for (int ms = 0; ms <= in.max_level(); ++ms) {
        if (!block_kept(ms, mt)) continue;
        acc.noalias() += block_scale(ms, mt) * (modes->block(component, ms, mt) * in.comp[ms]);
      }
      out.comp[mt] = std::move(acc);
    }
    return out;
  }

  GradedVector apply_adjoint(const GradedVector& in) const {
    if (in.max_level() > m_tgt_max) throw RangeError("RegularizedField: input exceeds target cutoff");
    GradedVector out;
    out.comp.resize(m_src_max + 1);
    for (int ms = 0; ms <= m_src_max; ++ms) {
      Vector acc = Vector::Zero(modes->block(component, ms, 0).cols());
      for (int mt = 0; mt <= in.max_level(); ++mt) {
        if (!block_kept(ms, mt)) continue;
        acc.noalias() += block_scale(ms, mt) * (modes->block(component, ms, mt).transpose() * in.comp[mt]);
      }
      out.comp[ms] = std::move(acc);
    }
    return out;
  }
};

inline RegularizedField regularize(std::shared_ptr<const PrimaryFieldModes> modes, int component,
                                   double q, double wt_src, double wt_tgt, int M = -1) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("regularize: q must lie in (0,1)");
  if (!modes) throw ValidationError("regularize: null field blocks");
  RegularizedField w;
  w.m_src_max = (M < 0) ? modes->max_src : std::min(M, modes->max_src);
  w.m_tgt_max = (M < 0) ? modes->max_tgt : std::min(M, modes->max_tgt);
  w.modes = std::move(modes);
  w.component = component;
  w.q = q;
  w.wt_src = wt_src;
  w.wt_tgt = wt_tgt;
  return w;
}

inline RegularizedField truncate(const RegularizedField& w, int N) {
  if (N < 0) throw ValidationError("truncate: N must be nonnegative");
  RegularizedField t = w;
  t.trunc_N = N;
  return t;
}

struct NormEstimate {
  double value = 0.0;              // largest rung estimate; a lower bound on ||W||
  std::vector<double> per_rung;    // one estimate per cutoff rung
  double last_increment = 0.0;     // convergence indicator between last two rungs
  bool is_lower_bound = true;
};

namespace detail {

/// Largest singular value of W restricted to levels <= c on both sides,
/// by power iteration on W^dag W. Ratio test must settle or we throw.
inline double restricted_top_singular(const RegularizedField& w, int c, std::mt19937_64& rng,
                                      int max_iters = 5000, double tol = 1e-9) {
  RegularizedField wr = w;
  wr.m_src_max = std::min(w.m_src_max, c);
  wr.m_tgt_max = std::min(w.m_tgt_max, c);
  GradedVector x;
  x.comp.resize(wr.m_src_max + 1);
  std::normal_distribution<double> gauss;
  for (int m = 0; m <= wr.m_src_max; ++m) {
    const int d = static_cast<int>(w.modes->block(w.component, m, 0).cols());
    x.comp[m] = Vector::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
  }
  double nrm = x.norm();
  if (nrm == 0.0) return 0.0;
  for (Vector& v : x.comp) v /= nrm;
  double sigma = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    GradedVector y = wr.apply(x);
    const double s = y.norm();
    if (s == 0.0) return 0.0;
    GradedVector z = wr.apply_adjoint(y);
    const double zn = z.norm();
    for (Vector& v : z.comp) v /= zn;
    x = std::move(z);
    if (it > 0 && std::abs(s - sigma) <= tol * std::max(s, 1e-300)) return s;
    sigma = s;
  }
  throw ConvergenceError("estimate_norm: power iteration ratio test failed");
}

}  // namespace detail

/// Lower-bound estimate of ||W|| over an increasing cutoff ladder.
inline NormEstimate estimate_norm(const RegularizedField& w, const std::vector<int>& ladder,
                                  unsigned long long seed = 0x9e3779b97f4a7c15ull) {
  if (ladder.empty()) throw ValidationError("estimate_norm: empty cutoff ladder");
  std::mt19937_64 rng(seed);
  NormEstimate est;
  for (int c : ladder) {
    if (c < 0 || c > std::max(w.m_src_max, w.m_tgt_max))
      throw RangeError("estimate_norm: ladder rung outside built region");
    est.per_rung.push_back(detail::restricted_top_singular(w, c, rng));
    est.value = std::max(est.value, est.per_rung.back());
  }
  const size_t r = est.per_rung.size();
  est.last_increment = (r >= 2) ? est.per_rung[r - 1] - est.per_rung[r - 2] : est.per_rung[0];
  return est;
}

/// Per-operator replacement bound: q^{N/4} * sqrt(3) * b(sqrt q) / (1 - sqrt q).
inline double error_bound_single(double q, int N, double b_sqrt_q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("error_bound_single: q must lie in (0,1)");
  if (N < 0) throw ValidationError("error_bound_single: N must be nonnegative");
  return std::pow(q, N / 4.0) * std::sqrt(3.0) * b_sqrt_q / (1.0 - std::sqrt(q));
}

/// Telescoped chain bound sum_j eps_j * prod_{i != j} ||W_i||; truncation does
/// not increase norms, so the untruncated norms bound every hybrid chain.
inline double error_bound_chain(const std::vector<double>& eps, const std::vector<double>& norms) {
  if (eps.size() != norms.size()) throw ValidationError("error_bound_chain: length mismatch");
  double total = 0.0;
  for (size_t j = 0; j < eps.size(); ++j) {
    double prod = eps[j];
    for (size_t i = 0; i < norms.size(); ++i)
      if (i != j) prod *= norms[i];
    total += prod;
  }
  return total;
}

/// Max of ||W v - W^N v|| over random unit vectors supported on levels
/// <= support_max (kept well inside the cutoff by the caller).
inline double measure_replacement_error(const RegularizedField& w, int N, int support_max,
                                        int samples, unsigned long long seed) {
  if (support_max > w.m_src_max) throw RangeError("measure_replacement_error: support beyond cutoff");
  RegularizedField wn = truncate(w, N);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    GradedVector v;
    v.comp.resize(support_max + 1);
    for (int m = 0; m <= support_max; ++m) {
      const int d = static_cast<int>(w.modes->block(w.component, m, 0).cols());
      v.comp[m] = Vector::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
    }
    const double nrm = v.norm();
    if (nrm == 0.0) continue;
    for (Vector& c : v.comp) c /= nrm;
    GradedVector d = w.apply(v);
    d -= wn.apply(v);
    worst = std::max(worst, d.norm());
  }
  return worst;
}

}  // namespace cftmps

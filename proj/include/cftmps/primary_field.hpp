// Chiral primary fields between graded modules: mode blocks of the point
// operator Phi = phi(1), built either by commutator peeling through the
// spanning decompositions (generic path) or from the free-boson vertex
// operator closed form (heisenberg cross-check path).
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "cftmps/algebra.hpp"
#include "cftmps/clebsch_gordan.hpp"
#include "cftmps/common.hpp"
#include "cftmps/graded_module.hpp"

namespace cftmps {

/// Field phi^{lambda2}_{lambda3 lambda1}: M_{lambda1} -> M_{lambda2} with
/// charge space V_{lambda3}.
struct PrimaryFieldSpec {
  WeightLabel source;  // lambda1
  WeightLabel charge;  // lambda3
  WeightLabel target;  // lambda2
  Rational h_grade;    // wt l1 + wt l3 - wt l2: grade offset of the mode labels
  Rational h_scaling;  // wt l3: covariance exponent of phi(z)
  bool allowed = false;
};

inline PrimaryFieldSpec make_field_spec(const AlgebraData& alg, const WeightLabel& source,
                                        const WeightLabel& charge, const WeightLabel& target) {
  PrimaryFieldSpec s;
  s.source = source;
  s.charge = charge;
  s.target = target;
  s.h_grade = conformal_weight(alg, source) + conformal_weight(alg, charge) -
              conformal_weight(alg, target);
  s.h_scaling = conformal_weight(alg, charge);
  s.allowed = fusion_allowed(alg, source, charge, target);
  return s;
}

/// Graded blocks <level m_tgt| Phi_v |level m_src> of the point operator, one
/// matrix per charge component v, on the orthonormal module bases.
struct PrimaryFieldModes {
  PrimaryFieldSpec spec;
  int charge_dim = 1;
  int max_src = -1, max_tgt = -1;
  bool structural_zero = false;
  // blocks[v][m_src][m_tgt]: dim_tgt(m_tgt) x dim_src(m_src)
  std::vector<std::vector<std::vector<Matrix>>> blocks;

  const Matrix& block(int v, int m_src, int m_tgt) const {
    if (v < 0 || v >= charge_dim) throw ValidationError("field block: bad charge component");
    if (m_src < 0 || m_src > max_src || m_tgt < 0 || m_tgt > max_tgt)
      throw RangeError("field block: level outside built region");
    return blocks[v][m_src][m_tgt];
  }
};

/// Generic construction by commutator peeling. Row m_tgt = 0 comes from
/// peeling the ket through the source spanning decomposition,
///   <x| Phi_v b(-n)|u> = <tau(b)(n) x|Phi_v|u> - <x|Phi_{rho3(b)v}|u>,
/// all later rows from peeling the bra,
///   <b(-n) y|Phi_v|w> = <y|Phi_v|tau(b)(n) w> + <y|Phi_{rho3(tau b)v}|w>.
/// All charge components are carried simultaneously; the recursion mixes them.
inline PrimaryFieldModes build_field_modes(const GradedModule& src, const GradedModule& tgt,
                                           const PrimaryFieldSpec& spec, int max_src,
                                           int max_tgt) {
  const AlgebraData& alg = src.algebra();
  if (max_src > src.cutoff() || max_tgt > tgt.cutoff())
    throw RangeError("build_field_modes: requested levels beyond module cutoffs");
  PrimaryFieldModes out;
  out.spec = spec;
  out.max_src = max_src;
  out.max_tgt = max_tgt;

  FiniteIrrep charge_rep = finite_irrep(alg, spec.charge);
  const int dv = charge_rep.dim;
  out.charge_dim = dv;
  out.blocks.assign(dv, std::vector<std::vector<Matrix>>(
                            max_src + 1, std::vector<Matrix>(max_tgt + 1)));
  auto& B = out.blocks;
  for (int v = 0; v < dv; ++v)
    for (int ms = 0; ms <= max_src; ++ms)
      for (int mt = 0; mt <= max_tgt; ++mt) B[v][ms][mt] = Matrix::Zero(tgt.dim(mt), src.dim(ms));

  if (!spec.allowed) {
    out.structural_zero = true;
    return out;
  }

  // base blocks: the coupling matrices on the highest-weight spaces
  if (alg.kind == AlgebraKind::Heisenberg) {
    B[0][0][0](0, 0) = 1.0;
  } else {
    auto t = su2_intertwiner(twice_int(spec.charge.value), twice_int(spec.source.value),
                             twice_int(spec.target.value));
    for (int v = 0; v < dv; ++v) B[v][0][0] = t[v];
  }

  const int dg = alg.dim_g;
  // row m_tgt = 0, ascending source level (ket peeling)
  for (int ms = 1; ms <= max_src; ++ms) {
    const auto& sp = src.span(ms);
    for (int n = 1; n <= ms; ++n)
      for (int b = 0; b < dg; ++b) {
        const SparseMatrix& s = sp[b][n - 1];
        if (s.nonZeros() == 0) continue;
        for (int v = 0; v < dv; ++v)
          for (int vp = 0; vp < dv; ++vp) {
            const double c = charge_rep.rho[b](vp, v);
            if (c != 0.0) B[v][ms][0] -= c * (B[vp][ms - n][0] * s);
          }
        // the <tau(b)(n) x| term vanishes: x is a highest-weight vector
      }
  }

  // remaining rows, ascending target level (bra peeling)
  for (int mt = 1; mt <= max_tgt; ++mt) {
    const auto& sp = tgt.span(mt);
    for (int ms = 0; ms <= max_src; ++ms)
      for (int n = 1; n <= mt; ++n)
        for (int b = 0; b < dg; ++b) {
          const SparseMatrix& s = sp[b][n - 1];
          if (s.nonZeros() == 0) continue;
          const int tb = alg.adjoint[b];
          Matrix st = Matrix(s).transpose();
          for (int v = 0; v < dv; ++v) {
            Matrix x = Matrix::Zero(tgt.dim(mt - n), src.dim(ms));
            if (n <= ms) x += B[v][ms - n][mt - n] * Matrix(src.lower(tb, n, ms));
            for (int vp = 0; vp < dv; ++vp) {
              const double c = charge_rep.rho[tb](vp, v);
              if (c != 0.0) x += c * B[vp][ms][mt - n];
            }
            B[v][ms][mt] += st * x;
          }
        }
  }
  return out;
}

namespace detail {

/// Normalized vertex-operator amplitude for a single mode frequency n:
/// matrix element between s and r quanta of a(-n), charge alpha, level k.
inline double vertex_mode_amplitude(int n, int r, int s, double alpha, double k) {
  const double beta = alpha / n, gamma = -alpha / n, nk = n * k;
  double unnorm = 0.0;
  for (int m = 0; m <= std::min(r, s); ++m) {
    double term = 1.0;
    for (int i = 0; i < m; ++i) term *= static_cast<double>(s - i) / (i + 1);  // C(s, m)
    term *= std::pow(gamma * nk, s - m) * std::pow(beta, r - m);
    for (int i = 1; i <= r - m; ++i) term /= i;
    unnorm += term;
  }
  double ratio = 1.0;  // r!(nk)^r / sqrt(r!(nk)^r s!(nk)^s) = sqrt(r!(nk)^r / (s!(nk)^s))
  for (int i = 1; i <= r; ++i) ratio *= i * nk;
  for (int i = 1; i <= s; ++i) ratio /= i * nk;
  return unnorm * std::sqrt(ratio);
}

inline int part_count(const std::vector<int>& partition, int n) {
  int c = 0;
  for (int p : partition) c += (p == n);
  return c;
}

}  // namespace detail

/// Heisenberg closed form: blocks of the normalized vertex operator of charge
/// alpha between monomial bases, factorizing over mode frequencies. Built
/// independently of the peeling recursion; the two must agree elementwise.
inline PrimaryFieldModes build_vertex_operator_blocks(const GradedModule& src,
                                                      const GradedModule& tgt,
                                                      const PrimaryFieldSpec& spec, int max_src,
                                                      int max_tgt) {
  const AlgebraData& alg = src.algebra();
  if (alg.kind != AlgebraKind::Heisenberg)
    throw ValidationError("build_vertex_operator_blocks: heisenberg only");
  if (max_src > src.cutoff() || max_tgt > tgt.cutoff())
    throw RangeError("build_vertex_operator_blocks: requested levels beyond module cutoffs");
  const double alpha = to_double(spec.charge.value);
  const double k = alg.level;

  PrimaryFieldModes out;
  out.spec = spec;
  out.charge_dim = 1;
  out.max_src = max_src;
  out.max_tgt = max_tgt;
  out.structural_zero = !spec.allowed;
  std::vector<std::vector<std::vector<int>>> parts(std::max(max_src, max_tgt) + 1);
  for (int m = 0; m < static_cast<int>(parts.size()); ++m) parts[m] = partitions_of(m);

  out.blocks.assign(1, std::vector<std::vector<Matrix>>(max_src + 1,
                                                        std::vector<Matrix>(max_tgt + 1)));
  for (int ms = 0; ms <= max_src; ++ms)
    for (int mt = 0; mt <= max_tgt; ++mt) {
      Matrix blk = Matrix::Zero(tgt.dim(mt), src.dim(ms));
      if (spec.allowed) {
        for (int i = 0; i < static_cast<int>(parts[mt].size()); ++i)
          for (int j = 0; j < static_cast<int>(parts[ms].size()); ++j) {
            double val = 1.0;
            const int n_hi = std::max(ms, mt);
            for (int n = 1; n <= n_hi && val != 0.0; ++n) {
              const int r = detail::part_count(parts[mt][i], n);
              const int s = detail::part_count(parts[ms][j], n);
              if (r || s) val *= detail::vertex_mode_amplitude(n, r, s, alpha, k);
            }
            blk(i, j) = val;
          }
      }
      out.blocks[0][ms][mt] = std::move(blk);
    }
  return out;
}

/// Largest elementwise deviation between two block families over their common
/// built region. Shape disagreement is an error, not a large number.
inline double cross_validate(const PrimaryFieldModes& a, const PrimaryFieldModes& b) {
  if (a.charge_dim != b.charge_dim) throw ValidationError("cross_validate: charge dims differ");
  const int ms_max = std::min(a.max_src, b.max_src);
  const int mt_max = std::min(a.max_tgt, b.max_tgt);
  double worst = 0.0;
  for (int v = 0; v < a.charge_dim; ++v)
    for (int ms = 0; ms <= ms_max; ++ms)
      for (int mt = 0; mt <= mt_max; ++mt) {
        const Matrix& x = a.block(v, ms, mt);
        const Matrix& y = b.block(v, ms, mt);
        if (x.rows() != y.rows() || x.cols() != y.cols())
          throw ValidationError("cross_validate: block shapes differ");
        if (x.size() > 0) worst = std::max(worst, (x - y).cwiseAbs().maxCoeff());
      }
  return worst;
}

}  // namespace cftmps

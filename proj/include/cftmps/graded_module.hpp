// Integrable highest-weight modules built level by level: orthonormal graded
// bases after the null-vector quotient, mode-action matrices and spanning
// decompositions. Three builders: closed-form monomial construction for the
// heisenberg algebra, a spanning-set construction working directly in quotient
// bases (production path for su(2)), and the raw Fock construction with the
// exact Gram quotient (small cutoffs, exact ranks).
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "cftmps/algebra.hpp"
#include "cftmps/common.hpp"
#include "cftmps/fock.hpp"

namespace cftmps {

/// All partitions of m, parts descending, list in canonical (sorted) order.
inline std::vector<std::vector<int>> partitions_of(int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int remaining, int cap) -> void {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int p = std::min(remaining, cap); p >= 1; --p) {
      cur.push_back(p);
      self(self, remaining - p, p);
      cur.pop_back();
    }
  };
  rec(rec, m, m);
  std::sort(out.begin(), out.end());
  return out;
}

struct GradedLevelData {
  int dim = 0;
  // lower[a][n-1]: matrix of a(n) mapping this level m to level m-n, n = 1..m
  std::vector<std::vector<SparseMatrix>> lower;
  // zero[a]: matrix of a(0) on this level
  std::vector<SparseMatrix> zero;
  // span[a][n-1]: spanning decomposition e_i = sum_{a,n,u} span[a][n-1](u,i) a(-n) e_u
  std::vector<std::vector<SparseMatrix>> span;
};

/// An integrable highest-weight module M_{k,lambda} realized on orthonormal
/// graded bases up to an explicit cutoff. Raising operators are the exact
/// adjoints of the lowering operators of the adjoint generator.
class GradedModule {
 public:
  GradedModule(AlgebraData alg, WeightLabel lambda, int cutoff)
      : alg_(std::move(alg)), lambda_(lambda), cutoff_(cutoff) {
    wt_ = conformal_weight(alg_, lambda_);
  }

  const AlgebraData& algebra() const { return alg_; }
  const WeightLabel& label() const { return lambda_; }
  const Rational& weight() const { return wt_; }
  double weight_d() const { return to_double(wt_); }
  int cutoff() const { return cutoff_; }

  int dim(int m) const { return level_at(m).dim; }
  long long cumulative_dim(int m) const {
    check_level(m);
    long long c = 0;
    for (int l = 0; l <= m; ++l) c += levels_[l].dim;
    return c;
  }

  /// matrix of a(n), n >= 1, from level m to level m-n
  const SparseMatrix& lower(int a, int n, int m) const {
    check_level(m);
    if (n < 1 || n > m) throw RangeError("GradedModule::lower: bad mode");
    return levels_[m].lower[a][n - 1];
  }
  const SparseMatrix& zero_mode(int a, int m) const { return level_at(m).zero[a]; }
  const std::vector<std::vector<SparseMatrix>>& span(int m) const { return level_at(m).span; }

  /// a(n) applied to a vector at level m; result lives at level m - n.
  /// Stepping outside [0, cutoff] is a hard range error, never a silent zero,
  /// except that annihilation past the bottom of the module is the exact zero.
  Vector apply_mode(int a, int n, int m, const Vector& v) const {
    check_level(m);
    if (v.size() != dim(m)) throw ValidationError("apply_mode: dimension mismatch");
    if (n == 0) return zero_mode(a, m) * v;
    if (n > 0) {
      if (n > m) return Vector(0);  // annihilated below the highest-weight space
      return lower(a, n, m) * v;
    }
    const int m_to = m - n;
    if (m_to > cutoff_) throw RangeError("apply_mode: raising past module cutoff");
    return lower(alg_.adjoint[a], -n, m_to).transpose() * v;
  }

  std::vector<GradedLevelData> levels_;  // filled by builders

 private:
  const GradedLevelData& level_at(int m) const {
    check_level(m);
    return levels_[m];
  }
  void check_level(int m) const {
    if (m < 0) throw RangeError("GradedModule: negative level");
    if (m > cutoff_ || m >= static_cast<int>(levels_.size()))
      throw RangeError("GradedModule: level " + std::to_string(m) + " beyond cutoff");
  }

  AlgebraData alg_;
  WeightLabel lambda_;
  Rational wt_;
  int cutoff_;
};

/// Closed-form heisenberg module of a given charge: monomial basis indexed by
/// partitions, diagonal Gram, a(n) e_P = sqrt(n k c_n(P)) e_{P minus n}.
inline GradedModule build_heisenberg_module(const AlgebraData& alg, const Rational& charge,
                                            int cutoff) {
  if (alg.kind != AlgebraKind::Heisenberg)
    throw ValidationError("build_heisenberg_module: algebra is not heisenberg");
  const double k = alg.level;
  GradedModule mod(alg, WeightLabel::charge(charge), cutoff);
  std::vector<std::vector<std::vector<int>>> parts(cutoff + 1);
  std::vector<std::map<std::vector<int>, int>> index(cutoff + 1);
  for (int m = 0; m <= cutoff; ++m) {
    parts[m] = partitions_of(m);
    for (int i = 0; i < static_cast<int>(parts[m].size()); ++i) index[m][parts[m][i]] = i;
  }
  mod.levels_.resize(cutoff + 1);
  for (int m = 0; m <= cutoff; ++m) {
    GradedLevelData& lvl = mod.levels_[m];
    const int d = static_cast<int>(parts[m].size());
    lvl.dim = d;
    lvl.zero = {SparseMatrix(d, d)};
    lvl.zero[0].setIdentity();
    lvl.zero[0] *= to_double(charge);
    lvl.lower.assign(1, std::vector<SparseMatrix>(m));
    lvl.span.assign(1, std::vector<SparseMatrix>(m));
    for (int n = 1; n <= m; ++n) {
      const int dlo = static_cast<int>(parts[m - n].size());
      std::vector<Eigen::Triplet<double>> tl, ts;
      for (int i = 0; i < d; ++i) {
        const auto& P = parts[m][i];
        const int c_n = static_cast<int>(std::count(P.begin(), P.end(), n));
        if (c_n == 0) continue;
        std::vector<int> Q = P;
        Q.erase(std::find(Q.begin(), Q.end(), n));
        const int j = index[m - n].at(Q);
        const double amp = std::sqrt(n * k * c_n);
        tl.emplace_back(j, i, amp);
        if (P.front() == n) ts.emplace_back(j, i, 1.0 / amp);  // largest part defines the span
      }
      lvl.lower[0][n - 1].resize(dlo, d);
      lvl.lower[0][n - 1].setFromTriplets(tl.begin(), tl.end());
      lvl.span[0][n - 1].resize(dlo, d);
      lvl.span[0][n - 1].setFromTriplets(ts.begin(), ts.end());
    }
  }
  return mod;
}

namespace detail {

/// Flat index bookkeeping for the spanning set {a(-n) e_u} of one new level.
struct SpanIndex {
  // group offsets: offset[a][n-1], sizes d_{m-n}
  std::vector<std::vector<int>> offset;
  std::vector<int> group_dim;  // per (a,n) flattened
  int total = 0;
  int dim_g = 0, m = 0;

  SpanIndex(const GradedModule& mod, int dim_g_, int m_) : dim_g(dim_g_), m(m_) {
    offset.assign(dim_g, std::vector<int>(m, 0));
    for (int n = 1; n <= m; ++n)
      for (int a = 0; a < dim_g; ++a) {
        offset[a][n - 1] = total;
        total += mod.dim(m - n);
      }
  }
  int idx(int a, int n, int u) const { return offset[a][n - 1] + u; }
};

/// sum_e f^e_{ab} (matrix of e(p) from level m_from), p may be negative
/// (raising), zero or positive. Result maps level m_from to m_from - p.
inline Matrix bracket_mode_matrix(const GradedModule& mod, const AlgebraData& alg, int a, int b,
                                  int p, int m_from) {
  const int m_to = m_from - p;
  Matrix out = Matrix::Zero(mod.dim(m_to), mod.dim(m_from));
  for (int e = 0; e < alg.dim_g; ++e) {
    const double c = to_double(alg.f[e][a][b]);
    if (c == 0.0) continue;
    if (p > 0)
      out += c * Matrix(mod.lower(e, p, m_from));
    else if (p == 0)
      out += c * Matrix(mod.zero_mode(e, m_from));
    else
      out += c * Matrix(SparseMatrix(mod.lower(alg.adjoint[e], -p, m_to).transpose()));
  }
  return out;
}

}  // namespace detail

/// Spanning-set construction of one new level on top of finished lower levels:
/// Gram of {a(-n) e_u} evaluated through the affine commutator, orthonormal
/// basis extracted by pivoted Cholesky (rank-revealing, PSD), mode matrices
/// read off the Cholesky factor.
inline void build_level_recursive(GradedModule& mod, int m, double tol = 1e-10) {
  const AlgebraData& alg = mod.algebra();
  const int dg = alg.dim_g;
  const double k = alg.level;
  detail::SpanIndex si(mod, dg, m);
  const int S = si.total;

  // Cache lowering matrices tau(a)(n) from level m-l for the cross terms:
  // low_cache[a][n-1][l-1] = matrix of tau(a)(n): level m-l -> level m-l-n (empty if below 0).
  // We fetch them lazily from the module instead; levels are small.

  // initial diagonal of the spanning Gram
  Vector diag(S);
  for (int n = 1; n <= m; ++n)
    for (int a = 0; a < dg; ++a) {
      const int ta = alg.adjoint[a];
      const int d_u = mod.dim(m - n);
      const double central = n * k * to_double(alg.kappa[ta][a]);
      Matrix zc = detail::bracket_mode_matrix(mod, alg, ta, a, 0, m - n);
      for (int u = 0; u < d_u; ++u) {
        double v = zc(u, u) + central;
        if (n <= m - n) {
          // ||tau(a)(n) e_u||^2 on level m-n
          v += mod.lower(ta, n, m - n).col(u).squaredNorm();
        }
        diag(si.idx(a, n, u)) = v;
      }
    }

  // one full Gram column for spanning element (b, l, w)
  auto gram_column = [&](int b, int l, int w) {
    Vector col = Vector::Zero(S);
    const int tb = alg.adjoint[b];
    for (int n = 1; n <= m; ++n)
      for (int a = 0; a < dg; ++a) {
        const int ta = alg.adjoint[a];
        const int base = si.idx(a, n, 0);
        const int d_u = mod.dim(m - n);
        Eigen::Map<Vector> seg(col.data() + base, d_u);
        // term 1: <e_u, [tau(a), b](n-l) e_w> + central
        Matrix t1 = detail::bracket_mode_matrix(mod, alg, ta, b, n - l, m - l);
        seg += t1.col(w);
        if (n == l) seg(w) += n * k * to_double(alg.kappa[ta][b]);
        // term 2: <tau(b)(l) e_u, tau(a)(n) e_w>, both at level m-n-l
        if (m - n - l >= 0 && n <= m - l && l <= m - n) {
          Vector y2 = mod.lower(ta, n, m - l).col(w);
          seg += mod.lower(tb, l, m - n).transpose() * y2;
        }
      }
    return col;
  };

  const double dmax0 = std::max(diag.maxCoeff(), 1e-300);
  std::vector<Vector> rrows;       // rows of the Cholesky factor R, length S
  std::vector<int> pivots;         // spanning index per accepted basis vector
  Vector resid = diag;
  while (true) {
    int p = -1;
    double best = tol * dmax0;
    for (int s = 0; s < S; ++s)
      if (resid(s) > best) {
        best = resid(s);
        p = s;
      }
    if (p < 0) break;
    // decode pivot
    int pb = -1, pl = -1, pw = -1;
    for (int n = 1; n <= m && pb < 0; ++n)
      for (int a = 0; a < dg; ++a) {
        int base = si.idx(a, n, 0);
        if (p >= base && p < base + mod.dim(m - n)) {
          pb = a;
          pl = n;
          pw = p - base;
          break;
        }
      }
    Vector col = gram_column(pb, pl, pw);
    for (const Vector& r : rrows) col -= r(p) * r;
    const double piv = std::sqrt(std::max(col(p), 0.0));
    if (piv <= 0.0) {
      resid(p) = 0.0;
      continue;
    }
    Vector r = col / piv;
    for (int s = 0; s < S; ++s) {
      resid(s) -= r(s) * r(s);
      if (resid(s) < 0) resid(s) = 0;
    }
    resid(p) = 0.0;
    rrows.push_back(std::move(r));
    pivots.push_back(p);
  }

  const int d = static_cast<int>(rrows.size());
  // R_full: d x S, <e_t, v_s> coordinates of every spanning vector
  Matrix R(d, S);
  for (int t = 0; t < d; ++t) R.row(t) = rrows[t].transpose();

  GradedLevelData lvl;
  lvl.dim = d;
  // lowering a(n) on level m = adjoint of the raising block of tau(a)
  lvl.lower.assign(dg, std::vector<SparseMatrix>(m));
  lvl.span.assign(dg, std::vector<SparseMatrix>(m));
  for (int n = 1; n <= m; ++n)
    for (int a = 0; a < dg; ++a) {
      const int ta = alg.adjoint[a];
      const int d_u = mod.dim(m - n);
      Matrix raise_ta = R.block(0, si.idx(ta, n, 0), d, d_u);  // level m-n -> m under ta(-n)
      lvl.lower[a][n - 1] = raise_ta.transpose().sparseView(0.0, 0.0);
    }
  // spanning decomposition: invert R restricted to pivot columns
  {
    Matrix Rpp(d, d);
    for (int t = 0; t < d; ++t)
      for (int j = 0; j < d; ++j) Rpp(t, j) = R(t, pivots[j]);
    // R restricted to its pivot columns is upper triangular in pivot order,
    // and e_t = sum_j (R_pp^-1)(j,t) v_{pivot_j}
    Matrix C = Rpp.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
    std::vector<std::vector<std::vector<Eigen::Triplet<double>>>> trip(
        dg, std::vector<std::vector<Eigen::Triplet<double>>>(m));
    for (int j = 0; j < d; ++j) {
      int p = pivots[j];
      int pa = -1, pn = -1, pu = -1;
      for (int n = 1; n <= m && pa < 0; ++n)
        for (int a = 0; a < dg; ++a) {
          int base = si.idx(a, n, 0);
          if (p >= base && p < base + mod.dim(m - n)) {
            pa = a;
            pn = n;
            pu = p - base;
            break;
          }
        }
      for (int t = 0; t < d; ++t)
        if (C(j, t) != 0.0) trip[pa][pn - 1].emplace_back(pu, t, C(j, t));
    }
    for (int n = 1; n <= m; ++n)
      for (int a = 0; a < dg; ++a) {
        lvl.span[a][n - 1].resize(mod.dim(m - n), d);
        lvl.span[a][n - 1].setFromTriplets(trip[a][n - 1].begin(), trip[a][n - 1].end());
      }
  }
  // zero modes: a(0) (b(-l) e_u) = [a,b](-l) e_u + b(-l) a(0) e_u, pushed through the
  // spanning decomposition and read off in coordinates via R
  lvl.zero.resize(dg);
  for (int a = 0; a < dg; ++a) {
    Matrix Z = Matrix::Zero(d, d);
    for (int n = 1; n <= m; ++n)
      for (int b = 0; b < dg; ++b) {
        const SparseMatrix& sp = lvl.span[b][n - 1];
        if (sp.nonZeros() == 0) continue;
        // commutator part: sum_e f^e_ab * v_(e,n,u)
        for (int e = 0; e < dg; ++e) {
          const double c = to_double(alg.f[e][a][b]);
          if (c == 0.0) continue;
          Z += c * R.block(0, si.idx(e, n, 0), d, mod.dim(m - n)) * sp;
        }
        // pushed-through part: v_(b,n, Z_{m-n}[a] u)
        Matrix tmp = Matrix(mod.zero_mode(a, m - n)) * Matrix(sp);
        Z += R.block(0, si.idx(b, n, 0), d, mod.dim(m - n)) * tmp;
      }
    lvl.zero[a] = Z.sparseView(0.0, 0.0);
  }
  mod.levels_.push_back(std::move(lvl));
}

/// Raw-Fock builder: exact rational Gram matrices and quotient ranks, float
/// orthonormalization of the exact Gram. Small cutoffs only; this is the
/// rational-mode realization of gram_and_quotient.
inline GradedModule build_module_from_fock(const AlgebraData& alg, const WeightLabel& lambda,
                                           int cutoff) {
  if (!integrable(alg, lambda)) throw ValidationError("build_module_from_fock: non-integrable weight");
  RationalIrrep rat = RationalIrrep::make(alg, lambda);
  FockAction act(alg, rat);
  GradedModule mod(alg, lambda, cutoff);
  const int dg = alg.dim_g;

  std::vector<std::vector<BasisState>> bases(cutoff + 1);
  std::vector<std::map<BasisState, int>> index(cutoff + 1);
  std::vector<Matrix> Q(cutoff + 1);        // raw -> orthonormal quotient basis, columns
  std::vector<Matrix> to_quot(cutoff + 1);  // Q^T G: raw coordinates -> quotient coordinates

  auto raw_mode_matrix = [&](int a, int n, int m_from) {
    // matrix of a(n) from raw level m_from to raw level m_from - n (n > 0)
    const auto& src = bases[m_from];
    const auto& tgt_index = index[m_from - n];
    Matrix out = Matrix::Zero(static_cast<int>(index[m_from - n].size()), static_cast<int>(src.size()));
    for (int j = 0; j < static_cast<int>(src.size()); ++j) {
      StateCombo r = act.apply_one(a, n, src[j]);
      for (const auto& [t, c] : r) out(tgt_index.at(t), j) = to_double(c);
    }
    return out;
  };

  for (int m = 0; m <= cutoff; ++m) {
    bases[m] = enumerate_basis(alg, rat.dim, m);
    for (int i = 0; i < static_cast<int>(bases[m].size()); ++i) index[m][bases[m][i]] = i;
    auto gram = gram_matrix(act, bases[m]);
    const int raw = static_cast<int>(bases[m].size());
    const int rank = rational_rank(gram);
    Matrix G(raw, raw);
    for (int i = 0; i < raw; ++i)
      for (int j = 0; j < raw; ++j) {
        G(i, j) = to_double(gram[i][j]);
        if (i != j && gram[i][j] != gram[j][i])
          throw ValidationError("gram_and_quotient: asymmetric Gram");
      }
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    if (es.eigenvalues()(0) < -1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
      throw ValidationError("gram_and_quotient: negative Gram eigenvalue, integrability violated");
    Matrix Qm(raw, rank);
    for (int t = 0; t < rank; ++t) {
      const int src_col = raw - rank + t;  // eigenvalues ascending; keep the top `rank`
      Qm.col(t) = es.eigenvectors().col(src_col) / std::sqrt(es.eigenvalues()(src_col));
    }
    Q[m] = Qm;
    to_quot[m] = Qm.transpose() * G;

    GradedLevelData lvl;
    lvl.dim = rank;
    lvl.zero.resize(dg);
    for (int a = 0; a < dg; ++a) {
      Matrix Z = Matrix::Zero(raw, raw);
      for (int j = 0; j < raw; ++j) {
        StateCombo r = act.apply_one(a, 0, bases[m][j]);
        for (const auto& [t, c] : r) Z(index[m].at(t), j) = to_double(c);
      }
      lvl.zero[a] = (to_quot[m] * Z * Q[m]).sparseView(0.0, 0.0);
    }
    lvl.lower.assign(dg, std::vector<SparseMatrix>(m));
    lvl.span.assign(dg, std::vector<SparseMatrix>(m));
    for (int n = 1; n <= m; ++n)
      for (int a = 0; a < dg; ++a) {
        Matrix A = raw_mode_matrix(a, n, m);
        lvl.lower[a][n - 1] = (to_quot[m - n] * A * Q[m]).sparseView(0.0, 0.0);
      }
    // spanning decomposition through the leading decoration entry of each raw state
    for (int n = 1; n <= m; ++n)
      for (int a = 0; a < dg; ++a) {
        Matrix Sp = Matrix::Zero(static_cast<int>(to_quot[m - n].rows()), rank);
        for (int r = 0; r < raw; ++r) {
          const BasisState& s = bases[m][r];
          if (s.decoration.front() != std::make_pair(n, a)) continue;
          BasisState rest = s;
          rest.decoration.erase(rest.decoration.begin());
          const int rest_idx = index[m - n].at(rest);
          for (int i = 0; i < rank; ++i)
            if (Q[m](r, i) != 0.0) Sp.col(i) += Q[m](r, i) * to_quot[m - n].col(rest_idx);
        }
        lvl.span[a][n - 1] = Sp.sparseView(0.0, 0.0);
      }
    mod.levels_.push_back(std::move(lvl));
  }
  return mod;
}

/// Generic quotient module built level by level from the affine commutator.
inline GradedModule build_module_recursive(const AlgebraData& alg, const WeightLabel& lambda,
                                           int cutoff, double tol = 1e-10) {
  if (!integrable(alg, lambda)) throw ValidationError("build_module_recursive: non-integrable weight");
  GradedModule mod(alg, lambda, cutoff);
  FiniteIrrep irrep = finite_irrep(alg, lambda);
  GradedLevelData l0;
  l0.dim = irrep.dim;
  for (int a = 0; a < alg.dim_g; ++a) l0.zero.push_back(irrep.rho[a].sparseView(0.0, 0.0));
  mod.levels_.push_back(std::move(l0));
  for (int m = 1; m <= cutoff; ++m) build_level_recursive(mod, m, tol);
  return mod;
}

}  // namespace cftmps

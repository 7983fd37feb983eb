// Raw PBW Fock construction with exact rational arithmetic: decorated
// partition bases, normal-ordered mode action, contravariant Gram matrices
// and the null-vector quotient. Used for small cutoffs and as the exact
// oracle behind the float construction.
#pragma once

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "cftmps/algebra.hpp"
#include "cftmps/common.hpp"

namespace cftmps {

/// One canonical decorated monomial b_1(-m_1)...b_l(-m_l) |hw_component>,
/// decoration sorted descending by (mode, generator).
struct BasisState {
  int hw_component = 0;
  std::vector<std::pair<int, int>> decoration;  // (mode >= 1, generator index)

  int level() const {
    int l = 0;
    for (const auto& [m, a] : decoration) l += m;
    return l;
  }
  bool operator<(const BasisState& o) const {
    if (hw_component != o.hw_component) return hw_component < o.hw_component;
    return decoration < o.decoration;
  }
  bool operator==(const BasisState& o) const {
    return hw_component == o.hw_component && decoration == o.decoration;
  }
};

/// Formal rational linear combination of canonical states.
using StateCombo = std::map<BasisState, Rational>;

namespace detail {
inline void add_to(StateCombo& combo, const BasisState& s, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = combo.emplace(s, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) combo.erase(it);
  }
}
}  // namespace detail

/// Exact generator matrices for the rational path. Supports the heisenberg
/// charge reps and su(2) j in {0, 1/2}, which have rational entries in the
/// orthonormal weight basis.
struct RationalIrrep {
  int dim = 1;
  std::vector<std::vector<std::vector<Rational>>> rho;  // rho[a][row][col]

  static RationalIrrep make(const AlgebraData& alg, const WeightLabel& lambda) {
    RationalIrrep r;
    if (alg.kind == AlgebraKind::Heisenberg) {
      r.dim = 1;
      r.rho = {{{lambda.value}}};
      return r;
    }
    Rational two_j = 2 * lambda.value;
    if (two_j == 0) {
      r.dim = 1;
      r.rho = {{{Rational(0)}}, {{Rational(0)}}, {{Rational(0)}}};
      return r;
    }
    if (two_j == 1) {
      r.dim = 2;
      auto z = std::vector<std::vector<Rational>>(2, std::vector<Rational>(2, Rational(0)));
      auto j3 = z, jp = z, jm = z;
      j3[0][0] = Rational(1, 2);
      j3[1][1] = Rational(-1, 2);
      jp[0][1] = 1;
      jm[1][0] = 1;
      r.rho = {j3, jp, jm};
      return r;
    }
    throw ValidationError("RationalIrrep: exact path supports su(2) j in {0, 1/2} only");
  }
};

/// Normal-ordered application of a(n) to a linear combination of canonical
/// states, via [a(n), b(m)] = [a,b](n+m) + delta_{n,-m} n k Tr[ab], with
/// a(n) annihilating the highest-weight space for n > 0 and a(0) acting by rho.
class FockAction {
 public:
  FockAction(const AlgebraData& alg, RationalIrrep irrep) : alg_(alg), irrep_(std::move(irrep)) {}

  StateCombo apply(int a, int n, const StateCombo& in) const {
    StateCombo out;
    for (const auto& [s, c] : in) {
      StateCombo part = apply_one(a, n, s);
      for (const auto& [t, d] : part) detail::add_to(out, t, c * d);
    }
    return out;
  }

  StateCombo apply_one(int a, int n, const BasisState& s) const {
    StateCombo out;
    if (n < 0) {
      create(-n, a, s, 1, out);
    } else if (n == 0) {
      zero_mode(a, s, 1, out);
    } else {
      annihilate(a, n, s, 1, out);
    }
    return out;
  }

  const AlgebraData& algebra() const { return alg_; }
  const RationalIrrep& irrep() const { return irrep_; }

 private:
  // a(-m) s, accumulated with weight c.
  void create(int m, int a, const BasisState& s, const Rational& c, StateCombo& out) const {
    if (s.decoration.empty() || std::make_pair(m, a) >= s.decoration.front()) {
      BasisState t = s;
      t.decoration.insert(t.decoration.begin(), {m, a});
      detail::add_to(out, t, c);
      return;
    }
    auto [m1, b] = s.decoration.front();
    BasisState rest = s;
    rest.decoration.erase(rest.decoration.begin());
    // a(-m) b(-m1) = b(-m1) a(-m) + [a,b](-m-m1)
    StateCombo inner;
    create(m, a, rest, 1, inner);
    for (const auto& [t, d] : inner) create(m1, b, t, c * d, out);
    for (int e = 0; e < alg_.dim_g; ++e) {
      const Rational& fc = alg_.f[e][a][b];
      if (fc != 0) create(m + m1, e, rest, c * fc, out);
    }
  }

  void zero_mode(int a, const BasisState& s, const Rational& c, StateCombo& out) const {
    if (s.decoration.empty()) {
      for (int row = 0; row < irrep_.dim; ++row) {
        const Rational& r = irrep_.rho[a][row][s.hw_component];
        if (r != 0) detail::add_to(out, BasisState{row, {}}, c * r);
      }
      return;
    }
    auto [m1, b] = s.decoration.front();
    BasisState rest = s;
    rest.decoration.erase(rest.decoration.begin());
    StateCombo inner;
    zero_mode(a, rest, 1, inner);
    for (const auto& [t, d] : inner) create(m1, b, t, c * d, out);
    for (int e = 0; e < alg_.dim_g; ++e) {
      const Rational& fc = alg_.f[e][a][b];
      if (fc != 0) create(m1, e, rest, c * fc, out);
    }
  }

  void annihilate(int a, int n, const BasisState& s, const Rational& c, StateCombo& out) const {
    if (s.decoration.empty()) return;  // a(n) kills the hw space for n > 0
    auto [m1, b] = s.decoration.front();
    BasisState rest = s;
    rest.decoration.erase(rest.decoration.begin());
    // central term
    if (n == m1) {
      Rational z = Rational(n) * alg_.level * alg_.kappa[a][b];
      if (z != 0) detail::add_to(out, rest, c * z);
    }
    // [a,b](n - m1)
    for (int e = 0; e < alg_.dim_g; ++e) {
      const Rational& fc = alg_.f[e][a][b];
      if (fc == 0) continue;
      if (n < m1) {
        create(m1 - n, e, rest, c * fc, out);
      } else if (n == m1) {
        zero_mode(e, rest, c * fc, out);
      } else {
        annihilate(e, n - m1, rest, c * fc, out);
      }
    }
    // b(-m1) a(n) rest
    StateCombo inner;
    annihilate(a, n, rest, 1, inner);
    for (const auto& [t, d] : inner) create(m1, b, t, c * d, out);
  }

  AlgebraData alg_;
  RationalIrrep irrep_;
};

/// All canonical decorated monomials of total level m over dim V hw components.
/// Count = p(m, dim_g) * dim V.
inline std::vector<BasisState> enumerate_basis(const AlgebraData& alg, int hw_dim, int m) {
  if (m < 0) throw ValidationError("enumerate_basis: negative level");
  std::vector<std::vector<std::pair<int, int>>> decorations;
  std::vector<std::pair<int, int>> cur;
  // entries descending by (mode, gen); recursive choice with cap
  auto rec = [&](auto&& self, int remaining, std::pair<int, int> cap) -> void {
    if (remaining == 0) {
      decorations.push_back(cur);
      return;
    }
    for (int mode = std::min(remaining, cap.first); mode >= 1; --mode) {
      int gen_max = (mode == cap.first) ? cap.second : alg.dim_g - 1;
      for (int gen = gen_max; gen >= 0; --gen) {
        cur.push_back({mode, gen});
        self(self, remaining - mode, {mode, gen});
        cur.pop_back();
      }
    }
  };
  rec(rec, m, {m, alg.dim_g - 1});
  std::vector<BasisState> out;
  out.reserve(decorations.size() * hw_dim);
  for (int h = 0; h < hw_dim; ++h)
    for (const auto& d : decorations) out.push_back(BasisState{h, d});
  std::sort(out.begin(), out.end());
  return out;
}

/// Exact contravariant pairing <u, v> obtained by peeling u's decoration
/// with a(-n)^dag = tau(a)(n).
inline Rational contravariant_pairing(const FockAction& act, const BasisState& u,
                                      const StateCombo& v) {
  if (u.decoration.empty()) {
    Rational r = 0;
    for (const auto& [t, c] : v)
      if (t.decoration.empty() && t.hw_component == u.hw_component) r += c;
    return r;
  }
  auto [m1, b] = u.decoration.front();
  BasisState rest = u;
  rest.decoration.erase(rest.decoration.begin());
  return contravariant_pairing(act, rest, act.apply(act.algebra().adjoint[b], m1, v));
}

/// Exact Gram matrix of a level basis under the contravariant form.
inline std::vector<std::vector<Rational>> gram_matrix(const FockAction& act,
                                                      const std::vector<BasisState>& basis) {
  const int n = static_cast<int>(basis.size());
  std::vector<std::vector<Rational>> g(n, std::vector<Rational>(n, Rational(0)));
  for (int j = 0; j < n; ++j) {
    StateCombo vj{{basis[j], Rational(1)}};
    for (int i = 0; i <= j; ++i) {
      g[i][j] = contravariant_pairing(act, basis[i], vj);
      g[j][i] = g[i][j];
    }
  }
  return g;
}

/// Exact rank by fraction-preserving Gaussian elimination.
inline int rational_rank(std::vector<std::vector<Rational>> m) {
  const int rows = static_cast<int>(m.size());
  if (rows == 0) return 0;
  const int cols = static_cast<int>(m[0].size());
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    for (int r = rank; r < rows; ++r)
      if (m[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(m[rank], m[pivot]);
    const Rational inv = Rational(1) / m[rank][col];
    for (int c = col; c < cols; ++c) m[rank][c] *= inv;
    for (int r = 0; r < rows; ++r) {
      if (r == rank || m[r][col] == 0) continue;
      const Rational f = m[r][col];
      for (int c = col; c < cols; ++c) m[r][c] -= f * m[rank][c];
    }
    ++rank;
  }
  return rank;
}

}  // namespace cftmps

// Lie-algebraic input data: structure constants, invariant form, adjoint
// involution, finite irreps, conformal weights and fusion gates.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cftmps/common.hpp"

namespace cftmps {

enum class AlgebraKind { Simple, Heisenberg };

/// Highest-weight label: su(2) spin j (stored as 2j) or a heisenberg charge.
struct WeightLabel {
  Rational value;  // j for su(2), alpha for heisenberg

  static WeightLabel spin(int two_j) { return {Rational(two_j, 2)}; }
  static WeightLabel charge(const Rational& alpha) { return {alpha}; }

  bool operator==(const WeightLabel& o) const { return value == o.value; }
};

struct AlgebraData {
  AlgebraKind kind = AlgebraKind::Heisenberg;
  int dim_g = 1;                                    // number of generators
  std::vector<std::vector<std::vector<Rational>>> f;  // f[c][a][b], [e_a,e_b] = sum_c f^c_ab e_c
  std::vector<std::vector<Rational>> kappa;         // invariant form Tr[ab]
  std::vector<int> adjoint;                         // index involution tau, a(n)^dag = tau(a)(-n)
  int level = 1;                                    // k

  Rational bracket_coeff(int c, int a, int b) const { return f[c][a][b]; }

  /// kappa(e_a, e_b)
  const Rational& form(int a, int b) const { return kappa[a][b]; }
};

struct ValidationCheck {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::string first_failure() const {
    for (const auto& c : checks)
      if (!c.pass) return c.name + ": " + c.detail;
    return {};
  }
};

namespace detail {
inline std::string idx3(int a, int b, int c) {
  std::ostringstream os;
  os << "(" << a << "," << b << "," << c << ")";
  return os.str();
}
}  // namespace detail

/// Exact consistency gate; pass required before any module construction.
inline ValidationReport validate_algebra(const AlgebraData& alg) {
  ValidationReport rep;
  const int d = alg.dim_g;
  auto fail = [&rep](const std::string& name, const std::string& detail) {
    rep.checks.push_back({name, false, detail});
  };
  auto ok = [&rep](const std::string& name) { rep.checks.push_back({name, true, {}}); };

  // shapes
  bool shapes = static_cast<int>(alg.f.size()) == d && static_cast<int>(alg.kappa.size()) == d &&
                static_cast<int>(alg.adjoint.size()) == d && alg.level >= 1 && d >= 1;
  for (int c = 0; shapes && c < d; ++c) {
    shapes = static_cast<int>(alg.f[c].size()) == d && static_cast<int>(alg.kappa[c].size()) == d;
    for (int a = 0; shapes && a < d; ++a) shapes = static_cast<int>(alg.f[c][a].size()) == d;
  }
  if (!shapes) {
    fail("shapes", "inconsistent array dimensions or level < 1");
    return rep;
  }
  ok("shapes");

  // antisymmetry
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (alg.f[c][a][b] != -alg.f[c][b][a]) {
          fail("antisymmetry", "f^c_ab != -f^c_ba at " + detail::idx3(c, a, b));
          return rep;
        }
  ok("antisymmetry");

  // Jacobi: sum_e f^e_ab f^d_ec + f^e_bc f^d_ea + f^e_ca f^d_eb = 0
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int dd = 0; dd < d; ++dd) {
          Rational s = 0;
          for (int e = 0; e < d; ++e)
            s += alg.f[e][a][b] * alg.f[dd][e][c] + alg.f[e][b][c] * alg.f[dd][e][a] +
                 alg.f[e][c][a] * alg.f[dd][e][b];
          if (s != 0) {
            fail("jacobi", "residual nonzero at " + detail::idx3(a, b, c));
            return rep;
          }
        }
  ok("jacobi");

  // kappa symmetric and ad-invariant: kappa([a,b],c) + kappa(b,[a,c]) = 0
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (alg.kappa[a][b] != alg.kappa[b][a]) {
        fail("kappa_symmetric", "at " + detail::idx3(a, b, 0));
        return rep;
      }
  ok("kappa_symmetric");
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        Rational s = 0;
        for (int e = 0; e < d; ++e) s += alg.f[e][a][b] * alg.kappa[e][c] + alg.f[e][a][c] * alg.kappa[b][e];
        if (s != 0) {
          fail("kappa_invariance", "at " + detail::idx3(a, b, c));
          return rep;
        }
      }
  ok("kappa_invariance");

  // adjoint involution compatibility: tau^2 = id, kappa(tau a, tau b) = kappa(a,b),
  // [tau a, tau b] = -tau([a,b])
  for (int a = 0; a < d; ++a) {
    int t = alg.adjoint[a];
    if (t < 0 || t >= d || alg.adjoint[t] != a) {
      fail("adjoint_involution", "index " + std::to_string(a));
      return rep;
    }
  }
  ok("adjoint_involution");
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (alg.kappa[alg.adjoint[a]][alg.adjoint[b]] != alg.kappa[a][b]) {
        fail("adjoint_kappa", "at " + detail::idx3(a, b, 0));
        return rep;
      }
      for (int c = 0; c < d; ++c)
        if (alg.f[alg.adjoint[c]][alg.adjoint[a]][alg.adjoint[b]] != -alg.f[c][a][b]) {
          fail("adjoint_bracket", "at " + detail::idx3(c, a, b));
          return rep;
        }
    }
  ok("adjoint_bracket");

  if (alg.kind == AlgebraKind::Heisenberg) {
    bool h = d == 1 && alg.kappa[0][0] == 1;
    for (int c = 0; h && c < d; ++c)
      for (int a = 0; h && a < d; ++a)
        for (int b = 0; h && b < d; ++b) h = alg.f[c][a][b] == 0;
    if (!h) {
      fail("heisenberg_form", "requires dim 1, zero brackets, kappa = 1");
      return rep;
    }
    ok("heisenberg_form");
  }
  return rep;
}

/// true iff <theta, lambda> <= k; su(2): 2j <= k. Heisenberg has no root condition.
inline bool integrable(const AlgebraData& alg, const WeightLabel& lambda) {
  if (alg.kind == AlgebraKind::Heisenberg) return true;
  Rational two_j = 2 * lambda.value;
  return two_j >= 0 && denominator(two_j) == 1 && two_j <= alg.level;
}

/// L0 eigenvalue of the highest-weight vector: su(2)_k j(j+1)/(k+2),
/// heisenberg alpha^2/2.
inline Rational conformal_weight(const AlgebraData& alg, const WeightLabel& lambda) {
  if (alg.kind == AlgebraKind::Heisenberg) return lambda.value * lambda.value / 2;
  if (!integrable(alg, lambda)) throw ValidationError("conformal_weight: weight not integrable");
  return lambda.value * (lambda.value + 1) / (alg.level + 2);
}

/// Existence gate for a primary field of charge lambda3 mapping
/// M_{lambda1} -> M_{lambda2}.
inline bool fusion_allowed(const AlgebraData& alg, const WeightLabel& lambda1,
                           const WeightLabel& lambda3, const WeightLabel& lambda2) {
  if (alg.kind == AlgebraKind::Heisenberg) return lambda2.value == lambda1.value + lambda3.value;
  if (!integrable(alg, lambda1) || !integrable(alg, lambda2) || !integrable(alg, lambda3))
    throw ValidationError("fusion_allowed: non-integrable label");
  const Rational j1 = lambda1.value, j3 = lambda3.value, j2 = lambda2.value;
  if (denominator(Rational(j1 + j2 + j3)) != 1) return false;
  Rational lo = abs(Rational(j1 - j3));
  Rational hi = std::min(Rational(j1 + j3), Rational(Rational(alg.level) - j1 - j3));
  return lo <= j2 && j2 <= hi;
}

/// Irreducible finite-dimensional representation on an orthonormal weight basis.
/// For su(2): generators ordered (J3, J+, J-), basis |j,j>, |j,j-1>, ..., |j,-j>.
struct FiniteIrrep {
  WeightLabel label;
  int dim = 1;
  std::vector<Matrix> rho;  // one matrix per generator

  static FiniteIrrep su2(int two_j) {
    if (two_j < 0) throw ValidationError("su2 irrep: negative weight");
    FiniteIrrep r;
    r.label = WeightLabel::spin(two_j);
    r.dim = two_j + 1;
    const double j = two_j / 2.0;
    Matrix j3 = Matrix::Zero(r.dim, r.dim), jp = Matrix::Zero(r.dim, r.dim),
           jm = Matrix::Zero(r.dim, r.dim);
    for (int i = 0; i < r.dim; ++i) {
      const double m = j - i;  // basis index i <-> weight m = j - i
      j3(i, i) = m;
      if (i > 0) jp(i - 1, i) = std::sqrt((j - m) * (j + m + 1.0));
      if (i + 1 < r.dim) jm(i + 1, i) = std::sqrt((j + m) * (j - m + 1.0));
    }
    r.rho = {j3, jp, jm};
    return r;
  }

  static FiniteIrrep heisenberg(const Rational& alpha) {
    FiniteIrrep r;
    r.label = WeightLabel::charge(alpha);
    r.dim = 1;
    r.rho = {Matrix::Constant(1, 1, to_double(alpha))};
    return r;
  }
};

/// Preset: the abelian Heisenberg algebra (free boson currents).
inline AlgebraData heisenberg_algebra() {
  AlgebraData alg;
  alg.kind = AlgebraKind::Heisenberg;
  alg.dim_g = 1;
  alg.f = {{{Rational(0)}}};
  alg.kappa = {{Rational(1)}};
  alg.adjoint = {0};
  alg.level = 1;
  return alg;
}

/// Preset: su(2) at level k in the basis (J3, J+, J-), kappa normalized by the
/// trace in the defining representation so the central term is n k Tr[ab].
inline AlgebraData su2_algebra(int k) {
  if (k < 1) throw ValidationError("su2_algebra: level must be positive");
  AlgebraData alg;
  alg.kind = AlgebraKind::Simple;
  alg.dim_g = 3;
  alg.level = k;
  auto zero3 = std::vector<std::vector<Rational>>(3, std::vector<Rational>(3, Rational(0)));
  alg.f = {zero3, zero3, zero3};
  // [J3,J+] = J+, [J3,J-] = -J-, [J+,J-] = 2 J3
  alg.f[1][0][1] = 1;
  alg.f[1][1][0] = -1;
  alg.f[2][0][2] = -1;
  alg.f[2][2][0] = 1;
  alg.f[0][1][2] = 2;
  alg.f[0][2][1] = -2;
  alg.kappa = zero3;
  alg.kappa[0][0] = Rational(1, 2);
  alg.kappa[1][2] = 1;
  alg.kappa[2][1] = 1;
  alg.adjoint = {0, 2, 1};
  return alg;
}

inline FiniteIrrep finite_irrep(const AlgebraData& alg, const WeightLabel& lambda) {
  if (alg.kind == AlgebraKind::Heisenberg) return FiniteIrrep::heisenberg(lambda.value);
  if (!integrable(alg, lambda)) throw ValidationError("finite_irrep: weight not integrable");
  return FiniteIrrep::su2(twice_int(lambda.value));
}

namespace detail {
inline Rational json_to_rational(const nlohmann::json& j) {
  if (j.is_string()) return Rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number_float()) {
    double v = j.get<double>();
    long long r = std::llround(v * 2);  // half-integers appear in weights
    if (std::abs(v * 2 - r) > 1e-12) throw ValidationError("non-exact rational in JSON");
    return Rational(r, 2);
  }
  throw ValidationError("cannot parse rational from JSON");
}
}  // namespace detail

/// Load an algebra from {kind, dim, f[[..]], kappa[[..]], adjoint[..], level},
/// or from the shipped presets "heisenberg" / "su2".
inline AlgebraData algebra_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    std::string name = j.get<std::string>();
    if (name == "heisenberg") return heisenberg_algebra();
    if (name == "su2") return su2_algebra(1);
    throw ValidationError("unknown algebra preset: " + name);
  }
  std::string kind = j.at("kind").get<std::string>();
  int level = j.value("level", 1);
  if (kind == "heisenberg") {
    AlgebraData alg = heisenberg_algebra();
    alg.level = level;
    return alg;
  }
  if (kind == "su2") return su2_algebra(level);
  if (kind != "simple") throw ValidationError("unknown algebra kind: " + kind);
  AlgebraData alg;
  alg.kind = AlgebraKind::Simple;
  alg.dim_g = j.at("dim").get<int>();
  alg.level = level;
  const auto& jf = j.at("f");
  const auto& jk = j.at("kappa");
  alg.f.resize(alg.dim_g);
  alg.kappa.resize(alg.dim_g);
  for (int c = 0; c < alg.dim_g; ++c) {
    alg.f[c].resize(alg.dim_g);
    alg.kappa[c].resize(alg.dim_g);
    for (int a = 0; a < alg.dim_g; ++a) {
      alg.f[c][a].resize(alg.dim_g);
      for (int b = 0; b < alg.dim_g; ++b) alg.f[c][a][b] = detail::json_to_rational(jf[c][a][b]);
      alg.kappa[c][a] = detail::json_to_rational(jk[c][a]);
    }
  }
  alg.adjoint = j.at("adjoint").get<std::vector<int>>();
  return alg;
}

}  // namespace cftmps

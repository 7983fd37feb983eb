#include <catch_amalgamated.hpp>

#include "cftmps/primary_field.hpp"

using namespace cftmps;

namespace {

// residual of b(m) Phi_v - Phi_v b(m) = sum_{v'} rho(b)(v',v) Phi_{v'} on the
// built blocks, maximized over generators, modes |m| <= mode_max and all
// blocks whose terms stay inside the built region
double commutation_residual(const PrimaryFieldModes& F, const GradedModule& src,
                            const GradedModule& tgt, int mode_max) {
  const AlgebraData& alg = src.algebra();
  const FiniteIrrep rep = finite_irrep(alg, F.spec.charge);
  double worst = 0.0;
  auto mode_matrix = [](const GradedModule& mod, int a, int p, int m_from, int lim) -> Matrix {
    // matrix of a(p) from level m_from, or empty if outside [0, lim]
    const int m_to = m_from - p;
    if (m_to < 0 || m_to > lim || m_from < 0 || m_from > lim) return Matrix();
    if (p == 0) return Matrix(mod.zero_mode(a, m_from));
    if (p > 0) {
      if (p > m_from) return Matrix::Zero(mod.dim(m_to), mod.dim(m_from));
      return Matrix(mod.lower(a, p, m_from));
    }
    return Matrix(mod.lower(mod.algebra().adjoint[a], -p, m_to)).transpose();
  };
  for (int b = 0; b < alg.dim_g; ++b)
    for (int p = -mode_max; p <= mode_max; ++p)
      for (int v = 0; v < F.charge_dim; ++v)
        for (int ms = 0; ms <= F.max_src; ++ms)
          for (int mt = 0; mt <= F.max_tgt; ++mt) {
            // target block lives at (ms, mt - p)
            const int mtp = mt - p;
            if (mtp < 0 || mtp > F.max_tgt) continue;
            if (ms - p < 0 || ms - p > F.max_src) continue;
            Matrix left = mode_matrix(tgt, b, p, mt, F.max_tgt);
            if (left.size() == 0) continue;
            Matrix right = mode_matrix(src, b, p, ms, F.max_src);
            if (right.size() == 0) continue;
            Matrix lhs = left * F.block(v, ms, mt) - F.block(v, ms - p, mtp) * right;
            Matrix rhs = Matrix::Zero(lhs.rows(), lhs.cols());
            for (int vp = 0; vp < F.charge_dim; ++vp) {
              const double c = rep.rho[b](vp, v);
              if (c != 0.0) rhs += c * F.block(vp, ms, mtp);
            }
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
          }
  return worst;
}

}  // namespace

TEST_CASE("su(2) coupling matrices") {
  SECTION("trivial charge gives the identity") {
    auto t = su2_intertwiner(0, 3, 3);
    REQUIRE(t.size() == 1);
    CHECK((t[0] - Matrix::Identity(4, 4)).norm() < 1e-14);
  }
  SECTION("singlet from two spin one-half") {
    auto t = su2_intertwiner(1, 1, 0);
    REQUIRE(t.size() == 2);
    CHECK(t[0](0, 1) == Catch::Approx(1.0));   // amplitude normalization
    CHECK(t[1](0, 0) == Catch::Approx(-1.0));  // antisymmetric combination
    CHECK(t[0](0, 0) == 0.0);
    CHECK(t[1](0, 1) == 0.0);
  }
  SECTION("uncoupled triple is zero") {
    auto t = su2_intertwiner(1, 1, 3);
    for (const Matrix& m : t) CHECK(m.norm() == 0.0);
  }
  SECTION("equivariance for several triples") {
    for (auto [j3, j1, j2] : std::vector<std::array<int, 3>>{
             {1, 1, 2}, {1, 2, 1}, {2, 2, 2}, {1, 3, 2}, {2, 1, 1}, {3, 3, 2}}) {
      auto t = su2_intertwiner(j3, j1, j2);
      FiniteIrrep r3 = FiniteIrrep::su2(j3), r1 = FiniteIrrep::su2(j1), r2 = FiniteIrrep::su2(j2);
      double worst = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int v = 0; v < r3.dim; ++v) {
          Matrix lhs = r2.rho[a] * t[v] - t[v] * r1.rho[a];
          Matrix rhs = Matrix::Zero(r2.dim, r1.dim);
          for (int vp = 0; vp < r3.dim; ++vp) rhs += r3.rho[a](vp, v) * t[vp];
          worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
      INFO("triple " << j3 << " " << j1 << " " << j2);
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("heisenberg: peeling recursion equals the vertex-operator closed form") {
  AlgebraData h = heisenberg_algebra();
  const int L = 8;
  GradedModule src = build_heisenberg_module(h, Rational(0), L);
  GradedModule tgt = build_heisenberg_module(h, Rational(1), L);
  PrimaryFieldSpec spec = make_field_spec(h, WeightLabel::charge(0), WeightLabel::charge(1),
                                          WeightLabel::charge(1));
  REQUIRE(spec.allowed);
  PrimaryFieldModes peeled = build_field_modes(src, tgt, spec, L, L);
  PrimaryFieldModes vertex = build_vertex_operator_blocks(src, tgt, spec, L, L);
  CHECK(cross_validate(peeled, vertex) < 1e-10);

  // negative control: a perturbed block must be detected
  PrimaryFieldModes broken = vertex;
  broken.blocks[0][2][3](0, 0) += 1e-6;
  CHECK(cross_validate(peeled, broken) > 1e-7);

  // low-level hand values: <a(-1) hw_tgt | V | hw_src> = alpha, ket side -alpha
  CHECK(peeled.block(0, 0, 1)(0, 0) == Catch::Approx(1.0));
  CHECK(peeled.block(0, 1, 0)(0, 0) == Catch::Approx(-1.0));
  CHECK(commutation_residual(peeled, src, tgt, 3) < 1e-12);
}

TEST_CASE("heisenberg: charged source sector") {
  AlgebraData h = heisenberg_algebra();
  const int L = 7;
  GradedModule m_neg = build_heisenberg_module(h, Rational(-1), L);
  GradedModule m_vac = build_heisenberg_module(h, Rational(0), L);
  PrimaryFieldSpec spec = make_field_spec(h, WeightLabel::charge(-1), WeightLabel::charge(1),
                                          WeightLabel::charge(0));
  PrimaryFieldModes peeled = build_field_modes(m_neg, m_vac, spec, L, L);
  PrimaryFieldModes vertex = build_vertex_operator_blocks(m_neg, m_vac, spec, L, L);
  CHECK(cross_validate(peeled, vertex) < 1e-10);
  CHECK(commutation_residual(peeled, m_neg, m_vac, 3) < 1e-12);
}

TEST_CASE("forbidden fusion gives a structural zero") {
  AlgebraData h = heisenberg_algebra();
  GradedModule vac = build_heisenberg_module(h, Rational(0), 4);
  PrimaryFieldSpec spec = make_field_spec(h, WeightLabel::charge(0), WeightLabel::charge(1),
                                          WeightLabel::charge(0));
  CHECK_FALSE(spec.allowed);
  PrimaryFieldModes F = build_field_modes(vac, vac, spec, 4, 4);
  CHECK(F.structural_zero);
  for (int ms = 0; ms <= 4; ++ms)
    for (int mt = 0; mt <= 4; ++mt) CHECK(F.block(0, ms, mt).norm() == 0.0);
}

TEST_CASE("su(2)_1 primary field blocks satisfy the commutation rule") {
  AlgebraData su2 = su2_algebra(1);
  const int L = 6;
  GradedModule vac = build_module_recursive(su2, WeightLabel::spin(0), L);
  GradedModule half = build_module_recursive(su2, WeightLabel::spin(1), L);

  PrimaryFieldSpec up = make_field_spec(su2, WeightLabel::spin(1), WeightLabel::spin(1),
                                        WeightLabel::spin(0));
  REQUIRE(up.allowed);
  PrimaryFieldModes F_up = build_field_modes(half, vac, up, L, L);
  CHECK(commutation_residual(F_up, half, vac, 3) < 1e-11);

  PrimaryFieldSpec down = make_field_spec(su2, WeightLabel::spin(0), WeightLabel::spin(1),
                                          WeightLabel::spin(1));
  REQUIRE(down.allowed);
  PrimaryFieldModes F_down = build_field_modes(vac, half, down, L, L);
  CHECK(commutation_residual(F_down, vac, half, 3) < 1e-11);

  // the base block is the coupling matrix, nonzero
  CHECK(F_up.block(0, 0, 0).norm() > 0.5);
}

TEST_CASE("range errors outside the built region") {
  AlgebraData h = heisenberg_algebra();
  GradedModule vac = build_heisenberg_module(h, Rational(0), 4);
  GradedModule one = build_heisenberg_module(h, Rational(1), 4);
  PrimaryFieldSpec spec = make_field_spec(h, WeightLabel::charge(0), WeightLabel::charge(1),
                                          WeightLabel::charge(1));
  PrimaryFieldModes F = build_field_modes(vac, one, spec, 3, 3);
  CHECK_THROWS_AS(F.block(0, 4, 0), RangeError);
  CHECK_THROWS_AS(F.block(0, 0, 4), RangeError);
  CHECK_THROWS_AS(build_field_modes(vac, one, spec, 5, 4), RangeError);
}

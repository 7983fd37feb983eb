#include <catch_amalgamated.hpp>

#include "cftmps/fock.hpp"
#include "cftmps/partitions.hpp"

using namespace cftmps;

TEST_CASE("basis enumeration counts p(m, dim_g) * dim V") {
  AlgebraData h = heisenberg_algebra();
  AlgebraData su2 = su2_algebra(1);
  PartitionTable t(8, 3);
  for (int m = 0; m <= 8; ++m) {
    CHECK(BigInt(enumerate_basis(h, 1, m).size()) == t.count(m, 1));
    CHECK(BigInt(enumerate_basis(su2, 2, m).size()) == 2 * t.count(m, 3));
  }
}

TEST_CASE("heisenberg exact Gram at low levels") {
  AlgebraData h = heisenberg_algebra();
  FockAction act(h, RationalIrrep::make(h, WeightLabel::charge(0)));
  // level 2 basis: a(-2)|0>, a(-1)^2|0>; Gram = diag(2, 2) at k = 1
  auto basis = enumerate_basis(h, 1, 2);
  REQUIRE(basis.size() == 2);
  auto g = gram_matrix(act, basis);
  // identify which index is which by decoration
  for (size_t i = 0; i < 2; ++i) {
    CHECK(g[i][i] == 2);
    CHECK(g[i][1 - i] == 0);
  }
  CHECK(rational_rank(g) == 2);
  // level 3: a(-3), a(-2)a(-1), a(-1)^3 -> diag(3, 2, 6)
  auto b3 = enumerate_basis(h, 1, 3);
  auto g3 = gram_matrix(act, b3);
  std::vector<Rational> diag;
  for (size_t i = 0; i < 3; ++i) {
    diag.push_back(g3[i][i]);
    for (size_t j = 0; j < 3; ++j)
      if (i != j) CHECK(g3[i][j] == 0);
  }
  std::sort(diag.begin(), diag.end());
  CHECK(diag == std::vector<Rational>{2, 3, 6});
}

TEST_CASE("gram is symmetric and contravariant form respects the adjoint") {
  AlgebraData su2 = su2_algebra(1);
  FockAction act(su2, RationalIrrep::make(su2, WeightLabel::spin(1)));
  auto basis = enumerate_basis(su2, 2, 2);
  auto g = gram_matrix(act, basis);
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j) CHECK(g[i][j] == g[j][i]);
}

TEST_CASE("su(2)_1 quotient ranks match the character dimensions") {
  AlgebraData su2 = su2_algebra(1);
  PartitionTable p3(6, 3);
  SECTION("vacuum") {
    FockAction act(su2, RationalIrrep::make(su2, WeightLabel::spin(0)));
    for (int m = 0; m <= 3; ++m) {
      auto g = gram_matrix(act, enumerate_basis(su2, 1, m));
      CHECK(BigInt(rational_rank(g)) == su2_graded_dimension(1, 0, m, p3));
    }
  }
  SECTION("spin one-half") {
    FockAction act(su2, RationalIrrep::make(su2, WeightLabel::spin(1)));
    for (int m = 0; m <= 3; ++m) {
      auto g = gram_matrix(act, enumerate_basis(su2, 2, m));
      CHECK(BigInt(rational_rank(g)) == su2_graded_dimension(1, 1, m, p3));
    }
  }
}

TEST_CASE("normal ordering: affine commutator holds on raw states") {
  AlgebraData su2 = su2_algebra(2);
  FockAction act(su2, RationalIrrep::make(su2, WeightLabel::spin(1)));
  auto basis = enumerate_basis(su2, 2, 3);
  // [a(n), b(m)] v = [a,b](n+m) v + delta n k kappa(a,b) v for a few mode pairs
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int n : {-2, -1, 1, 2})
        for (int mm : {-1, 1}) {
          for (const BasisState& s : basis) {
            StateCombo v{{s, 1}};
            StateCombo lhs = act.apply(a, n, act.apply(b, mm, v));
            for (const auto& [t, c] : act.apply(b, mm, act.apply(a, n, v))) {
              auto it = lhs.emplace(t, 0).first;
              it->second -= c;
            }
            StateCombo rhs;
            for (int e = 0; e < 3; ++e) {
              const Rational& fc = su2.f[e][a][b];
              if (fc == 0) continue;
              for (const auto& [t, c] : act.apply(e, n + mm, v))
                detail::add_to(rhs, t, c * fc);
            }
            if (n + mm == 0)
              detail::add_to(rhs, s, Rational(n) * su2.level * su2.kappa[a][b]);
            for (const auto& [t, c] : rhs) {
              auto it = lhs.emplace(t, 0).first;
              it->second -= c;
            }
            for (const auto& [t, c] : lhs) {
              INFO("a=" << a << " b=" << b << " n=" << n << " m=" << mm);
              CHECK(c == 0);
            }
          }
        }
}

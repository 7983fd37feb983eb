#include <catch_amalgamated.hpp>

#include "cftmps/mps.hpp"
#include "cftmps/oracle.hpp"

using namespace cftmps;

namespace {

CorrelatorRequest heisenberg_pair(double d, double d0, int N, int M = 0) {
  CorrelatorRequest r;
  r.alg = heisenberg_algebra();
  r.fields = {{WeightLabel::charge(1), 0}, {WeightLabel::charge(-1), 0}};
  r.chain = derive_heisenberg_chain(r.fields);
  r.d = d;
  r.d0 = d0;
  r.N = N;
  r.M = M;
  return r;
}

}  // namespace

TEST_CASE("insertion map: grid through theta(z) = e^{-z}") {
  InsertionMap m = map_insertions(std::log(2.0), 0.0, {0.5, 0.5});
  CHECK(m.q == Catch::Approx(0.5));
  REQUIRE(m.points.size() == 2);
  CHECK(m.points[0] == Catch::Approx(0.5));
  CHECK(m.points[1] == Catch::Approx(0.25));
  CHECK(m.prefactor == Catch::Approx(0.5));  // q^{1/2 + 1/2}

  InsertionMap off = map_insertions(1.0, 0.25, {0.5});
  CHECK(off.points[0] == Catch::Approx(std::exp(-1.25)));
  CHECK(off.prefactor == Catch::Approx(std::exp(-0.625)));
  CHECK_THROWS_AS(map_insertions(0.0, 0.0, {0.5}), ValidationError);
}

TEST_CASE("request validation") {
  CorrelatorRequest r = heisenberg_pair(1.0, 0.0, 4);
  REQUIRE(r.chain.size() == 3);
  CHECK(r.chain[0].value == 0);
  CHECK(r.chain[1].value == -1);
  CHECK(r.chain[2].value == 0);
  CHECK_NOTHROW(validate_request(r));

  CorrelatorRequest bad = r;
  bad.chain.pop_back();
  CHECK_THROWS_AS(validate_request(bad), ValidationError);
  bad = r;
  bad.chain[0] = WeightLabel::charge(1);
  CHECK_THROWS_AS(validate_request(bad), ValidationError);
  bad = r;
  bad.d = -1.0;
  CHECK_THROWS_AS(validate_request(bad), ValidationError);
  bad = r;
  bad.N = -1;
  CHECK_THROWS_AS(validate_request(bad), ValidationError);
  bad = r;
  bad.fields.clear();
  CHECK_THROWS_AS(validate_request(bad), ValidationError);
}

TEST_CASE("single charged insertion is a structural zero") {
  CorrelatorRequest r;
  r.alg = heisenberg_algebra();
  r.fields = {{WeightLabel::charge(1), 0}};
  r.chain = {WeightLabel::charge(0), WeightLabel::charge(0)};
  r.d = 1.0;
  r.N = 3;
  Workspace ws(r.alg);
  MpsApproximation mps = assemble_mps(r, ws);
  CHECK(mps.structural_zero);
  CHECK(mps.value == 0.0);
}

TEST_CASE("two-point value matches the closed form and the certified bound") {
  const double d = 1.0;
  CorrelatorRequest r = heisenberg_pair(d, 0.0, 10, 20);
  Workspace ws(r.alg);
  MpsApproximation mps = evaluate_renormalized(r, ws, 20);
  CHECK(mps.L == 20);
  CHECK_FALSE(mps.bond_truncated);

  const double q = std::exp(-d);
  const double exact = free_boson_n_point({1.0, -1.0}, {q, q * q}).real();
  INFO("value=" << mps.value << " exact=" << exact << " bound=" << mps.certified_bound);
  CHECK(std::abs(mps.value - exact) / std::abs(exact) < 2e-3);
  CHECK(std::abs(mps.value - exact) <= mps.certified_bound);
  CHECK(mps.q == Catch::Approx(q));
  CHECK(mps.s == Catch::Approx(std::sqrt(q)));
  // metadata prefactor: q^{sum h} with sum h = 1
  CHECK(mps.grid_prefactor == Catch::Approx(q));
  // covariance factor: exp(sum_j (j d + d0) h_j) = exp(1*0.5 + 2*0.5) here
  CHECK(mps.covariance_factor == Catch::Approx(std::exp(1.5)));
}

TEST_CASE("offset grid: covariance factor places the points correctly") {
  const double d = 1.0, d0 = 0.4;
  CorrelatorRequest r = heisenberg_pair(d, d0, 10, 18);
  Workspace ws(r.alg);
  MpsApproximation mps = assemble_mps(r, ws, 18);
  const double q = std::exp(-d), e0 = std::exp(-d0);
  const double exact = free_boson_n_point({1.0, -1.0}, {q * e0, q * q * e0}).real();
  CHECK(mps.covariance_factor ==
        Catch::Approx(std::exp((d + d0) * 0.5 + (2 * d + d0) * 0.5)));
  CHECK(std::abs(mps.value - exact) / std::abs(exact) < 2e-3);
}

TEST_CASE("left and right contraction agree") {
  CorrelatorRequest r = heisenberg_pair(0.8, 0.0, 4, 8);
  Workspace ws(r.alg);
  MpsApproximation mps = assemble_mps(r, ws, 8);
  GradedVector v0 = GradedVector::highest_weight(*mps.chain_modules[0], mps.L);
  GradedVector vn = GradedVector::highest_weight(*mps.chain_modules[2], mps.L);
  std::vector<const RegularizedField*> chain{&mps.sites[0][0], &mps.sites[1][0]};
  const double rl = contract_chain(chain, v0, vn);
  const double lr = contract_chain_reversed(chain, v0, vn);
  CHECK(rl == Catch::Approx(mps.raw_value));
  CHECK(std::abs(rl - lr) <= 1e-12 * std::max(1.0, std::abs(rl)));
}

TEST_CASE("dense site matrices reproduce the block contraction") {
  CorrelatorRequest r = heisenberg_pair(0.7, 0.0, 4, 8);
  Workspace ws(r.alg);
  MpsApproximation mps = assemble_mps(r, ws, 8);
  std::vector<Matrix> A1 = dense_site(mps, 1), A2 = dense_site(mps, 2);
  REQUIRE(A1.size() == 1);
  Vector v0 = Vector::Zero(A1[0].rows());
  v0(0) = 1.0;
  Vector vn = Vector::Zero(A2[0].cols());
  vn(0) = 1.0;
  const double dense_value = v0.dot(A1[0] * (A2[0] * vn));
  CHECK(dense_value == Catch::Approx(mps.raw_value).margin(1e-12));
  CHECK_THROWS_AS(dense_site(mps, 0), ValidationError);
  CHECK_THROWS_AS(dense_site(mps, 3), ValidationError);
}

TEST_CASE("grade-shift window N >= 2L keeps every block") {
  Workspace ws(heisenberg_algebra());
  CorrelatorRequest full = heisenberg_pair(1.0, 0.0, 16, 8);
  CorrelatorRequest wider = heisenberg_pair(1.0, 0.0, 40, 8);
  const double a = assemble_mps(full, ws, 8).value;
  const double b = assemble_mps(wider, ws, 8).value;
  CHECK(a == Catch::Approx(b).margin(1e-15));
}

TEST_CASE("projection is idempotent") {
  Workspace ws(heisenberg_algebra());
  CorrelatorRequest r = heisenberg_pair(1.0, 0.0, 4, 8);
  MpsApproximation mps = assemble_mps(r, ws, 8);
  const RegularizedField& w = mps.sites[0][0];
  RegularizedField twice = truncate(w, r.N);
  GradedVector v = GradedVector::highest_weight(*mps.chain_modules[1], mps.L);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (Vector& c : v.comp)
    c = Vector::NullaryExpr(c.size(), [&](Eigen::Index) { return gauss(rng); });
  GradedVector a = w.apply(v), b = twice.apply(v);
  a -= b;
  CHECK(a.norm() < 1e-14);
}

TEST_CASE("bond accounting: exact character sums and the growth bound") {
  CorrelatorRequest r = heisenberg_pair(1.0, 0.0, 4, 8);
  Workspace ws(r.alg);
  MpsApproximation mps = assemble_mps(r, ws, 8);
  // heisenberg: cumulative graded dimension at nN = 8 is sum_{m<=8} p(m) = 67
  CHECK(mps.bond_dim_accounting == 67);
  CHECK(BigFloat(mps.bond_dim_accounting) <= bond_dim_bound(2, 4, 1));
  REQUIRE(mps.bond_dims.size() == 3);
  for (int c = 0; c <= 2; ++c)
    CHECK(mps.bond_dims[c] == mps.chain_modules[c]->cumulative_dim(mps.L));
  CHECK(mps.bond_dim_actual == *std::max_element(mps.bond_dims.begin(), mps.bond_dims.end()));
  CHECK_FALSE(mps.bond_truncated);

  // a capped assembly flags the truncation but keeps the exact accounting
  CorrelatorRequest big = heisenberg_pair(1.0, 0.0, 8, 6);
  MpsApproximation capped = assemble_mps(big, ws, 6);
  CHECK(capped.bond_truncated);
  CHECK(capped.L == 6);
  PartitionTable table(16, 1);
  CHECK(capped.bond_dim_accounting ==
        cumulative_graded_dimension(r.alg, WeightLabel::charge(0), 16, table));
}

TEST_CASE("doubled correlator equals the squared chiral value and stays positive") {
  CorrelatorRequest r = heisenberg_pair(0.9, 0.0, 5, 10);
  Workspace ws(r.alg);
  MpsApproximation mps = assemble_mps(r, ws, 10);
  FcsApproximation fcs = fcs_evaluate(mps);
  CHECK(fcs.chiral_value == Catch::Approx(mps.value));
  CHECK(std::abs(fcs.value - mps.value * mps.value) <=
        1e-10 * std::max(1.0, mps.value * mps.value));
  CHECK(fcs.value >= 0.0);

  // the channel map preserves positivity: E(I) is positive semidefinite
  std::vector<Matrix> A = dense_site(mps, 1);
  Matrix X = Matrix::Identity(A[0].cols(), A[0].cols());
  Matrix Y = Matrix::Zero(A[0].rows(), A[0].rows());
  for (const Matrix& a : A) Y += a * X * a.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Y + Y.transpose()));
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("su(2)_1 spin-1/2 pair: charge selection and antisymmetry") {
  AlgebraData su2 = su2_algebra(1);
  Workspace ws(su2);
  auto value = [&](int k1, int k2) {
    CorrelatorRequest r;
    r.alg = su2;
    r.fields = {{WeightLabel::spin(1), k1}, {WeightLabel::spin(1), k2}};
    r.chain = {WeightLabel::spin(0), WeightLabel::spin(1), WeightLabel::spin(0)};
    r.d = 1.0;
    r.N = 6;
    r.M = 10;
    return assemble_mps(r, ws, 10).value;
  };
  const double v01 = value(0, 1), v10 = value(1, 0);
  CHECK(std::abs(v01) > 1e-6);
  CHECK(v01 == Catch::Approx(-v10));            // singlet pairing is antisymmetric
  CHECK(std::abs(value(0, 0)) < 1e-12);          // charge non-conservation vanishes
  CHECK(std::abs(value(1, 1)) < 1e-12);
}

TEST_CASE("component index outside the charge space is rejected") {
  CorrelatorRequest r = heisenberg_pair(1.0, 0.0, 2, 4);
  r.fields[0].component = 1;
  Workspace ws(r.alg);
  CHECK_THROWS_AS(assemble_mps(r, ws, 4), ValidationError);
}

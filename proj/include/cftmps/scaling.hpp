// Inversion of the error bounds into resource-scaling curves: minimal
// truncation N per target accuracy, the fitted accuracy exponent, and the
// growth rate of the bond-dimension bound.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "cftmps/fit.hpp"
#include "cftmps/partitions.hpp"
#include "cftmps/regularization.hpp"

namespace cftmps {

/// Smallest N with n * eps_single(q = e^{-d}, N) * b_hat^{n-1} <= eps.
inline int minimal_N_for(double eps, int n, double d, double b_hat_sqrt_q, double b_hat,
                         int n_max = 4000) {
  if (!(eps > 0.0)) throw ValidationError("minimal_N_for: eps must be positive");
  const double q = std::exp(-d);
  double prev = std::numeric_limits<double>::infinity();
  for (int N = 0; N <= n_max; ++N) {
    const double chain = n * error_bound_single(q, N, b_hat_sqrt_q) * std::pow(b_hat, n - 1);
    if (chain > prev) throw ValidationError("minimal_N_for: non-monotone bound sweep");
    if (chain <= eps) return N;
    prev = chain;
  }
  throw ConvergenceError("minimal_N_for: no N within range reaches the target accuracy");
}

struct ScalingPoint {
  double eps = 0.0;
  int minimal_N = 0;
  double log_bound_D = 0.0;  // log of the growth bound at (n, minimal_N)
};

struct ScalingModel {
  int dim_g = 1, n = 0;
  double d = 0.0;
  std::vector<ScalingPoint> sweep;
  LinearFit n_vs_log_inv_eps;  // minimal N against log(1/eps); slope ~ 4/d
  double kappa = 0.0;          // empirical stand-in: fitted slope * d / 4 (~1)
};

/// Fixed-(n, d) regime: sweep accuracy targets, record minimal N and the bond
/// bound, fit N against log(1/eps).
inline ScalingModel invert_bounds_to_scaling(const std::vector<double>& eps_targets, int n,
                                             double d, int dim_g, double b_hat_sqrt_q,
                                             double b_hat) {
  if (eps_targets.size() < 3) throw ValidationError("invert_bounds_to_scaling: sparse eps grid");
  double lo = eps_targets[0], hi = eps_targets[0];
  for (double e : eps_targets) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (hi / lo < 100.0)
    throw ValidationError("invert_bounds_to_scaling: eps targets must span >= 2 decades");
  ScalingModel model;
  model.dim_g = dim_g;
  model.n = n;
  model.d = d;
  std::vector<double> x, y;
  for (double eps : eps_targets) {
    ScalingPoint p;
    p.eps = eps;
    p.minimal_N = minimal_N_for(eps, n, d, b_hat_sqrt_q, b_hat);
    p.log_bound_D = log_bond_dim_bound(n, std::max(1, p.minimal_N), dim_g);
    model.sweep.push_back(p);
    x.push_back(std::log(1.0 / eps));
    y.push_back(static_cast<double>(p.minimal_N));
  }
  model.n_vs_log_inv_eps = linear_fit(x, y);
  model.kappa = model.n_vs_log_inv_eps.slope * d / 4.0;
  return model;
}

/// Fixed-accuracy regime: log of the bond-dimension bound against sqrt(nN);
/// slope must approach 2 pi sqrt(dim_g / 6) for large arguments.
inline LinearFit fit_bound_growth(int dim_g, const std::vector<double>& nN_values) {
  if (nN_values.size() < 3) throw ValidationError("fit_bound_growth: need >= 3 samples");
  std::vector<double> x, y;
  for (double nn : nN_values) {
    if (!(nn > 0.0)) throw ValidationError("fit_bound_growth: nN must be positive");
    x.push_back(std::sqrt(nn));
    y.push_back(log_bond_dim_bound(1.0, nn, dim_g));  // bound depends on n, N through nN
  }
  return linear_fit(x, y);
}

}  // namespace cftmps

// Independent ground-truth evaluators: the free-boson closed form, a
// two-point exponent fit, and a brute-force vertex-operator mode resummation
// that shares no code with the production block construction.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cftmps/common.hpp"
#include "cftmps/fit.hpp"

namespace cftmps {

struct OracleResult {
  Complex value{0.0, 0.0};
  std::string method;          // "closed-form" | "mode-resummation"
  int resum_cutoff = 0;        // intermediate-level truncation R, when applicable
  double tail_estimate = 0.0;  // geometric tail indicator for resummation
};

/// prod_{i<j} (z_i - z_j)^{alpha_i alpha_j}; zero unless the charges sum to
/// zero. All separations must be positive (the mapped grid is ordered), which
/// pins the principal branch.
inline Complex free_boson_n_point(const std::vector<double>& charges,
                                  const std::vector<double>& points) {
  if (charges.size() != points.size() || charges.empty())
    throw ValidationError("free_boson_n_point: charge/point mismatch");
  double total = 0.0;
  for (double a : charges) total += a;
  if (std::abs(total) > 1e-12) return Complex(0.0, 0.0);
  double log_abs = 0.0;
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j) {
      const double sep = points[i] - points[j];
      if (sep == 0.0) throw ValidationError("free_boson_n_point: coincident points");
      if (sep < 0.0)
        throw ValidationError("free_boson_n_point: points must be strictly decreasing");
      log_abs += charges[i] * charges[j] * std::log(sep);
    }
  return Complex(std::exp(log_abs), 0.0);
}

struct ExponentFit {
  double two_h = 0.0;
  double stderr_ = 0.0;
};

/// Slope of log|value| against log(separation); returns -slope = 2h with its
/// standard error. Normalization constants drop out.
inline ExponentFit two_point_exponent_fit(const std::vector<double>& separations,
                                          const std::vector<double>& abs_values) {
  if (separations.size() < 5)
    throw ValidationError("two_point_exponent_fit: need >= 5 spacings");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < separations.size(); ++i) {
    if (!(separations[i] > 0.0) || !(abs_values[i] > 0.0))
      throw ValidationError("two_point_exponent_fit: nonpositive input");
    lx.push_back(std::log(separations[i]));
    ly.push_back(std::log(abs_values[i]));
  }
  LinearFit f = linear_fit(lx, ly);
  return ExponentFit{-f.slope, f.slope_stderr};
}

namespace detail {

/// Free-boson state in one charge sector: unnormalized monomials
/// prod a(-p)|0> indexed by descending partitions.
using MonomialCombo = std::map<std::vector<int>, double>;

inline void mono_add(MonomialCombo& c, const std::vector<int>& p, double v) {
  if (v == 0.0) return;
  auto [it, inserted] = c.emplace(p, v);
  if (!inserted) it->second += v;
}

/// multiply by a(-n), truncating above level R
inline MonomialCombo mono_create(const MonomialCombo& in, int n, int R) {
  MonomialCombo out;
  for (const auto& [p, v] : in) {
    int lvl = n;
    for (int q : p) lvl += q;
    if (lvl > R) continue;
    std::vector<int> np = p;
    np.insert(std::upper_bound(np.begin(), np.end(), n, std::greater<int>()), n);
    mono_add(out, np, v);
  }
  return out;
}

/// multiply by a(n), n > 0: a(n) prod a(-p) |0> = n c_n(p) * (p minus one n)
inline MonomialCombo mono_annihilate(const MonomialCombo& in, int n) {
  MonomialCombo out;
  for (const auto& [p, v] : in) {
    int c_n = 0;
    for (int q : p) c_n += (q == n);
    if (c_n == 0) continue;
    std::vector<int> np = p;
    np.erase(std::find(np.begin(), np.end(), n));
    mono_add(out, np, v * n * c_n);
  }
  return out;
}

/// e^{c a(-n)} (creation) or e^{c a(n)} (annihilation side), truncated series
inline MonomialCombo mono_exp(MonomialCombo state, int mode, double c, int R) {
  MonomialCombo total = state;
  MonomialCombo term = std::move(state);
  for (int order = 1; order <= R + 1; ++order) {
    term = (mode < 0) ? mono_create(term, -mode, R) : mono_annihilate(term, mode);
    if (term.empty()) break;
    for (auto& [p, v] : term) v *= c / order;
    for (const auto& [p, v] : term) mono_add(total, p, v);
  }
  return total;
}

}  // namespace detail

/// Brute-force free-boson evaluation of <0|V_{a1}(z1)...V_{an}(zn)|0> by
/// applying truncated vertex-operator exponential series right to left,
/// keeping intermediate levels <= R. theta-mapped points with q < 1 assumed.
inline OracleResult mode_resummation(const std::vector<double>& charges,
                                     const std::vector<double>& points, int R) {
  if (charges.size() != points.size() || charges.empty())
    throw ValidationError("mode_resummation: charge/point mismatch");
  if (R < 0 || R > 60) throw RangeError("mode_resummation: cutoff outside supported range");
  for (size_t j = 0; j + 1 < points.size(); ++j)
    if (!(points[j] > points[j + 1] && points[j + 1] > 0.0))
      throw ValidationError("mode_resummation: points must be positive decreasing");

  auto run = [&](int cutoff) -> double {
    detail::MonomialCombo state{{{}, 1.0}};
    double sector = 0.0, scalar = 1.0;
    for (int j = static_cast<int>(points.size()) - 1; j >= 0; --j) {
      const double a = charges[j], z = points[j];
      scalar *= std::pow(z, a * sector);
      for (int n = 1; n <= cutoff; ++n)  // annihilation half e^{-a B(z)}
        state = detail::mono_exp(std::move(state), n, -a * std::pow(z, -n) / n, cutoff);
      for (int n = 1; n <= cutoff; ++n)  // creation half e^{a A(z)}
        state = detail::mono_exp(std::move(state), -n, a * std::pow(z, n) / n, cutoff);
      sector += a;
    }
    if (std::abs(sector) > 1e-12) return 0.0;  // vacuum overlap vanishes off neutrality
    auto it = state.find(std::vector<int>{});
    return (it == state.end()) ? 0.0 : scalar * it->second;
  };

  OracleResult res;
  res.method = "mode-resummation";
  res.resum_cutoff = R;
  const double vR = run(R);
  double ratio = 0.0;
  for (size_t j = 0; j + 1 < points.size(); ++j) ratio = std::max(ratio, points[j + 1] / points[j]);
  if (points.size() == 1) ratio = points[0];
  if (R >= 2) {
    const double v_prev = run(R - 2);
    res.tail_estimate = std::abs(vR - v_prev) * ratio / std::max(1e-300, 1.0 - ratio) +
                        std::abs(vR - v_prev);
  } else {
    res.tail_estimate = std::abs(vR);
  }
  res.value = Complex(vR, 0.0);
  return res;
}

}  // namespace cftmps

#pragma once

// Seller utilities (monotone, concave, u(0) = 0), the virtual-utility
// transform u(v) - u'(v)/h(v), and utility-optimal single-item prices.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskaverse/distribution.hpp"
#include "riskaverse/format.hpp"
#include "riskaverse/numeric.hpp"
#include "riskaverse/report.hpp"

namespace riskaverse {

enum class UtilityKind { linear, power, capped };

class UtilityFunction {
 public:
  static UtilityFunction linear() { return UtilityFunction(UtilityKind::linear, 1.0); }

  /// u(x) = x^alpha, alpha in (0, 1].
  static UtilityFunction power(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("power utility needs alpha in (0, 1]");
    return UtilityFunction(UtilityKind::power, alpha);
  }

  /// u(x) = min(x, eps).
  static UtilityFunction capped(double eps) {
    if (!(eps > 0.0 && std::isfinite(eps))) throw std::invalid_argument("capped utility needs eps > 0");
    return UtilityFunction(UtilityKind::capped, eps);
  }

  UtilityKind kind() const { return kind_; }
  double parameter() const { return param_; }
  bool smooth() const { return kind_ != UtilityKind::capped; }

  double operator()(double x) const { return value(x); }

  double value(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
      case UtilityKind::linear:
        return x;
      case UtilityKind::power:
        return param_ == 1.0 ? x : std::pow(x, param_);
      case UtilityKind::capped:
        return std::min(x, param_);
    }
    return 0.0;
  }

  /// Right derivative; +inf at 0 for power utilities with alpha < 1.
  double derivative(double x) const {
    switch (kind_) {
      case UtilityKind::linear:
        return 1.0;
      case UtilityKind::power:
        if (param_ == 1.0) return 1.0;
        if (x <= 0.0) return std::numeric_limits<double>::infinity();
        return param_ * std::pow(x, param_ - 1.0);
      case UtilityKind::capped:
        return x < param_ ? 1.0 : 0.0;
    }
    return 0.0;
  }

  /// Revenues at which u is not differentiable.
  std::vector<double> kinks() const {
    if (kind_ == UtilityKind::capped) return {param_};
    return {};
  }

  std::string name() const {
    switch (kind_) {
      case UtilityKind::linear:
        return "linear";
      case UtilityKind::power:
        return "power:" + format_number(param_);
      case UtilityKind::capped:
        return "capped:" + format_number(param_);
    }
    return {};
  }

  friend bool operator==(const UtilityFunction&, const UtilityFunction&) = default;

 private:
  UtilityFunction(UtilityKind kind, double param) : kind_(kind), param_(param) {}

  UtilityKind kind_;
  double param_;
};

/// Finite stand-in for "every concave utility".
struct UtilityFamily {
  std::vector<UtilityFunction> members;

  /// linear, sqrt, cube root, and min(x, eps) for 8 log-spaced eps in [1e-4, 1e-1].
  static UtilityFamily default_family() {
    UtilityFamily f;
    f.members.push_back(UtilityFunction::linear());
    f.members.push_back(UtilityFunction::power(0.5));
    f.members.push_back(UtilityFunction::power(1.0 / 3.0));
    for (int i = 0; i < 8; ++i) {
      f.members.push_back(UtilityFunction::capped(std::pow(10.0, -4.0 + 3.0 * i / 7.0)));
    }
    return f;
  }
};

/// u(0) = 0, nondecreasing and concave on a grid over [0, x_max].
inline bool satisfies_utility_axioms(const UtilityFunction& u, double x_max = 2.0, std::size_t grid = 10000,
                                     double tol = 1e-9) {
  if (u(0.0) != 0.0) return false;
  const double h = x_max / static_cast<double>(grid);
  double prev2 = u(0.0);
  double prev = u(h);
  if (prev < prev2) return false;
  for (std::size_t i = 2; i <= grid; ++i) {
    const double cur = u(h * static_cast<double>(i));
    if (cur < prev - tol) return false;
    if (prev2 - 2.0 * prev + cur > tol) return false;
    prev2 = prev;
    prev = cur;
  }
  return true;
}

/// phi^u(v) = u(v) - u'(v) / h(v). Refuses kinks of u and of the hazard.
inline double virtual_utility(const Distribution& d, const UtilityFunction& u, double v) {
  for (double k : u.kinks()) {
    if (v == k) throw NotDifferentiable("utility has a kink at this valuation");
  }
  const double slope = u.derivative(v);
  if (!std::isfinite(slope)) throw NotDifferentiable("utility derivative is unbounded at this valuation");
  return u(v) - slope / d.hazard(v);
}

namespace detail {

// phi^u near v, stepping off kinks; nullopt-like NaN when undefined nearby.
inline double virtual_utility_near(const Distribution& d, const UtilityFunction& u, double v) {
  for (double nudge : {0.0, -1e-12, 1e-12, -1e-9, 1e-9}) {
    const double x = v + nudge * std::max(1.0, std::abs(v));
    try {
      return virtual_utility(d, u, x);
    } catch (const std::domain_error&) {
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Zero of the virtual utility, by bisection to abs_tol in v. The virtual
/// utility is nondecreasing for regular d, so the root is unique.
inline double optimal_reserve(const Distribution& d, const UtilityFunction& u, double abs_tol = 1e-10) {
  if (!u.smooth()) throw std::invalid_argument("optimal_reserve needs a smooth utility; use maximize_single_bidder");
  if (!is_regular(d)) throw std::invalid_argument("optimal_reserve needs a regular distribution");

  // Bracket the sign change on a quantile grid, ordered by ascending v.
  std::vector<double> qs;
  for (double q : {1.0 - 1e-12, 1.0 - 1e-9, 1.0 - 1e-6}) qs.push_back(q);
  for (int i = 255; i >= 1; --i) qs.push_back(i / 256.0);
  for (double q : {1e-3, 1e-4, 1e-6, 1e-9, 1e-12}) qs.push_back(q);
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = lo;
  double prev_v = lo;
  bool found = false;
  for (double q : qs) {
    const double v = d.price_at(q);
    const double g = detail::virtual_utility_near(d, u, v);
    if (std::isnan(g)) continue;
    if (g >= 0.0) {
      if (std::isnan(prev_v)) break;  // positive already at the bottom of the support
      lo = prev_v;
      hi = v;
      found = true;
      break;
    }
    prev_v = v;
  }
  if (!found) throw std::domain_error("virtual utility has no sign change on the support");
  return numeric::bisect_increasing(
      [&](double v) {
        const double g = detail::virtual_utility_near(d, u, v);
        return std::isnan(g) ? 0.0 : g;
      },
      lo, hi, abs_tol);
}

struct SingleBidderOptimum {
  double price;
  double utility;
};

/// Best take-it-or-leave-it price for one bidder: maximizes u(v(q)) q over
/// q in (0, 1] on a dense grid, then golden-section on the best bracket.
inline SingleBidderOptimum maximize_single_bidder(const Distribution& d, const UtilityFunction& u,
                                                  std::size_t grid = 100000) {
  auto g = [&](double q) {
    if (q <= 0.0) return 0.0;
    return u(d.price_at(q)) * q;
  };
  const double n = static_cast<double>(grid);
  std::size_t best = 1;
  double best_g = g(1.0 / n);
  for (std::size_t i = 2; i <= grid; ++i) {
    const double gi = g(static_cast<double>(i) / n);
    if (gi > best_g) {
      best_g = gi;
      best = i;
    }
  }
  const double lo = static_cast<double>(best - 1) / n;
  const double hi = std::min(1.0, static_cast<double>(best + 1) / n);
  double q = numeric::golden_section_max(g, lo, hi, 1e-13);
  if (g(q) < best_g) q = static_cast<double>(best) / n;
  const double price = d.price_at(q);
  return {price, u(price) * d.sale_prob(price)};
}

/// Grid scan (in quantile coordinates) for a decrease of phi^u in v.
inline LemmaReport check_virtual_utility_monotone(const Distribution& d, const UtilityFunction& u,
                                                  std::size_t grid = 10000, double tol = 1e-8) {
  LemmaTally tally("virtual-utility-monotone", tol);
  double prev_v = std::numeric_limits<double>::quiet_NaN();
  double prev_phi = prev_v;
  for (std::size_t i = grid; i >= 1; --i) {
    const double q = static_cast<double>(i) / static_cast<double>(grid + 1);
    const double v = d.price_at(q);
    double phi = 0.0;
    try {
      phi = virtual_utility(d, u, v);
    } catch (const std::domain_error&) {
      continue;
    }
    if (!std::isnan(prev_phi)) {
      const double step = (phi - prev_phi) / std::max(1.0, std::abs(prev_phi));
      tally.record(d.name() + " " + u.name() + " v in [" + format_number(prev_v) + "," + format_number(v) + "]",
                   step, 0.0);
    }
    prev_v = v;
    prev_phi = phi;
  }
  return tally.take();
}

}  // namespace riskaverse

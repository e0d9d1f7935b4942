#pragma once

// Valuation distributions in quantile coordinates.
//
// A distribution is canonically the nonincreasing price function
// v(q) = F^{-1}(1 - q) on (0, 1]; the revenue curve is R(q) = q v(q). Curve
// defined kinds store R exactly as a piecewise-linear function, so they may
// carry kinks and a point mass at the top of the support (the first segment
// always starts at the origin, which makes v constant there).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "riskaverse/format.hpp"
#include "riskaverse/numeric.hpp"

namespace riskaverse {

enum class DistributionKind { uniform, exponential, left_triangle, irregular_example, revenue_curve };

struct CurvePoint {
  double q;
  double revenue;
};

/// Piecewise-linear revenue curve through (0, 0) and ending at q = 1.
class RevenueCurve {
 public:
  /// Points must have strictly increasing q, end at q = 1 and have R >= 0.
  /// A leading (0, 0) anchor is added when absent. With require_concave the
  /// curve is rejected unless every interior point lies on or above the
  /// chord of its neighbours.
  explicit RevenueCurve(std::vector<CurvePoint> points, bool require_concave = false) {
    if (points.empty()) throw std::invalid_argument("revenue curve needs at least one point");
    if (points.front().q != 0.0) points.insert(points.begin(), CurvePoint{0.0, 0.0});
    if (points.front().revenue != 0.0) throw std::invalid_argument("revenue curve must satisfy R(0) = 0");
    if (points.size() < 2) throw std::invalid_argument("revenue curve needs a point with q > 0");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!std::isfinite(p.q) || !std::isfinite(p.revenue)) {
        throw std::invalid_argument("revenue curve points must be finite");
      }
      if (p.revenue < 0.0) throw std::invalid_argument("revenue curve has negative revenue");
      if (i > 0 && !(p.q > points[i - 1].q)) {
        throw std::invalid_argument("revenue curve q grid must be strictly increasing");
      }
    }
    if (points.back().q != 1.0) throw std::invalid_argument("revenue curve must end at q = 1");

    const std::size_t m = points.size() - 1;
    slope_.resize(m);
    intercept_.resize(m);
    bool any_positive = false;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& l = points[j];
      const auto& r = points[j + 1];
      slope_[j] = (r.revenue - l.revenue) / (r.q - l.q);
      intercept_[j] = l.revenue - slope_[j] * l.q;
      // A negative intercept makes v(q) = a/q + b increasing on the segment.
      const double scale = std::max({1.0, std::abs(l.revenue), std::abs(r.revenue)});
      if (intercept_[j] < -1e-12 * scale) {
        throw std::invalid_argument("revenue curve does not define a distribution: R(q)/q must be nonincreasing");
      }
      if (intercept_[j] < 0.0 || j == 0) intercept_[j] = 0.0;
      any_positive = any_positive || r.revenue > 0.0;
    }
    if (!any_positive) throw std::invalid_argument("revenue curve is identically zero");
    points_ = std::move(points);
    if (require_concave && !concave()) throw std::invalid_argument("revenue curve flagged concave is not concave");
  }

  std::span<const CurvePoint> points() const { return points_; }
  std::size_t segments() const { return slope_.size(); }
  double slope(std::size_t j) const { return slope_[j]; }
  double intercept(std::size_t j) const { return intercept_[j]; }

  /// Nonincreasing slopes, up to rounding.
  bool concave(double tol = 1e-12) const {
    for (std::size_t j = 1; j < slope_.size(); ++j) {
      if (slope_[j] > slope_[j - 1] + tol * std::max(1.0, std::abs(slope_[j - 1]))) return false;
    }
    return true;
  }

  /// Segment index containing q, using (q_j, q_{j+1}] segments.
  std::size_t segment_of(double q) const {
    auto it = std::lower_bound(points_.begin() + 1, points_.end(), q,
                               [](const CurvePoint& p, double x) { return p.q < x; });
    if (it == points_.end()) return slope_.size() - 1;
    return static_cast<std::size_t>(it - points_.begin()) - 1;
  }

  double revenue(double q) const {
    if (q <= 0.0) return 0.0;
    const std::size_t j = segment_of(q);
    return intercept_[j] + slope_[j] * q;
  }

  double price(double q) const {
    if (q <= 0.0) return slope_.front();
    const std::size_t j = segment_of(q);
    return intercept_[j] / q + slope_[j];
  }

  /// Price at breakpoint i (i = 0 is the top of the support).
  double breakpoint_price(std::size_t i) const {
    return i == 0 ? slope_.front() : points_[i].revenue / points_[i].q;
  }

 private:
  std::vector<CurvePoint> points_;
  std::vector<double> slope_;
  std::vector<double> intercept_;
};

/// Sequence of n bids, index = bidder identity.
struct BidProfile {
  std::vector<double> values;

  BidProfile() = default;
  explicit BidProfile(std::vector<double> v) : values(std::move(v)) {
    for (double x : values) {
      if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("bids must be finite and non-negative");
    }
  }
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> view() const { return values; }
};

struct MonopolyPrice {
  double price;      // p*
  double sale_prob;  // q*
};

/// Grid densities and tolerances for the distribution-level searches.
struct DistributionConfig {
  std::size_t regularity_grid = 10000;
  double regularity_tol = 1e-9;
  std::size_t monopoly_grid = 100000;
  double golden_rel_tol = 1e-10;
};

class Distribution {
 public:
  static Distribution uniform(double a, double b) {
    if (!(a >= 0.0 && b > a && std::isfinite(b))) throw std::invalid_argument("uniform requires b > a >= 0");
    Distribution d(DistributionKind::uniform, Uniform{a, b});
    return d;
  }

  static Distribution exponential(double rate) {
    if (!(rate > 0.0 && std::isfinite(rate))) throw std::invalid_argument("exponential requires rate > 0");
    return Distribution(DistributionKind::exponential, Exponential{rate});
  }

  /// Revenue curve through (0,0), (eps,1), (1,0).
  static Distribution left_triangle(double eps) {
    check_eps(eps);
    Distribution d(DistributionKind::left_triangle,
                   RevenueCurve({{0.0, 0.0}, {eps, 1.0}, {1.0, 0.0}}));
    d.param_ = eps;
    return d;
  }

  /// Non-concave curve through (0,0), (eps,1), (2eps,eps), (1-eps,eps), (1,0).
  static Distribution irregular_example(double eps) {
    check_eps(eps);
    if (!(2.0 * eps < 1.0 - eps)) throw std::invalid_argument("irregular-example requires eps < 1/3");
    Distribution d(DistributionKind::irregular_example,
                   RevenueCurve({{0.0, 0.0}, {eps, 1.0}, {2.0 * eps, eps}, {1.0 - eps, eps}, {1.0, 0.0}}));
    d.param_ = eps;
    return d;
  }

  static Distribution from_curve(RevenueCurve curve) {
    return Distribution(DistributionKind::revenue_curve, std::move(curve));
  }

  DistributionKind kind() const { return kind_; }

  /// Smooth kinds have a density everywhere on the support interior.
  bool smooth() const { return !std::holds_alternative<RevenueCurve>(impl_); }

  const RevenueCurve* curve() const { return std::get_if<RevenueCurve>(&impl_); }

  double support_lo() const { return price_at(1.0); }

  double support_hi() const {
    if (auto* u = std::get_if<Uniform>(&impl_)) return u->b;
    if (std::holds_alternative<Exponential>(impl_)) return std::numeric_limits<double>::infinity();
    return curve()->breakpoint_price(0);
  }

  double top_atom_mass() const {
    if (smooth()) return 0.0;
    return sale_prob(support_hi());
  }

  /// v(q) = F^{-1}(1 - q): the price that sells with probability q.
  double price_at(double q) const {
    if (auto* u = std::get_if<Uniform>(&impl_)) return u->b - q * (u->b - u->a);
    if (auto* e = std::get_if<Exponential>(&impl_)) {
      return q <= 0.0 ? std::numeric_limits<double>::infinity() : -std::log(q) / e->rate;
    }
    return curve()->price(q);
  }

  /// R(q) = q v(q); R(0) is the limit 0.
  double revenue(double q) const {
    if (q <= 0.0) return 0.0;
    if (auto* c = curve()) return c->revenue(q);
    if (auto* e = std::get_if<Exponential>(&impl_)) return -q * std::log(q) / e->rate;
    return q * price_at(q);
  }

  /// Pr[V > v].
  double survival(double v) const {
    if (auto* u = std::get_if<Uniform>(&impl_)) return std::clamp((u->b - v) / (u->b - u->a), 0.0, 1.0);
    if (auto* e = std::get_if<Exponential>(&impl_)) return v <= 0.0 ? 1.0 : std::exp(-e->rate * v);
    return curve_upper_mass(v, /*strict=*/true);
  }

  double cdf(double v) const {
    if (auto* e = std::get_if<Exponential>(&impl_)) return v <= 0.0 ? 0.0 : -std::expm1(-e->rate * v);
    return 1.0 - survival(v);
  }

  /// Pr[V >= p], the sale probability of a take-it-or-leave-it price p.
  double sale_prob(double p) const {
    if (smooth()) return survival(p);
    return curve_upper_mass(p, /*strict=*/false);
  }

  /// Generalized inverse inf{v : F(v) >= p}.
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile probability outside [0,1]");
    if (auto* u = std::get_if<Uniform>(&impl_)) return u->a + p * (u->b - u->a);
    if (auto* e = std::get_if<Exponential>(&impl_)) {
      if (p >= 1.0) throw std::domain_error("quantile(1) is unbounded for the exponential");
      return -std::log1p(-p) / e->rate;
    }
    return curve()->price(1.0 - p);
  }

  double density(double v) const {
    if (auto* u = std::get_if<Uniform>(&impl_)) {
      require_interior(v);
      return 1.0 / (u->b - u->a);
    }
    if (auto* e = std::get_if<Exponential>(&impl_)) {
      require_interior(v);
      return e->rate * std::exp(-e->rate * v);
    }
    const std::size_t j = curve_segment_for_price(v);
    const auto& c = *curve();
    const double a = c.intercept(j);
    const double gap = v - c.slope(j);
    return a / (gap * gap);
  }

  /// h(v) = f(v) / (1 - F(v)).
  double hazard(double v) const {
    if (auto* u = std::get_if<Uniform>(&impl_)) {
      require_interior(v);
      return 1.0 / (u->b - v);
    }
    if (auto* e = std::get_if<Exponential>(&impl_)) {
      require_interior(v);
      return e->rate;
    }
    // On a segment R = a + b q: 1 - F(v) = a / (v - b), so h(v) = 1 / (v - b).
    const std::size_t j = curve_segment_for_price(v);
    return 1.0 / (v - curve()->slope(j));
  }

  /// phi(v) = v - 1/h(v).
  double virtual_value(double v) const { return v - 1.0 / hazard(v); }

  /// H(v) = -ln(1 - F(v)).
  double cumulative_hazard(double v) const {
    if (v < support_lo()) return 0.0;
    const double s = survival(v);
    if (!(s > 0.0)) throw std::domain_error("cumulative hazard undefined at or above the top of the support");
    return -std::log(s);
  }

  /// Interior kinks of the revenue curve, in quantile coordinates.
  std::vector<double> kinks() const {
    std::vector<double> out;
    if (auto* c = curve()) {
      auto pts = c->points();
      for (std::size_t i = 1; i + 1 < pts.size(); ++i) out.push_back(pts[i].q);
    }
    return out;
  }

  /// Canonical text form, e.g. "uniform:0,1".
  std::string name() const {
    switch (kind_) {
      case DistributionKind::uniform: {
        const auto& u = std::get<Uniform>(impl_);
        return "uniform:" + format_number(u.a) + "," + format_number(u.b);
      }
      case DistributionKind::exponential:
        return "exponential:" + format_number(std::get<Exponential>(impl_).rate);
      case DistributionKind::left_triangle:
        return "left-triangle:" + format_number(param_);
      case DistributionKind::irregular_example:
        return "irregular-example:" + format_number(param_);
      case DistributionKind::revenue_curve: {
        std::string s = "revenue-curve:";
        auto pts = curve()->points();
        for (std::size_t i = 1; i < pts.size(); ++i) {
          if (i > 1) s += ";";
          s += format_number(pts[i].q) + ":" + format_number(pts[i].revenue);
        }
        return s;
      }
    }
    return {};
  }

 private:
  struct Uniform {
    double a;
    double b;
  };
  struct Exponential {
    double rate;
  };
  using Impl = std::variant<Uniform, Exponential, RevenueCurve>;

  Distribution(DistributionKind kind, Impl impl) : kind_(kind), impl_(std::move(impl)) {}

  static void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 1/2)");
  }

  void require_interior(double v) const {
    if (!(v >= support_lo() && v < support_hi())) {
      throw std::domain_error("valuation outside the support interior");
    }
  }

  // sup{q in (0,1] : v(q) > x} (strict) or v(q) >= x (non-strict).
  double curve_upper_mass(double x, bool strict) const {
    const auto& c = *curve();
    auto pts = c.points();
    const std::size_t m = c.segments();
    auto above = [&](double price) { return strict ? price > x : price >= x; };
    if (!above(c.breakpoint_price(0))) return 0.0;
    if (above(c.breakpoint_price(m))) return 1.0;
    // Last breakpoint i with price above x; crossing lies in segment i.
    std::size_t lo = 0;
    std::size_t hi = m;  // above(lo) holds, above(hi) fails
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (above(c.breakpoint_price(mid))) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double a = c.intercept(lo);
    const double b = c.slope(lo);
    if (!(a > 0.0)) return pts[lo].q;
    const double q = a / (x - b);
    return std::clamp(q, pts[lo].q, pts[hi].q);
  }

  std::size_t curve_segment_for_price(double v) const {
    const auto& c = *curve();
    const std::size_t m = c.segments();
    const double top = c.breakpoint_price(0);
    const double bottom = c.breakpoint_price(m);
    const double tol = 1e-12 * std::max(1.0, std::abs(v));
    if (v > top + tol || v < bottom - tol) throw std::domain_error("valuation outside the support");
    for (std::size_t i = 0; i <= m; ++i) {
      if (std::abs(v - c.breakpoint_price(i)) <= tol) {
        throw NotDifferentiable("revenue curve has a kink or atom at this valuation");
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (v < c.breakpoint_price(j) && v > c.breakpoint_price(j + 1)) return j;
    }
    throw NotDifferentiable("valuation lies in an atom");
  }

  DistributionKind kind_;
  Impl impl_;
  double param_ = 0.0;
};

// --- distribution-level queries ---------------------------------------------

/// Second differences of R on a uniform grid over [0, 1]; curves are also
/// checked exactly through their slopes.
inline bool is_regular(const Distribution& d, const DistributionConfig& cfg = {}) {
  if (auto* c = d.curve()) {
    if (!c->concave()) return false;
  }
  const std::size_t n = std::max<std::size_t>(cfg.regularity_grid, 3);
  const double h = 1.0 / static_cast<double>(n);
  double r0 = 0.0;
  double r1 = d.revenue(h);
  for (std::size_t i = 2; i <= n; ++i) {
    const double r2 = d.revenue(i == n ? 1.0 : h * static_cast<double>(i));
    if (r0 - 2.0 * r1 + r2 > cfg.regularity_tol) return false;
    r0 = r1;
    r1 = r2;
  }
  return true;
}

/// Hazard rate nondecreasing in v, checked where the hazard is defined.
inline bool is_mhr(const Distribution& d, const DistributionConfig& cfg = {}) {
  const std::size_t n = std::max<std::size_t>(cfg.regularity_grid, 3);
  double prev = -std::numeric_limits<double>::infinity();
  // Walk from the bottom of the support upward (q from 1 down to 0).
  for (std::size_t i = n; i >= 1; --i) {
    const double q = static_cast<double>(i) / static_cast<double>(n + 1);
    const double v = d.price_at(q);
    double h = 0.0;
    try {
      h = d.hazard(v);
    } catch (const std::domain_error&) {
      continue;
    }
    if (h < prev - 1e-9 * std::max(1.0, std::abs(prev))) return false;
    prev = h;
  }
  return true;
}

/// Revenue-maximizing posted price. Curves are maximized exactly over their
/// breakpoints; smooth kinds use golden-section search on R(q), polished by
/// bisection on R'(q) = phi(v(q)). Flat tops resolve to the smallest q.
inline MonopolyPrice monopoly_price(const Distribution& d, const DistributionConfig& cfg = {}) {
  if (auto* c = d.curve()) {
    auto pts = c->points();
    std::size_t best = 1;
    for (std::size_t i = 2; i < pts.size(); ++i) {
      if (pts[i].revenue > pts[best].revenue) best = i;
    }
    return {pts[best].revenue / pts[best].q, pts[best].q};
  }
  const bool concave = is_regular(d, cfg);
  double q_star = 0.0;
  if (concave) {
    q_star = numeric::golden_section_max([&](double q) { return d.revenue(q); }, 0.0, 1.0, cfg.golden_rel_tol);
  } else {
    const std::size_t n = cfg.monopoly_grid;
    std::size_t best = 1;
    double best_r = d.revenue(1.0 / static_cast<double>(n));
    for (std::size_t i = 2; i <= n; ++i) {
      const double r = d.revenue(static_cast<double>(i) / static_cast<double>(n));
      if (r > best_r) {
        best_r = r;
        best = i;
      }
    }
    const double lo = static_cast<double>(best - 1) / static_cast<double>(n);
    const double hi = std::min(1.0, static_cast<double>(best + 1) / static_cast<double>(n));
    q_star = numeric::golden_section_max([&](double q) { return d.revenue(q); }, lo, hi, cfg.golden_rel_tol);
  }
  // R'(q) = phi(v(q)) is nonincreasing in q for regular d.
  auto slope = [&](double q) { return d.virtual_value(d.price_at(q)); };
  try {
    if (q_star >= 1.0 - 1e-9 && slope(1.0 - 1e-12) >= 0.0) {
      q_star = 1.0;
    } else {
      const double lo = std::max(1e-300, q_star - 1e-6);
      const double hi = std::min(1.0 - 1e-15, q_star + 1e-6);
      if (slope(lo) >= 0.0 && slope(hi) <= 0.0) {
        q_star = numeric::bisect_increasing([&](double q) { return -slope(q); }, lo, hi, 1e-16);
      }
    }
  } catch (const std::domain_error&) {
  }
  return {d.price_at(q_star), q_star};
}

/// n inverse-transform draws from a SplitMix64 stream seeded with `seed`.
inline BidProfile sample(const Distribution& d, std::uint64_t seed, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample size must be at least 1");
  numeric::SplitMix rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = d.quantile(rng.uniform());
  return BidProfile(std::move(v));
}

}  // namespace riskaverse

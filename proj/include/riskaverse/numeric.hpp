#pragma once

// Scalar numerics shared by the library: 1-D search, quadrature, binomial
// sums in log space, order-statistic densities and the seeded generator
// used for every Monte Carlo draw.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace riskaverse {

/// Raised when a derivative-based quantity is requested at a kink.
class NotDifferentiable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace numeric {

inline constexpr double kGolden = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

/// Maximizer of a unimodal function on [lo, hi] by golden-section search.
/// Stops when the bracket is narrower than rel_tol * max(1, |x|).
template <class F>
double golden_section_max(F&& f, double lo, double hi, double rel_tol = 1e-10) {
  double a = lo;
  double b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int iter = 0; iter < 400; ++iter) {
    if (b - a <= rel_tol * std::max(1.0, std::abs(0.5 * (a + b)))) break;
    if (f1 >= f2) {  // keep the left bracket on ties
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  // The endpoints are candidates too: the maximum may sit on the boundary.
  double best = 0.5 * (a + b);
  double fbest = f(best);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx > fbest) {
      fbest = fx;
      best = x;
    }
  }
  return best;
}

/// Root of a nondecreasing function with f(lo) <= 0 <= f(hi).
template <class F>
double bisect_increasing(F&& f, double lo, double hi, double abs_tol = 1e-10) {
  for (int iter = 0; iter < 500 && hi - lo > abs_tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct QuadratureOptions {
  double rel_tol = 1e-12;
  std::size_t max_refinements = 15;
};

/// Tanh-sinh quadrature on [a, b]. Never evaluates f at the endpoints, so
/// integrable endpoint singularities (root utilities at 0, log quantiles)
/// keep full accuracy.
template <class F>
double integrate(F&& f, double a, double b, QuadratureOptions opt = {}) {
  if (!(b > a)) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> engine(opt.max_refinements);
  return engine.integrate([&](double x) { return static_cast<double>(f(x)); }, a, b, opt.rel_tol);
}

/// Integral over [a, b] split at the given interior breakpoints.
template <class F>
double integrate_piecewise(F&& f, double a, double b, std::span<const double> breaks,
                           QuadratureOptions opt = {}) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double x : breaks) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate(f, cuts[i], cuts[i + 1], opt);
  }
  return total;
}

inline constexpr std::size_t kMaxExactBinomial = 10000;

/// Full Binomial(n, q) probability mass vector, computed by a log-space
/// recurrence. n above kMaxExactBinomial is refused.
inline std::vector<double> binomial_pmf(std::size_t n, double q) {
  if (n > kMaxExactBinomial) {
    throw std::invalid_argument("binomial sums are exact only up to n = 10000");
  }
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("binomial probability outside [0,1]");
  std::vector<double> pmf(n + 1, 0.0);
  if (q == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (q == 1.0) {
    pmf[n] = 1.0;
    return pmf;
  }
  const double log_odds = std::log(q) - std::log1p(-q);
  double lp = static_cast<double>(n) * std::log1p(-q);
  pmf[0] = std::exp(lp);
  for (std::size_t x = 0; x < n; ++x) {
    lp += std::log(static_cast<double>(n - x) / static_cast<double>(x + 1)) + log_odds;
    pmf[x + 1] = std::exp(lp);
  }
  return pmf;
}

/// Pr[Binomial(n, q) >= t]; equals the regularized incomplete beta I_q(t, n - t + 1).
inline double binomial_tail_ge(std::size_t n, double q, std::size_t t) {
  if (t == 0) return 1.0;
  if (t > n) return 0.0;
  const auto pmf = binomial_pmf(n, q);
  // Sum the shorter side for accuracy.
  if (t > n / 2) {
    double s = 0.0;
    for (std::size_t x = t; x <= n; ++x) s += pmf[x];
    return std::min(1.0, s);
  }
  double s = 0.0;
  for (std::size_t x = 0; x < t; ++x) s += pmf[x];
  return std::clamp(1.0 - s, 0.0, 1.0);
}

/// Density of the t-th smallest of n i.i.d. uniforms on [0, 1].
class OrderStatisticDensity {
 public:
  OrderStatisticDensity(std::size_t t, std::size_t n) : t_(t), n_(n) {
    if (t < 1 || t > n) throw std::invalid_argument("order statistic index outside [1, n]");
    // n! / ((t-1)! (n-t)!) = n * C(n-1, t-1)
    double log_c = std::log(static_cast<double>(n));
    for (std::size_t i = 1; i < t; ++i) {
      log_c += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(i));
    }
    log_coeff_ = log_c;
  }

  double operator()(double q) const {
    if (q < 0.0 || q > 1.0) return 0.0;
    const double a = static_cast<double>(t_ - 1);
    const double b = static_cast<double>(n_ - t_);
    if (q == 0.0) return t_ == 1 ? std::exp(log_coeff_) : 0.0;
    if (q == 1.0) return t_ == n_ ? std::exp(log_coeff_) : 0.0;
    return std::exp(log_coeff_ + a * std::log(q) + b * std::log1p(-q));
  }

  std::size_t t() const { return t_; }
  std::size_t n() const { return n_; }

 private:
  std::size_t t_;
  std::size_t n_;
  double log_coeff_ = 0.0;
};

// --- seeded generation ------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of replication `index` under master seed `seed`. Fixed mixing, so
/// replications can run in any order on any worker.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// SplitMix64 stream. Bit-reproducible across platforms, unlike the
/// std:: distribution adaptors.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace numeric
}  // namespace riskaverse

#pragma once

// Independent reference computations for the tests: value-space
// integrals with a fixed-step Simpson rule and subset enumeration, sharing
// no code with the library's quantile-space evaluators.

#include <cmath>
#include <cstddef>
#include <functional>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 200000) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double choose(int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); }

/// Continuous valuation law on [lo, hi].
struct Law {
  std::function<double(double)> cdf;
  std::function<double(double)> pdf;
  double lo;
  double hi;
};

inline Law uniform01() {
  return {[](double v) { return v; }, [](double) { return 1.0; }, 0.0, 1.0};
}

// Truncated far in the tail; the neglected mass is below 1e-21.
inline Law exponential(double rate) {
  return {[rate](double v) { return -std::expm1(-rate * v); }, [rate](double v) { return rate * std::exp(-rate * v); },
          0.0, 50.0 / rate};
}

/// E[u(Rev)] of the (k+1)-st price auction with reserve r.
inline double vcg(const Law& d, int n, int k, double r, const std::function<double(double)>& u) {
  const double s = 1.0 - d.cdf(r);
  double total = 0.0;
  for (int w = 1; w <= std::min(k, n); ++w) total += choose(n, w) * std::pow(s, w) * std::pow(1 - s, n - w) * u(w * r);
  if (k < n) {
    // density of the (k+1)-th largest of n
    const double c = choose(n, k) * (n - k);
    auto g = [&](double y) {
      const double F = d.cdf(y);
      return u(k * y) * c * std::pow(F, n - k - 1) * std::pow(1 - F, k) * d.pdf(y);
    };
    // y = a + (b - a) w^4 flattens root singularities of u at y = 0.
    const double a = std::max(r, d.lo), span = d.hi - a;
    total += simpson([&](double w) { return g(a + span * w * w * w * w) * 4.0 * span * w * w * w; }, 0.0, 1.0);
  }
  return total;
}

/// E[u(p min(Y, k))] by enumerating which bidders accept.
inline double posted(double sale_prob, int n, int k, double p, const std::function<double(double)>& u) {
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int y = __builtin_popcount(mask);
    total += std::pow(sale_prob, y) * std::pow(1 - sale_prob, n - y) * u(p * std::min(y, k));
  }
  return total;
}

}  // namespace oracle

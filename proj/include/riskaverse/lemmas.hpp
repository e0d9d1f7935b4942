#pragma once

// Numeric verification of the approximation bounds, plus a generator of
// random regular distributions for property runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "riskaverse/distribution.hpp"
#include "riskaverse/evaluation.hpp"
#include "riskaverse/format.hpp"
#include "riskaverse/mechanism.hpp"
#include "riskaverse/numeric.hpp"
#include "riskaverse/report.hpp"
#include "riskaverse/utility.hpp"

namespace riskaverse {

inline const double kMhrBound = std::exp(-1.0 / std::exp(1.0));  // e^{-1/e}

/// Random concave piecewise-linear revenue curve with `segments` pieces:
/// exponential segment lengths renormalized to [0, 1], strictly decreasing
/// slopes, R(1) either 0 or a random fraction of the curve's spread, and a
/// random overall scale.
inline Distribution gen_regular(std::uint64_t seed, std::size_t segments) {
  if (segments < 2 || segments > 64) throw std::invalid_argument("gen_regular needs 2..64 segments");
  numeric::SplitMix rng(seed);
  auto exp_draw = [&] { return -std::log(rng.uniform()); };

  std::vector<double> len(segments);
  double total = 0.0;
  for (auto& l : len) total += (l = 0.05 + exp_draw());
  std::vector<double> slope(segments);
  slope[0] = 0.0;
  for (std::size_t j = 1; j < segments; ++j) slope[j] = slope[j - 1] - (0.05 + exp_draw());

  double raw_end = 0.0;
  for (std::size_t j = 0; j < segments; ++j) raw_end += slope[j] * len[j] / total;
  const double spread = -raw_end;
  const double gamma = rng.uniform() < 0.5 ? 0.0 : 0.5 * rng.uniform();
  const double shift = (1.0 + gamma) * spread;
  const double scale = std::exp(4.0 * rng.uniform() - 2.0);

  std::vector<CurvePoint> pts{{0.0, 0.0}};
  double q = 0.0;
  double r = 0.0;
  for (std::size_t j = 0; j < segments; ++j) {
    const double dq = len[j] / total;
    r += (slope[j] + shift) * dq;
    q += dq;
    pts.push_back({j + 1 == segments ? 1.0 : q, std::max(0.0, r * scale)});
  }
  if (gamma == 0.0) pts.back().revenue = 0.0;
  return Distribution::from_curve(RevenueCurve(std::move(pts)));
}

namespace detail {

inline void require_regular_input(const Distribution& d, const char* what) {
  if (!is_regular(d)) throw std::invalid_argument(std::string(what) + " needs a regular distribution");
}

}  // namespace detail

/// Sale probability at the discounted price p* q* is at least 1/2.
inline LemmaReport check_half_bound(const Distribution& d) {
  detail::require_regular_input(d, "half-bound");
  LemmaTally tally("half-bound", 1e-9);
  const double r = hedge_unlimited_price(d);
  tally.record(d.name() + " price=" + format_number(r), d.sale_prob(r), 0.5);
  return tally.take();
}

/// For m.h.r. distributions the same sale probability is at least e^{-1/e}.
inline LemmaReport check_mhr_bound(const Distribution& d) {
  if (!is_mhr(d)) throw std::invalid_argument("mhr-bound needs an m.h.r. distribution");
  LemmaTally tally("mhr-bound", 1e-9);
  const double r = hedge_unlimited_price(d);
  tally.record(d.name() + " price=" + format_number(r), d.sale_prob(r), kMhrBound);
  return tally.take();
}

namespace detail {

// E[min(Y, c)] for Y ~ Binomial(n, q).
inline double capped_binomial_mean(std::size_t n, double q, double c) {
  const auto pmf = numeric::binomial_pmf(n, q);
  double e = 0.0;
  for (std::size_t y = 1; y <= n; ++y) e += pmf[y] * std::min(static_cast<double>(y), c);
  return e;
}

inline constexpr double kCappedTol = 1e-12;

}  // namespace detail

/// E[min(Y, qn)] >= qn / 4 for Y ~ Binomial(n, q) with qn >= k / 2.
inline LemmaReport check_capped_binomial(std::size_t n, double q, std::size_t k) {
  if (k < 1) throw std::invalid_argument("capped-binomial needs k >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("capped-binomial needs q in [0, 1]");
  const double qn = q * static_cast<double>(n);
  if (!(qn >= 0.5 * static_cast<double>(k) - detail::kCappedTol)) {
    throw std::invalid_argument("capped-binomial needs qn >= k/2");
  }
  LemmaTally tally("capped-binomial", detail::kCappedTol);
  tally.record("n=" + std::to_string(n) + " q=" + format_number(q) + " k=" + std::to_string(k),
               detail::capped_binomial_mean(n, q, qn), 0.25 * qn);
  return tally.take();
}

/// Every n <= max_n, q = i/100, and k <= n with qn >= k/2. The bound does
/// not involve k, so each (n, q) is evaluated once and counted per k.
inline LemmaReport check_capped_binomial_exhaustive(std::size_t max_n = 60) {
  LemmaTally tally("capped-binomial", detail::kCappedTol);
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (int i = 1; i <= 100; ++i) {
      const double q = i / 100.0;
      const double qn = q * static_cast<double>(n);
      const double e = detail::capped_binomial_mean(n, q, qn);
      for (std::size_t k = 1; k <= n; ++k) {
        if (i * static_cast<int>(n) * 2 < 100 * static_cast<int>(k)) break;
        tally.record("n=" + std::to_string(n) + " q=" + format_number(q) + " k=" + std::to_string(k), e, 0.25 * qn);
      }
    }
  }
  return tally.take();
}

/// k/(2n) <= E[min(k, X)]/n <= k/n with X ~ Binomial(n, q_r), for every
/// n <= max_n, k <= n and q_r in {0.5, 0.55, ..., 1}, decided in integer
/// arithmetic. Also checks allocation_probability against the exact value.
inline LemmaReport check_allocation_probability_exhaustive(std::size_t max_n = 60) {
  using boost::multiprecision::cpp_int;
  LemmaTally tally("allocation-probability", 0.0);
  constexpr unsigned kDen = 20;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const cpp_int total = boost::multiprecision::pow(cpp_int(kDen), static_cast<unsigned>(n));
    for (unsigned a = kDen / 2; a <= kDen; ++a) {
      // weight[x] = C(n, x) a^x (kDen - a)^(n - x); Pr[X = x] = weight[x] / kDen^n.
      std::vector<cpp_int> weight(n + 1);
      cpp_int binom = 1;
      for (std::size_t x = 0; x <= n; ++x) {
        weight[x] = binom * boost::multiprecision::pow(cpp_int(a), static_cast<unsigned>(x)) *
                    boost::multiprecision::pow(cpp_int(kDen - a), static_cast<unsigned>(n - x));
        binom = binom * (n - x) / (x + 1);
      }
      const double q_r = static_cast<double>(a) / kDen;
      const double scale = static_cast<double>(n) * total.convert_to<double>();
      for (std::size_t k = 1; k <= n; ++k) {
        cpp_int served = 0;  // kDen^n * E[min(k, X)]
        for (std::size_t x = 0; x <= n; ++x) served += weight[x] * std::min(k, x);
        const cpp_int lower_gap = 2 * served - k * total;  // >= 0  iff  q >= k/(2n)
        const cpp_int upper_gap = k * total - served;      // >= 0  iff  q <= k/n
        const std::string instance =
            "n=" + std::to_string(n) + " k=" + std::to_string(k) + " q_r=" + format_number(q_r);
        if (lower_gap < 0 || upper_gap < 0) {
          tally.fail(instance);
          continue;
        }
        const cpp_int half_lower = lower_gap / 2;
        const cpp_int& gap = half_lower < upper_gap ? half_lower : upper_gap;
        tally.record(instance, gap.convert_to<double>() / scale, 0.0);
        const double exact = served.convert_to<double>() / scale;
        if (std::abs(allocation_probability(n, k, q_r) - exact) > 1e-12) tally.fail(instance + " (double mismatch)");
      }
    }
  }
  return tally.take();
}

/// E[Y] for Y the t-th largest of n draws: int_0^1 f_{t,n}(q) v(q) dq.
inline double expected_order_statistic(const Distribution& d, std::size_t t, std::size_t n) {
  if (t < 1 || t > n) throw std::invalid_argument("order statistic needs 1 <= t <= n");
  const numeric::OrderStatisticDensity density(t, n);
  auto integrand = [&](double q) {
    const double f = density(q);
    return f == 0.0 ? 0.0 : f * d.price_at(q);
  };
  return numeric::integrate_piecewise(integrand, 0.0, 1.0, d.kinks());
}

/// Pr[Y >= E[Y]] >= 1/4 for Y the t-th largest of n draws, 1 < t <= n.
/// Pr[Y >= y] = Pr[Binomial(n, Pr[V >= y]) >= t].
inline LemmaReport check_tail(const Distribution& d, std::size_t t, std::size_t n) {
  if (t <= 1 || t > n) throw std::invalid_argument("tail check needs 1 < t <= n");
  detail::require_regular_input(d, "tail check");
  LemmaTally tally("tail", 1e-6);
  // Quadrature rounding must not push E[Y] past a top atom.
  const double mean = std::clamp(expected_order_statistic(d, t, n), d.support_lo(), d.support_hi());
  const double z = d.sale_prob(mean);
  tally.record(d.name() + " t=" + std::to_string(t) + " n=" + std::to_string(n) + " E[Y]=" + format_number(mean),
               numeric::binomial_tail_ge(n, z, t), 0.25);
  return tally.take();
}

/// Rev(VCG at reserve p* q*) >= Rev(VCG at p*) / 2. Exact when k = 1 or
/// k >= n; otherwise paired Monte Carlo on shared samples.
inline LemmaReport check_vcg_discount(const Distribution& d, std::size_t n, std::size_t k,
                                      const MonteCarloOptions& opt) {
  detail::require_regular_input(d, "vcg-discount");
  if (k < 1 || k > n) throw std::invalid_argument("vcg-discount needs 1 <= k <= n");
  const auto mp = monopoly_price(d);
  const double r = mp.price * mp.sale_prob;
  const std::string instance = d.name() + " n=" + std::to_string(n) + " k=" + std::to_string(k);
  LemmaTally tally("vcg-discount", 1e-9);
  const auto linear = UtilityFunction::linear();
  if (k == 1 || k >= n) {
    const double lhs = detail::vcg_expected_utility(d, n, k, r, linear);
    const double rhs = detail::vcg_expected_utility(d, n, k, mp.price, linear);
    tally.record(instance + " exact", lhs, 0.5 * rhs);
    return tally.take();
  }
  const auto discounted = Mechanism::vcg(k, r);
  const auto myerson = Mechanism::myerson_multiunit(k, mp.price);
  const auto est = monte_carlo(d, n, 3, opt, [&](std::span<const double> bids, std::span<double> out) {
    thread_local std::vector<double> scratch;
    out[0] = discounted.revenue(bids, scratch);
    out[1] = myerson.revenue(bids, scratch);
    out[2] = out[0] - 0.5 * out[1];
  });
  tally.record(instance + " mc lhs=" + format_number(est[0].mean) + " rhs=" + format_number(est[1].mean),
               est[0].mean, 0.5 * est[1].mean, 4.0 * est[2].ci_halfwidth);
  return tally.take();
}

/// Unlimited supply (k = n): Hedge utility / u(n p* q*) >= 1/2 for every
/// family member, and >= e^{-1/e} when d is m.h.r. Exact.
inline LemmaReport check_hedge_unlimited(const Distribution& d, std::size_t n, const UtilityFamily& fam) {
  detail::require_regular_input(d, "hedge-unlimited");
  if (n < 1) throw std::invalid_argument("hedge-unlimited needs n >= 1");
  const auto mp = monopoly_price(d);
  const double price = mp.price * mp.sale_prob;
  const double bench_rev = static_cast<double>(n) * price;
  const bool mhr = is_mhr(d);
  LemmaTally tally("hedge-unlimited", 1e-9);
  for (const auto& u : fam.members) {
    const double ratio = eval_posted_exact(d, price, n, n, u).mean_utility / u(bench_rev);
    const std::string instance = d.name() + " n=" + std::to_string(n) + " " + u.name();
    tally.record(instance, ratio, 0.5);
    if (mhr) tally.record(instance + " mhr", ratio, kMhrBound);
  }
  return tally.take();
}

/// Limited supply (k < n): exact Hedge utility against u(E[Rev(Mye)]).
/// With a Monte Carlo benchmark the check uses u(mean - 4 ci).
inline LemmaReport check_hedge_limited(const Distribution& d, std::size_t n, std::size_t k, const UtilityFamily& fam,
                                       const MonteCarloOptions& opt) {
  detail::require_regular_input(d, "hedge-limited");
  if (k < 1 || k >= n) throw std::invalid_argument("hedge-limited needs 1 <= k < n");
  const double price = hedge_limited_price(d, n, k);
  const auto bench = benchmark_revenue(d, n, k, opt);
  const double bench_low = std::max(0.0, bench.mean - 4.0 * bench.ci_halfwidth);
  LemmaTally tally("hedge-limited", 1e-9);
  for (const auto& u : fam.members) {
    const double ub = u(bench.mean);
    const double ratio = eval_posted_exact(d, price, n, k, u).mean_utility / ub;
    const double slack = 0.125 - 0.125 * u(bench_low) / ub;
    tally.record(d.name() + " n=" + std::to_string(n) + " k=" + std::to_string(k) + " " + u.name(), ratio, 0.125,
                 slack);
  }
  return tally.take();
}

/// The VCG proof chain on (d, n, k):
///  - k = 1, smooth u: U(Vickrey^n) >= (1 - 1/n) U(opt-single^n) and
///    U(opt-single^{n-1}) >= (1 - 1/n) U(opt-single^n);
///  - E[u(Rev VCG^{k,n})] >= u(E[Rev VCG^{k,n}]) / 4;
///  - E[Rev VCG^{k,n}] >= E[Rev Mye^{k,n-k}];
///  - 4 U(VCG^{k,n}) >= u(E[Rev Mye^{k,n-k}]);
///  - U(VCG^{k,n}) >= (n-k)/(4n) u(E[Rev Mye^{k,n}]).
/// Monte Carlo benchmark terms get 4 ci of slack.
inline LemmaReport check_vcg_theorems(const Distribution& d, std::size_t n, std::size_t k, const UtilityFamily& fam,
                                      const MonteCarloOptions& opt) {
  detail::require_regular_input(d, "vcg-theorems");
  if (k < 1 || k >= n) throw std::invalid_argument("vcg-theorems needs 1 <= k < n");
  LemmaTally tally("vcg-theorems", 1e-8);
  const std::string base = d.name() + " n=" + std::to_string(n) + " k=" + std::to_string(k);
  const double shrink = 1.0 - 1.0 / static_cast<double>(n);

  if (k == 1) {
    for (const auto& u : fam.members) {
      if (!u.smooth()) continue;
      double reserve = 0.0;
      try {
        reserve = optimal_reserve(d, u);
      } catch (const std::domain_error&) {
        continue;
      }
      const double vickrey = eval_second_price_exact(d, 0.0, n, u).mean_utility;
      const double opt_n = eval_second_price_exact(d, reserve, n, u).mean_utility;
      tally.record(base + " " + u.name() + " vickrey vs opt-single", vickrey / opt_n, shrink);
      if (n >= 2) {
        const double opt_fewer = eval_second_price_exact(d, reserve, n - 1, u).mean_utility;
        tally.record(base + " " + u.name() + " bidder removal", opt_fewer / opt_n, shrink);
      }
    }
  }

  const auto linear = UtilityFunction::linear();
  const double vcg_rev = eval_vcg_exact(d, n, k, linear).mean_utility;
  const auto bk = benchmark_revenue(d, n - k, k, opt);
  const auto full = benchmark_revenue(d, n, k, opt);
  const double bk_high = bk.mean + 4.0 * bk.ci_halfwidth;
  const double full_high = full.mean + 4.0 * full.ci_halfwidth;
  tally.record(base + " bulow-klemperer revenue", vcg_rev / bk.mean, 1.0, 1.0 - bk_high / bk.mean);

  const double theorem = static_cast<double>(n - k) / (4.0 * static_cast<double>(n));
  for (const auto& u : fam.members) {
    const double util = eval_vcg_exact(d, n, k, u).mean_utility;
    const std::string inst = base + " " + u.name();
    tally.record(inst + " tail consequence", util / u(vcg_rev), 0.25);
    const double ub_bk = u(bk.mean);
    tally.record(inst + " vcg vs fewer-bidder benchmark", 4.0 * util / ub_bk, 1.0, 1.0 - u(bk_high) / ub_bk);
    const double ub = u(full.mean);
    tally.record(inst + " overall", util / ub, theorem, theorem * (1.0 - u(full_high) / ub));
  }
  return tally.take();
}

struct FrontierRow {
  double price;
  double sale_prob;
  std::vector<double> ratios;  // family order
  double min_ratio;
};

struct FrontierResult {
  double best_price = 0.0;
  double best_min_ratio = 0.0;
  std::vector<std::string> utilities;
  std::vector<FrontierRow> table;
};

/// Single bidder, single item: for `grid` quantile-spaced posted prices,
/// the min over the family of u(p) Pr[V >= p] / (best single-bidder
/// utility for u). The best grid bracket is refined by golden section.
inline FrontierResult frontier_search(const Distribution& d, const UtilityFamily& fam, std::size_t grid) {
  if (grid < 2) throw std::invalid_argument("frontier grid needs at least 2 points");
  if (fam.members.empty()) throw std::invalid_argument("utility family is empty");
  FrontierResult out;
  std::vector<double> optimum;
  for (const auto& u : fam.members) {
    out.utilities.push_back(u.name());
    optimum.push_back(maximize_single_bidder(d, u).utility);
  }
  auto row_at = [&](double price) {
    FrontierRow row{price, d.sale_prob(price), {}, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
      const double ratio = fam.members[i](price) * row.sale_prob / optimum[i];
      row.ratios.push_back(ratio);
      row.min_ratio = std::min(row.min_ratio, ratio);
    }
    return row;
  };
  std::size_t best = 0;
  for (std::size_t j = 1; j <= grid; ++j) {
    out.table.push_back(row_at(d.price_at(static_cast<double>(j) / static_cast<double>(grid))));
    if (out.table.back().min_ratio > out.table[best].min_ratio) best = j - 1;
  }
  out.best_price = out.table[best].price;
  out.best_min_ratio = out.table[best].min_ratio;

  const double g = static_cast<double>(grid);
  const double lo = static_cast<double>(best) / g;
  const double hi = std::min(1.0, static_cast<double>(best + 2) / g);
  auto objective = [&](double q) { return q <= 0.0 ? 0.0 : row_at(d.price_at(q)).min_ratio; };
  const double q = numeric::golden_section_max(objective, lo, hi, 1e-12);
  const double refined = objective(q);
  if (refined > out.best_min_ratio) {
    out.best_min_ratio = refined;
    out.best_price = d.price_at(q);
  }
  return out;
}

}  // namespace riskaverse

#pragma once

// Expected seller utility of mechanisms: exact evaluators in quantile
// coordinates, a schedule-independent Monte Carlo engine, the
// u(E[Rev(Myerson)]) benchmark and universal ratios over a utility family.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "riskaverse/distribution.hpp"
#include "riskaverse/mechanism.hpp"
#include "riskaverse/numeric.hpp"
#include "riskaverse/report.hpp"
#include "riskaverse/utility.hpp"

namespace riskaverse {

inline constexpr double kZ95 = 1.96;

enum class EvalMethod { exact, monte_carlo };

inline const char* to_string(EvalMethod m) { return m == EvalMethod::exact ? "exact" : "monte_carlo"; }

struct EvalResult {
  double mean_utility = 0.0;
  EvalMethod method = EvalMethod::exact;
  double ci_halfwidth = 0.0;
  std::size_t samples = 0;
  double benchmark = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();  // defined when benchmark > 0

  void set_benchmark(double b) {
    benchmark = b;
    ratio = b > 0.0 ? mean_utility / b : std::numeric_limits<double>::quiet_NaN();
  }
};

struct Estimate {
  double mean = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal interval
  std::size_t samples = 0;
};

struct MonteCarloOptions {
  std::size_t samples = 1000000;
  std::uint64_t seed = 42;
  unsigned workers = 0;  // 0 = hardware concurrency
};

namespace detail {

struct BlockMoments {
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;
};

inline constexpr std::size_t kBlockSize = 4096;

}  // namespace detail

/// Runs `samples` i.i.d. bid profiles of n bidders through `stat`, which
/// writes `num_stats` values per profile. Replication j draws from
/// SplitMix(derive_seed(seed, j)); blocks of replications are merged in
/// index order, so the result does not depend on the worker count.
template <class StatFn>
std::vector<Estimate> monte_carlo(const Distribution& d, std::size_t n, std::size_t num_stats,
                                  const MonteCarloOptions& opt, StatFn&& stat) {
  if (opt.samples < 2) throw std::invalid_argument("Monte Carlo needs at least 2 samples");
  if (n == 0) throw std::invalid_argument("Monte Carlo needs at least one bidder");
  const std::size_t blocks = (opt.samples + detail::kBlockSize - 1) / detail::kBlockSize;
  std::vector<detail::BlockMoments> results(blocks);

  auto run_block = [&](std::size_t b) {
    auto& res = results[b];
    res.mean.assign(num_stats, 0.0);
    res.m2.assign(num_stats, 0.0);
    std::vector<double> bids(n);
    std::vector<double> out(num_stats);
    const std::size_t begin = b * detail::kBlockSize;
    const std::size_t end = std::min(opt.samples, begin + detail::kBlockSize);
    for (std::size_t j = begin; j < end; ++j) {
      numeric::SplitMix rng(numeric::derive_seed(opt.seed, j));
      for (auto& x : bids) x = d.quantile(rng.uniform());
      stat(std::span<const double>(bids), std::span<double>(out));
      ++res.count;
      const double inv = 1.0 / static_cast<double>(res.count);
      for (std::size_t s = 0; s < num_stats; ++s) {
        const double delta = out[s] - res.mean[s];
        res.mean[s] += delta * inv;
        res.m2[s] += delta * (out[s] - res.mean[s]);
      }
    }
  };

  unsigned workers = opt.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < blocks; b = next++) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Chan et al. pairwise merge, in block order.
  std::vector<double> mean(num_stats, 0.0);
  std::vector<double> m2(num_stats, 0.0);
  double count = 0.0;
  for (const auto& r : results) {
    const double nb = static_cast<double>(r.count);
    const double total = count + nb;
    for (std::size_t s = 0; s < num_stats; ++s) {
      const double delta = r.mean[s] - mean[s];
      mean[s] += delta * nb / total;
      m2[s] += r.m2[s] + delta * delta * count * nb / total;
    }
    count = total;
  }
  std::vector<Estimate> est(num_stats);
  for (std::size_t s = 0; s < num_stats; ++s) {
    const double var = m2[s] / (count - 1.0);
    est[s] = {mean[s], kZ95 * std::sqrt(std::max(0.0, var) / count), opt.samples};
  }
  return est;
}

// --- exact evaluators -------------------------------------------------------

namespace detail {

inline EvalResult exact_result(double value) {
  EvalResult r;
  r.mean_utility = value;
  r.method = EvalMethod::exact;
  return r;
}

/// E[u(Rev)] of the (k+1)-st price auction with reserve r on n bidders.
/// With s = Pr[V >= r] and W ~ Binomial(n, s) bidders meeting the reserve:
///   W <= k: revenue W r;  W > k: revenue k v(Q_{k+1,n}), Q_{k+1,n} <= s.
inline double vcg_expected_utility(const Distribution& d, std::size_t n, std::size_t k, double r,
                                   const UtilityFunction& u) {
  const double s = r > 0.0 ? d.sale_prob(r) : 1.0;
  const auto pmf = numeric::binomial_pmf(n, s);
  double total = 0.0;
  for (std::size_t w = 1; w <= std::min(k, n); ++w) total += pmf[w] * u(static_cast<double>(w) * r);
  if (k < n && s > 0.0) {
    const numeric::OrderStatisticDensity density(k + 1, n);
    const double scale = static_cast<double>(k);
    auto integrand = [&](double q) {
      const double f = density(q);
      if (f == 0.0) return 0.0;
      return f * u(scale * d.price_at(q));
    };
    std::vector<double> breaks = d.kinks();
    for (double c : u.kinks()) breaks.push_back(d.sale_prob(c / scale));
    total += numeric::integrate_piecewise(integrand, 0.0, s, breaks);
  }
  return total;
}

}  // namespace detail

/// Posted price p, supply k, n bidders: sum_y Binom(n, q_p, y) u(p min(y, k)),
/// with q_p = Pr[bid >= p] (atoms at p included).
inline EvalResult eval_posted_exact(const Distribution& d, double p, std::size_t n, std::size_t k,
                                    const UtilityFunction& u) {
  if (n == 0 || k == 0) throw std::invalid_argument("posted-price evaluation needs n, k >= 1");
  const double q = d.sale_prob(p);
  const auto pmf = numeric::binomial_pmf(n, q);
  double total = 0.0;
  for (std::size_t y = 1; y <= n; ++y) total += pmf[y] * u(p * static_cast<double>(std::min(y, k)));
  return detail::exact_result(total);
}

/// Single-item second price auction with reserve r on n bidders.
inline EvalResult eval_second_price_exact(const Distribution& d, double r, std::size_t n,
                                          const UtilityFunction& u) {
  if (n == 0) throw std::invalid_argument("second price evaluation needs n >= 1");
  return detail::exact_result(detail::vcg_expected_utility(d, n, 1, r, u));
}

/// Reserve-free VCG: revenue k Y with Y = v(Q_{k+1,n}).
inline EvalResult eval_vcg_exact(const Distribution& d, std::size_t n, std::size_t k, const UtilityFunction& u) {
  if (k < 1 || k >= n) throw std::invalid_argument("reserve-free VCG evaluation needs 1 <= k < n");
  return detail::exact_result(detail::vcg_expected_utility(d, n, k, 0.0, u));
}

/// True when `eval_exact` can evaluate m on n bidders.
inline bool has_exact_evaluator(const Mechanism& m, std::size_t n) {
  if (m.is_posted()) return true;
  return m.supply() == 1 || m.supply() >= n || m.price() == 0.0;
}

inline EvalResult eval_exact(const Mechanism& m, const Distribution& d, std::size_t n, const UtilityFunction& u) {
  if (m.is_posted()) return eval_posted_exact(d, m.price(), n, m.supply(), u);
  if (m.supply() == 1) return eval_second_price_exact(d, m.price(), n, u);
  if (m.supply() >= n) return eval_posted_exact(d, m.price(), n, n, u);
  if (m.price() == 0.0) return eval_vcg_exact(d, n, m.supply(), u);
  throw std::invalid_argument("no exact evaluator for VCG with a reserve and 2 <= k < n");
}

// --- Monte Carlo -------------------------------------------------------------

/// E[u(Rev(m, v))] for every member of `utilities`, from shared samples.
inline std::vector<EvalResult> eval_mc(const Mechanism& m, const Distribution& d, std::size_t n,
                                       std::span<const UtilityFunction> utilities, const MonteCarloOptions& opt) {
  if (opt.samples < 1000) throw std::invalid_argument("Monte Carlo evaluation needs at least 1000 samples");
  const auto est = monte_carlo(d, n, utilities.size(), opt, [&](std::span<const double> bids, std::span<double> out) {
    thread_local std::vector<double> scratch;
    const double rev = m.revenue(bids, scratch);
    for (std::size_t i = 0; i < utilities.size(); ++i) out[i] = utilities[i](rev);
  });
  std::vector<EvalResult> res(utilities.size());
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    res[i].mean_utility = est[i].mean;
    res[i].method = EvalMethod::monte_carlo;
    res[i].ci_halfwidth = est[i].ci_halfwidth;
    res[i].samples = est[i].samples;
  }
  return res;
}

inline EvalResult eval_mc(const Mechanism& m, const Distribution& d, std::size_t n, const UtilityFunction& u,
                          const MonteCarloOptions& opt) {
  return eval_mc(m, d, n, std::span<const UtilityFunction>(&u, 1), opt).front();
}

// --- benchmark -----------------------------------------------------------------

/// E[Rev(Mye^{k,n})] with Mye = VCG(k, p*). Exact for k = 1 and k >= n,
/// Monte Carlo otherwise.
inline Estimate benchmark_revenue(const Distribution& d, std::size_t n, std::size_t k, const MonteCarloOptions& opt) {
  if (n == 0 || k == 0) throw std::invalid_argument("benchmark needs n, k >= 1");
  const double p_star = monopoly_price(d).price;
  const auto linear = UtilityFunction::linear();
  if (k == 1 || k >= n) return {detail::vcg_expected_utility(d, n, k, p_star, linear), 0.0, 0};
  const auto r = eval_mc(Mechanism::myerson_multiunit(k, p_star), d, n, linear, opt);
  return {r.mean_utility, r.ci_halfwidth, r.samples};
}

/// u(E[Rev(Mye^{k,n})]): an upper bound on any mechanism's expected utility.
inline double benchmark_ub(const Distribution& d, std::size_t n, std::size_t k, const UtilityFunction& u,
                           const MonteCarloOptions& opt) {
  if (!is_regular(d)) throw std::invalid_argument("benchmark needs a regular distribution");
  return u(benchmark_revenue(d, n, k, opt).mean);
}

struct UniversalRatio {
  double rho = std::numeric_limits<double>::infinity();
  UtilityFunction argmin = UtilityFunction::linear();
  std::vector<EvalResult> per_utility;  // family order
};

/// min over the family of U(m, u) / u(E[Rev(Mye)]). Lower-bounds the ratio
/// against the true utility-optimal mechanism.
inline UniversalRatio universal_ratio(const Mechanism& m, const Distribution& d, std::size_t n, std::size_t k,
                                      const UtilityFamily& fam, const MonteCarloOptions& opt) {
  if (fam.members.empty()) throw std::invalid_argument("utility family is empty");
  if (!is_regular(d)) throw std::invalid_argument("universal ratio needs a regular distribution");
  UniversalRatio out;
  if (has_exact_evaluator(m, n)) {
    for (const auto& u : fam.members) out.per_utility.push_back(eval_exact(m, d, n, u));
  } else {
    out.per_utility = eval_mc(m, d, n, fam.members, opt);
  }
  const auto bench = benchmark_revenue(d, n, k, opt);
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    auto& r = out.per_utility[i];
    r.set_benchmark(fam.members[i](bench.mean));
    if (r.ratio < out.rho) {
      out.rho = r.ratio;
      out.argmin = fam.members[i];
    }
  }
  return out;
}

/// Compares E[u(Rev)] with the expected virtual utility served,
/// E[sum_i phi^u(v_i) x_i], on shared samples. Single-item mechanisms only.
inline LemmaReport check_lemma1_identity(const Distribution& d, const Mechanism& m, const UtilityFunction& u,
                                         std::size_t n, const MonteCarloOptions& opt) {
  if (m.supply() != 1) throw std::invalid_argument("the virtual-utility identity is for single-item mechanisms");
  const auto est = monte_carlo(d, n, 2, opt, [&](std::span<const double> bids, std::span<double> out) {
    const auto outcome = m.run(BidProfile(std::vector<double>(bids.begin(), bids.end())));
    out[0] = u(outcome.revenue);
    double served = 0.0;
    for (std::size_t i : outcome.winners) served += virtual_utility(d, u, bids[i]);
    out[1] = served;
  });
  const double diff = std::abs(est[0].mean - est[1].mean);
  const double ci = std::hypot(est[0].ci_halfwidth, est[1].ci_halfwidth);
  LemmaTally tally("lemma1-identity", 0.0);
  tally.record(d.name() + " " + m.describe() + " " + u.name() + " n=" + std::to_string(n) +
                   " utility=" + format_number(est[0].mean) + " virtual=" + format_number(est[1].mean),
               -diff, -4.0 * ci);
  return tally.take();
}

}  // namespace riskaverse

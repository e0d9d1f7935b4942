#pragma once

// Bodies of the command-line subcommands. Each writes to a stream and
// returns the process exit code; argument handling lives in tools/.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "riskaverse/distribution.hpp"
#include "riskaverse/evaluation.hpp"
#include "riskaverse/format.hpp"
#include "riskaverse/lemmas.hpp"
#include "riskaverse/mechanism.hpp"
#include "riskaverse/numeric.hpp"
#include "riskaverse/parse.hpp"
#include "riskaverse/report.hpp"
#include "riskaverse/utility.hpp"

namespace riskaverse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitLemmaFailure = 1;
inline constexpr int kExitUsage = 2;

enum class OutputFormat { csv, svg };

// --- SVG ----------------------------------------------------------------------

/// Standalone line chart of ys against xs with axis labels and tick values.
inline void write_svg_chart(std::ostream& os, const std::string& title, const std::string& xlabel,
                            const std::string& ylabel, const std::vector<double>& xs, const std::vector<double>& ys) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  double x0 = xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end());
  double x1 = xs.empty() ? 1.0 : *std::max_element(xs.begin(), xs.end());
  double y0 = 0.0;
  double y1 = ys.empty() ? 1.0 : std::max(1e-12, *std::max_element(ys.begin(), ys.end()));
  if (!(x1 > x0)) x1 = x0 + 1.0;
  y1 *= 1.05;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
     << kW << ' ' << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << py(y0) << "\" x2=\"" << kW - kRight << "\" y2=\"" << py(y0)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << py(y0) << "\" x2=\"" << kLeft << "\" y2=\"" << kTop
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << kH - kBottom + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_number(xv) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_number(yv) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 16
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << (kTop + kH - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (kTop + kH - kBottom) / 2 << ")\" font-family=\"sans-serif\" font-size=\"13\">" << ylabel << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ' ';
    os << format_number(px(xs[i])) << ',' << format_number(py(ys[i]));
  }
  os << "\"/>\n</svg>\n";
}

// --- dist -------------------------------------------------------------------------

inline int cmd_dist(std::ostream& os, const Distribution& d, std::size_t grid, OutputFormat format) {
  if (grid < 1) throw ParseError("--grid must be at least 1");
  std::vector<double> qs, rs;
  if (format == OutputFormat::csv) os << "q,revenue,price,cdf_at_price\n";
  for (std::size_t j = 1; j <= grid; ++j) {
    const double q = static_cast<double>(j) / static_cast<double>(grid);
    const double price = d.price_at(q);
    if (format == OutputFormat::csv) {
      os << format_number(q) << ',' << format_number(d.revenue(q)) << ',' << format_number(price) << ','
         << format_number(d.cdf(price)) << '\n';
    }
    qs.push_back(q);
    rs.push_back(d.revenue(q));
  }
  if (format == OutputFormat::svg) write_svg_chart(os, "revenue curve " + d.name(), "q", "R(q)", qs, rs);
  return kExitOk;
}

// --- price -----------------------------------------------------------------------

inline int cmd_price(std::ostream& os, const Distribution& d, std::optional<std::size_t> n, std::optional<std::size_t> k,
                     const std::optional<UtilityFunction>& u) {
  const auto mp = monopoly_price(d);
  os << "p_star=" << format_number(mp.price) << '\n';
  os << "q_star=" << format_number(mp.sale_prob) << '\n';
  const bool regular = is_regular(d);
  if (regular) {
    os << "hedge_unlimited=" << format_number(hedge_unlimited_price(d)) << '\n';
    if (n && k) os << "hedge_limited=" << format_number(hedge_limited_price(d, *n, *k)) << '\n';
  }
  if (u) {
    if (u->smooth() && regular) os << "r_u_star=" << format_number(optimal_reserve(d, *u)) << '\n';
    const auto best = maximize_single_bidder(d, *u);
    os << "single_bidder_price=" << format_number(best.price) << '\n';
    os << "single_bidder_utility=" << format_number(best.utility) << '\n';
  }
  return kExitOk;
}

// --- eval --------------------------------------------------------------------------

inline constexpr const char* kEvalHeader = "mechanism,dist,n,k,utility,method,mean_utility,ci_halfwidth,benchmark,ratio";

inline int cmd_eval(std::ostream& os, const std::string& mech_spec, const Distribution& d, std::optional<std::size_t> n_flag,
                    const UtilityFamily& fam, const MonteCarloOptions& opt) {
  const auto spec = parse_mechanism(mech_spec);
  std::size_t n = n_flag.value_or(spec.kind == MechanismSpecKind::hedge ? spec.bidders : 1);
  if (n < 1) throw ParseError("--n must be at least 1");
  const auto m = spec.resolve(d);
  const std::size_t k = m.supply();

  std::vector<EvalResult> results;
  if (has_exact_evaluator(m, n)) {
    for (const auto& u : fam.members) results.push_back(eval_exact(m, d, n, u));
  } else {
    results = eval_mc(m, d, n, fam.members, opt);
  }
  if (is_regular(d)) {
    const double bench = benchmark_revenue(d, n, k, opt).mean;
    for (std::size_t i = 0; i < results.size(); ++i) results[i].set_benchmark(fam.members[i](bench));
  }

  auto row = [&](const std::string& uname, const EvalResult& r) {
    os << csv_field(mech_spec) << ',' << csv_field(d.name()) << ',' << n << ',' << k << ',' << csv_field(uname) << ','
       << to_string(r.method) << ',' << format_number(r.mean_utility) << ',' << format_number(r.ci_halfwidth) << ',';
    if (r.benchmark > 0.0) os << format_number(r.benchmark) << ',' << format_number(r.ratio);
    else os << ',';
    os << '\n';
  };
  os << kEvalHeader << '\n';
  std::size_t worst = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    row(fam.members[i].name(), results[i]);
    if (results[i].ratio < results[worst].ratio) worst = i;
  }
  if (results.size() > 1) row("min:" + fam.members[worst].name(), results[worst]);
  return kExitOk;
}

// --- lemmas ------------------------------------------------------------------------

struct LemmaRequest {
  std::string selection = "all";
  std::optional<Distribution> dist;
  std::size_t n = 2;
  std::size_t k = 1;
  std::size_t t = 2;
  UtilityFamily family = UtilityFamily::default_family();
  MonteCarloOptions opt;
};

inline const std::vector<std::string>& lemma_names() {
  static const std::vector<std::string> names{
      "half-bound",   "mhr-bound",      "capped-binomial", "allocation-probability", "tail",
      "vcg-discount", "hedge-unlimited", "hedge-limited",   "vcg-theorems",           "lemma1-identity",
      "virtual-utility-monotone"};
  return names;
}

namespace detail {

inline std::vector<Distribution> builtin_regular() {
  return {Distribution::uniform(0, 1), Distribution::exponential(1), Distribution::left_triangle(0.1),
          Distribution::left_triangle(0.01), Distribution::left_triangle(0.001)};
}

// Seed of the j-th random curve of a property run, and its segment count.
inline Distribution property_curve(std::uint64_t seed, std::size_t j) {
  return gen_regular(numeric::derive_seed(seed, j), 2 + j % 16);
}

inline LemmaReport renamed(LemmaReport r, const std::string& name) {
  r.name = name;
  return r;
}

class Suite {
 public:
  explicit Suite(const LemmaRequest& req) : req_(req) {}

  // Monte Carlo options for the next check; seeds differ per check.
  MonteCarloOptions next_opt() {
    auto o = req_.opt;
    o.seed = numeric::derive_seed(req_.opt.seed, 1000 + counter_++);
    return o;
  }

  std::vector<LemmaReport> run(const std::string& name) {
    std::vector<LemmaReport> out;
    const auto& d = req_.dist;
    const auto& fam = req_.family;
    if (name == "half-bound") {
      if (d) return {check_half_bound(*d)};
      for (const auto& x : builtin_regular()) out.push_back(check_half_bound(x));
      LemmaTally prop("half-bound/gen-regular", 1e-9);
      for (std::size_t j = 0; j < 1000; ++j) prop.absorb(check_half_bound(property_curve(req_.opt.seed, j)));
      out.push_back(prop.take());
    } else if (name == "mhr-bound") {
      if (d) return {check_mhr_bound(*d)};
      for (const auto& x : {Distribution::uniform(0, 1), Distribution::exponential(1), Distribution::exponential(2)}) {
        out.push_back(check_mhr_bound(x));
      }
    } else if (name == "capped-binomial") {
      out.push_back(check_capped_binomial_exhaustive());
    } else if (name == "allocation-probability") {
      out.push_back(check_allocation_probability_exhaustive());
    } else if (name == "tail") {
      if (d) return {check_tail(*d, req_.t, req_.n)};
      for (const auto& x : {Distribution::uniform(0, 1), Distribution::exponential(1)}) {
        LemmaTally all("tail", 1e-6);
        for (std::size_t n = 2; n <= 20; ++n) {
          for (std::size_t t = 2; t <= n; ++t) all.absorb(check_tail(x, t, n));
        }
        out.push_back(all.take());
      }
      out.push_back(renamed(check_tail(Distribution::left_triangle(1e-4), 2, 2), "tail/near-linear"));
      LemmaTally prop("tail/gen-regular", 1e-6);
      for (std::size_t j = 0; j < 200; ++j) {
        const std::size_t n = 2 + j % 19;
        const std::size_t t = 2 + (7 * j) % (n - 1);
        prop.absorb(check_tail(property_curve(req_.opt.seed ^ 0x7a11ULL, j), t, n));
      }
      out.push_back(prop.take());
    } else if (name == "vcg-discount") {
      if (d) return {check_vcg_discount(*d, req_.n, req_.k, next_opt())};
      out.push_back(check_vcg_discount(Distribution::uniform(0, 1), 3, 1, next_opt()));
      out.push_back(check_vcg_discount(Distribution::uniform(0, 1), 2, 2, next_opt()));
      out.push_back(check_vcg_discount(Distribution::exponential(1), 5, 2, next_opt()));
    } else if (name == "hedge-unlimited") {
      if (d) return {check_hedge_unlimited(*d, req_.n, fam)};
      for (const auto& x : {Distribution::uniform(0, 1), Distribution::exponential(1), Distribution::left_triangle(0.01)}) {
        for (std::size_t n : {1, 2, 5, 20}) out.push_back(check_hedge_unlimited(x, n, fam));
      }
    } else if (name == "hedge-limited") {
      if (d) return {check_hedge_limited(*d, req_.n, req_.k, fam, next_opt())};
      for (const auto& x : {Distribution::uniform(0, 1), Distribution::exponential(1)}) {
        for (auto [n, k] : {std::pair<std::size_t, std::size_t>{2, 1}, {5, 2}, {10, 3}}) {
          out.push_back(check_hedge_limited(x, n, k, fam, next_opt()));
        }
      }
    } else if (name == "vcg-theorems") {
      if (d) return {check_vcg_theorems(*d, req_.n, req_.k, fam, next_opt())};
      for (const auto& x : {Distribution::uniform(0, 1), Distribution::exponential(1)}) {
        for (auto [n, k] : {std::pair<std::size_t, std::size_t>{2, 1}, {3, 1}, {5, 1}, {4, 1}, {6, 2}, {12, 3}}) {
          out.push_back(check_vcg_theorems(x, n, k, fam, next_opt()));
        }
      }
    } else if (name == "lemma1-identity") {
      const auto x = d.value_or(Distribution::uniform(0, 1));
      for (double r : {0.5, 0.0}) {
        for (const auto& u : {UtilityFunction::linear(), UtilityFunction::power(0.5)}) {
          for (std::size_t n : {1, 2, 3}) {
            if (d && n != req_.n) continue;
            out.push_back(check_lemma1_identity(x, Mechanism::vcg(1, r), u, n, next_opt()));
          }
        }
      }
    } else if (name == "virtual-utility-monotone") {
      std::vector<Distribution> ds;
      if (d) ds.push_back(*d);
      else ds = {Distribution::uniform(0, 1), Distribution::exponential(1)};
      for (const auto& x : ds) {
        for (const auto& u : fam.members) {
          if (u.smooth()) out.push_back(check_virtual_utility_monotone(x, u));
        }
      }
    } else {
      throw ParseError("unknown lemma selection '" + name + "'");
    }
    return out;
  }

 private:
  const LemmaRequest& req_;
  std::uint64_t counter_ = 0;
};

}  // namespace detail

inline std::vector<LemmaReport> run_lemmas(const LemmaRequest& req) {
  detail::Suite suite(req);
  if (req.selection != "all") return suite.run(req.selection);
  std::vector<LemmaReport> out;
  for (const auto& name : lemma_names()) {
    auto part = suite.run(name);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

inline int cmd_lemmas(std::ostream& os, const LemmaRequest& req) {
  const auto reports = run_lemmas(req);
  os << kLemmaCsvHeader << '\n';
  bool ok = true;
  for (const auto& r : reports) {
    write_csv_row(os, r);
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitLemmaFailure;
}

// --- reproduce -----------------------------------------------------------------------

/// Claimed constants against certified ratios on a fixed instance set.
/// Ratios use the u(E[Rev(Mye)]) benchmark unless noted in the row.
inline int cmd_reproduce(std::ostream& os, const MonteCarloOptions& opt) {
  const auto uniform = Distribution::uniform(0, 1);
  const auto expo = Distribution::exponential(1);
  const auto fam = UtilityFamily::default_family();
  bool ok = true;
  os << "result,instance,claimed,computed,passed\n";
  auto row = [&](const std::string& result, const std::string& instance, double claimed, double computed, bool pass) {
    os << csv_field(result) << ',' << csv_field(instance) << ',' << format_number(claimed) << ','
       << format_number(computed) << ',' << (pass ? "true" : "false") << '\n';
    ok = ok && pass;
  };
  auto at_least = [&](const std::string& result, const std::string& instance, double claimed, double computed) {
    row(result, instance, claimed, computed, computed >= claimed - 1e-9);
  };
  auto hedge_ratio = [&](const Distribution& d, std::size_t n, std::size_t k) {
    return universal_ratio(make_mechanism(MechanismRecipe::hedge, d, nullptr, n, k), d, n, k, fam, opt).rho;
  };

  at_least("Lemma 2 (sale probability at p*q*)", "uniform", 0.5, uniform.sale_prob(hedge_unlimited_price(uniform)));
  const auto lt = Distribution::left_triangle(0.001);
  at_least("Lemma 2 (sale probability at p*q*)", "left-triangle eps=0.001", 0.5, lt.sale_prob(hedge_unlimited_price(lt)));
  at_least("Lemma 3 (m.h.r.)", "exponential", kMhrBound, expo.sale_prob(hedge_unlimited_price(expo)));
  at_least("Theorem 4 (unlimited supply)", "uniform, n=5", 0.5, hedge_ratio(uniform, 5, 5));
  at_least("Theorem 4 (unlimited supply, m.h.r.)", "exponential, n=5", kMhrBound, hedge_ratio(expo, 5, 5));

  const UtilityFamily extremal{{UtilityFunction::linear(), UtilityFunction::capped(1e-5)}};
  const auto front = frontier_search(lt, extremal, 1000);
  const double cap = lt.sale_prob(hedge_unlimited_price(lt));
  row("Theorem 6 (upper bound 1/2, maximin ratio)", "left-triangle eps=0.001", 0.5, front.best_min_ratio,
      front.best_min_ratio <= cap + 1e-3);
  const auto irr = frontier_search(Distribution::irregular_example(0.01), extremal, 1000);
  row("Irregular example (no constant ratio)", "irregular-example eps=0.01", 2 * 0.01, irr.best_min_ratio,
      irr.best_min_ratio <= 0.05);

  at_least("Theorem 5 (limited supply)", "uniform, n=10 k=3", 0.125, hedge_ratio(uniform, 10, 3));
  at_least("Theorem 5 (limited supply)", "exponential, n=5 k=2", 0.125, hedge_ratio(expo, 5, 2));

  for (std::size_t n : {2, 3, 5}) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& u : fam.members) {
      if (!u.smooth()) continue;
      const double vickrey = eval_second_price_exact(uniform, 0.0, n, u).mean_utility;
      const double best = eval_second_price_exact(uniform, optimal_reserve(uniform, u), n, u).mean_utility;
      worst = std::min(worst, vickrey / best);
    }
    at_least("Theorem 7 (Vickrey vs utility-optimal, smooth utilities)", "uniform, n=" + std::to_string(n),
             1.0 - 1.0 / static_cast<double>(n), worst);
  }
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{6, 2}, {12, 3}}) {
    const double rho = universal_ratio(Mechanism::vcg(k, 0.0), uniform, n, k, fam, opt).rho;
    at_least("Theorem 8 (VCG)", "uniform, n=" + std::to_string(n) + " k=" + std::to_string(k),
             static_cast<double>(n - k) / (4.0 * static_cast<double>(n)), rho);
  }
  return ok ? kExitOk : kExitLemmaFailure;
}

// --- frontier ------------------------------------------------------------------------

inline int cmd_frontier(std::ostream& os, const Distribution& d, const UtilityFamily& fam, std::size_t grid,
                        OutputFormat format) {
  const auto res = frontier_search(d, fam, grid);
  if (format == OutputFormat::svg) {
    std::vector<double> xs, ys;
    for (const auto& r : res.table) {
      xs.push_back(r.price);
      ys.push_back(r.min_ratio);
    }
    write_svg_chart(os, "min ratio over family, " + d.name(), "posted price", "min ratio", xs, ys);
    return kExitOk;
  }
  os << "price,sale_prob";
  for (const auto& name : res.utilities) os << ',' << csv_field("ratio_" + name);
  os << ",min_ratio\n";
  for (const auto& r : res.table) {
    os << format_number(r.price) << ',' << format_number(r.sale_prob);
    for (double x : r.ratios) os << ',' << format_number(x);
    os << ',' << format_number(r.min_ratio) << '\n';
  }
  return kExitOk;
}

}  // namespace riskaverse::cli

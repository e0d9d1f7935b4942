// riskaverse: distribution inspection, prices, mechanism evaluation, lemma
// checks, the reproduction table and frontier export.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "riskaverse/commands.hpp"

namespace cli = riskaverse::cli;
using riskaverse::ParseError;

namespace {

struct Globals {
  std::uint64_t seed = 42;
  std::size_t samples = 1000000;
  unsigned workers = 0;
  std::string out;
  std::string format = "csv";

  riskaverse::MonteCarloOptions mc() const {
    riskaverse::MonteCarloOptions o;
    o.seed = seed;
    o.samples = samples;
    o.workers = workers;
    return o;
  }
};

cli::OutputFormat output_format(const Globals& g, bool svg_allowed) {
  if (g.format == "csv") return cli::OutputFormat::csv;
  if (g.format == "svg" && svg_allowed) return cli::OutputFormat::svg;
  throw ParseError("--format " + g.format + " is not supported by this command");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-averse seller auctions: prices, utilities and approximation checks"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; command-line flags override it");

  Globals g;
  app.add_option("--seed", g.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--samples", g.samples, "Monte Carlo samples (at least 1000)")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1000}, std::size_t{1} << 40));
  app.add_option("--workers", g.workers, "Monte Carlo threads (0 = all cores); results do not depend on it");
  app.add_option("--out", g.out, "output file (default standard output)");
  app.add_option("--format", g.format, "csv or svg (svg for dist and frontier)")
      ->check(CLI::IsMember({"csv", "svg"}))
      ->capture_default_str();

  std::string dist_spec, mech_spec, util_spec = "linear", family_spec = "family:default", selection = "all";
  std::size_t grid = 100;
  std::optional<std::size_t> n_opt, k_opt, t_opt;

  auto* dist = app.add_subcommand("dist", "revenue curve table");
  dist->add_option("spec", dist_spec, "distribution spec")->required();
  dist->add_option("--grid", grid, "number of q values in (0, 1]")->capture_default_str();

  std::optional<std::string> price_util;
  auto* price = app.add_subcommand("price", "monopoly, Hedge and utility-optimal prices");
  price->add_option("spec", dist_spec, "distribution spec")->required();
  price->add_option("--n", n_opt, "bidders (for the limited-supply Hedge price)");
  price->add_option("--k", k_opt, "units (for the limited-supply Hedge price)");
  price->add_option("--utility", price_util, "utility spec");

  auto* eval = app.add_subcommand("eval", "expected utility of a mechanism");
  eval->add_option("--mech", mech_spec, "mechanism spec")->required();
  eval->add_option("--dist", dist_spec, "distribution spec")->required();
  eval->add_option("--n", n_opt, "bidders (default: from hedge:n,k, else 1)");
  eval->add_option("--utility", util_spec, "utility or family spec")->capture_default_str();

  std::optional<std::string> lemma_dist;
  auto* lemmas = app.add_subcommand("lemmas", "bound checks as CSV; exit 1 if any fails");
  lemmas->add_option("selection", selection, "check name or 'all'")->capture_default_str();
  lemmas->add_option("--dist", lemma_dist, "distribution (default: the built-in instance set)");
  lemmas->add_option("--n", n_opt, "bidders");
  lemmas->add_option("--k", k_opt, "units");
  lemmas->add_option("--t", t_opt, "order statistic rank (tail)");
  lemmas->add_option("--utility", family_spec, "utility or family spec")->capture_default_str();

  auto* reproduce = app.add_subcommand("reproduce", "claimed constants against computed ratios");

  auto* frontier = app.add_subcommand("frontier", "single-bidder price frontier");
  frontier->add_option("spec", dist_spec, "distribution spec")->required();
  frontier->add_option("--utility", family_spec, "utility or family spec")->capture_default_str();
  frontier->add_option("--grid", grid, "number of quantile-spaced prices")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  std::ostringstream buffer;
  int code = cli::kExitOk;
  try {
    if (*dist) {
      code = cli::cmd_dist(buffer, riskaverse::parse_distribution(dist_spec), grid, output_format(g, true));
    } else if (*price) {
      output_format(g, false);
      std::optional<riskaverse::UtilityFunction> u;
      if (price_util) u = riskaverse::parse_utility(*price_util);
      code = cli::cmd_price(buffer, riskaverse::parse_distribution(dist_spec), n_opt, k_opt, u);
    } else if (*eval) {
      output_format(g, false);
      const auto d = riskaverse::parse_distribution(dist_spec);
      code = cli::cmd_eval(buffer, mech_spec, d, n_opt, riskaverse::parse_family(util_spec), g.mc());
    } else if (*lemmas) {
      output_format(g, false);
      cli::LemmaRequest req;
      req.selection = selection;
      if (lemma_dist) req.dist = riskaverse::parse_distribution(*lemma_dist);
      if (n_opt) req.n = *n_opt;
      if (k_opt) req.k = *k_opt;
      if (t_opt) req.t = *t_opt;
      req.family = riskaverse::parse_family(family_spec);
      req.opt = g.mc();
      code = cli::cmd_lemmas(buffer, req);
    } else if (*reproduce) {
      output_format(g, false);
      code = cli::cmd_reproduce(buffer, g.mc());
    } else if (*frontier) {
      code = cli::cmd_frontier(buffer, riskaverse::parse_distribution(dist_spec), riskaverse::parse_family(family_spec),
                               grid, output_format(g, true));
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }

  if (g.out.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream file(g.out, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open " << g.out << '\n';
      return cli::kExitUsage;
    }
    file << buffer.str();
  }
  return code;
}

#pragma once

// Deterministic truthful mechanisms (sequential posted prices and the
// (k+1)-st price auction with reserve) and the Hedge price computations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskaverse/distribution.hpp"
#include "riskaverse/format.hpp"
#include "riskaverse/numeric.hpp"
#include "riskaverse/utility.hpp"

namespace riskaverse {

struct MechanismOutcome {
  std::vector<std::size_t> winners;  // ascending bidder indices
  std::vector<double> payments;      // one entry per bidder; 0 for losers
  double revenue = 0.0;
};

/// Posted price p to bidders in index order while supply k lasts. A bid
/// equal to p accepts.
inline MechanismOutcome run_posted_price(double p, std::size_t k, const BidProfile& bids) {
  if (!(p >= 0.0)) throw std::invalid_argument("posted price must be non-negative");
  if (k < 1) throw std::invalid_argument("supply must be at least 1");
  MechanismOutcome out;
  out.payments.assign(bids.size(), 0.0);
  for (std::size_t i = 0; i < bids.size() && out.winners.size() < k; ++i) {
    if (bids[i] >= p) {
      out.winners.push_back(i);
      out.payments[i] = p;
      out.revenue += p;
    }
  }
  return out;
}

/// (k+1)-st price auction with reserve r. The top k bidders that meet the
/// reserve win (lower index first on ties) and each pays
/// max(r, (k+1)-st highest bid), the (n+1)-th highest bid being 0.
inline MechanismOutcome run_vcg(std::size_t k, double r, const BidProfile& bids) {
  if (k < 1) throw std::invalid_argument("supply must be at least 1");
  if (!(r >= 0.0)) throw std::invalid_argument("reserve must be non-negative");
  const std::size_t n = bids.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bids[a] > bids[b]; });
  const double threshold = std::max(r, k < n ? bids[order[k]] : 0.0);
  MechanismOutcome out;
  out.payments.assign(n, 0.0);
  for (std::size_t j = 0; j < std::min(k, n); ++j) {
    const std::size_t i = order[j];
    if (bids[i] >= r) {
      out.winners.push_back(i);
      out.payments[i] = threshold;
      out.revenue += threshold;
    }
  }
  std::sort(out.winners.begin(), out.winners.end());
  return out;
}

enum class MechanismKind { posted_price, vcg, myerson_multiunit, utility_optimal_single };

/// Immutable allocation/payment rule. `price` is the posted price for
/// posted_price and the reserve for the VCG kinds.
class Mechanism {
 public:
  static Mechanism posted_price(double p, std::size_t k) {
    validate(p, k);
    return Mechanism(MechanismKind::posted_price, p, k);
  }
  static Mechanism vcg(std::size_t k, double reserve) {
    validate(reserve, k);
    return Mechanism(MechanismKind::vcg, reserve, k);
  }
  /// VCG with the revenue-optimal reserve p*.
  static Mechanism myerson_multiunit(std::size_t k, double p_star) {
    validate(p_star, k);
    return Mechanism(MechanismKind::myerson_multiunit, p_star, k);
  }
  /// Second price auction with reserve r_u*.
  static Mechanism utility_optimal_single(double reserve) {
    validate(reserve, 1);
    return Mechanism(MechanismKind::utility_optimal_single, reserve, 1);
  }

  MechanismKind kind() const { return kind_; }
  bool is_posted() const { return kind_ == MechanismKind::posted_price; }
  double price() const { return price_; }
  std::size_t supply() const { return supply_; }

  MechanismOutcome run(const BidProfile& bids) const {
    return is_posted() ? run_posted_price(price_, supply_, bids) : run_vcg(supply_, price_, bids);
  }

  /// Revenue only, without building the outcome. `scratch` is reused
  /// between calls to avoid allocation.
  double revenue(std::span<const double> bids, std::vector<double>& scratch) const {
    if (is_posted()) {
      std::size_t sold = 0;
      for (double b : bids) {
        if (b >= price_ && ++sold == supply_) break;
      }
      return price_ * static_cast<double>(sold);
    }
    const std::size_t n = bids.size();
    std::size_t meet = 0;
    for (double b : bids) meet += b >= price_ ? 1 : 0;
    const std::size_t winners = std::min(meet, supply_);
    if (winners == 0) return 0.0;
    double next = 0.0;
    if (supply_ < n) {
      scratch.assign(bids.begin(), bids.end());
      std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(supply_), scratch.end(),
                       std::greater<>());
      next = scratch[supply_];
    }
    return static_cast<double>(winners) * std::max(price_, next);
  }

  std::string describe() const {
    switch (kind_) {
      case MechanismKind::posted_price:
        return "posted:" + format_number(price_) + "," + std::to_string(supply_);
      case MechanismKind::vcg:
        return "vcg:" + std::to_string(supply_) + "," + format_number(price_);
      case MechanismKind::myerson_multiunit:
        return "myerson:" + std::to_string(supply_) + " (reserve " + format_number(price_) + ")";
      case MechanismKind::utility_optimal_single:
        return "opt-single (reserve " + format_number(price_) + ")";
    }
    return {};
  }

 private:
  Mechanism(MechanismKind kind, double price, std::size_t k) : kind_(kind), price_(price), supply_(k) {}

  static void validate(double price, std::size_t k) {
    if (k < 1) throw std::invalid_argument("supply must be at least 1");
    if (!(price >= 0.0) || !std::isfinite(price)) throw std::invalid_argument("price must be finite and non-negative");
  }

  MechanismKind kind_;
  double price_;
  std::size_t supply_;
};

namespace detail {

inline void require_regular(const Distribution& d) {
  if (!is_regular(d)) throw std::invalid_argument("Hedge prices are defined only for regular distributions");
}

}  // namespace detail

/// Discounted price p* q* for unlimited supply.
inline double hedge_unlimited_price(const Distribution& d) {
  detail::require_regular(d);
  const auto m = monopoly_price(d);
  return m.price * m.sale_prob;
}

/// Per-bidder winning probability E[min(k, X)] / n with X ~ Binomial(n, q_r).
inline double allocation_probability(std::size_t n, std::size_t k, double q_r) {
  if (k < 1 || k > n) throw std::invalid_argument("allocation_probability needs 1 <= k <= n");
  if (!(q_r >= 0.0 && q_r <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
  if (k == n) return q_r;
  const auto pmf = numeric::binomial_pmf(n, q_r);
  double expected = 0.0;
  for (std::size_t x = 0; x <= n; ++x) expected += static_cast<double>(std::min(k, x)) * pmf[x];
  return expected / static_cast<double>(n);
}

/// Intermediate quantities of the limited-supply Hedge price.
struct HedgeLimitedPrice {
  double reserve;           // r = p* q*
  double reserve_sale_prob; // q_r = Pr[V >= r]
  double allocation_prob;   // q = E[min(k, X)] / n
  double price;             // F^{-1}(1 - q)
};

inline HedgeLimitedPrice hedge_limited_details(const Distribution& d, std::size_t n, std::size_t k) {
  if (k < 1 || k > n) throw std::invalid_argument("Hedge needs 1 <= k <= n");
  HedgeLimitedPrice h{};
  h.reserve = hedge_unlimited_price(d);
  h.reserve_sale_prob = d.sale_prob(h.reserve);
  h.allocation_prob = allocation_probability(n, k, h.reserve_sale_prob);
  h.price = d.price_at(h.allocation_prob);
  return h;
}

inline double hedge_limited_price(const Distribution& d, std::size_t n, std::size_t k) {
  return hedge_limited_details(d, n, k).price;
}

enum class MechanismRecipe { hedge, vcg, myerson_multiunit, utility_optimal_single };

/// Builds a mechanism from a recipe: Hedge posted price, VCG with reserve
/// `reserve`, VCG with the monopoly reserve p*, or the single-item second
/// price auction with the utility-optimal reserve.
inline Mechanism make_mechanism(MechanismRecipe recipe, const Distribution& d, const UtilityFunction* u,
                                std::size_t n, std::size_t k, double reserve = 0.0) {
  switch (recipe) {
    case MechanismRecipe::hedge:
      if (k >= n) return Mechanism::posted_price(hedge_unlimited_price(d), k);
      return Mechanism::posted_price(hedge_limited_price(d, n, k), k);
    case MechanismRecipe::vcg:
      return Mechanism::vcg(k, reserve);
    case MechanismRecipe::myerson_multiunit:
      return Mechanism::myerson_multiunit(k, monopoly_price(d).price);
    case MechanismRecipe::utility_optimal_single:
      if (u == nullptr) throw std::invalid_argument("utility-optimal mechanism needs a utility");
      return Mechanism::utility_optimal_single(optimal_reserve(d, *u));
  }
  throw std::invalid_argument("unknown mechanism recipe");
}

}  // namespace riskaverse

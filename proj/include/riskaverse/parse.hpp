#pragma once

// Text forms for distributions, utilities and mechanisms:
//   uniform:a,b | exponential:rate | left-triangle:eps | irregular-example:eps
//   | revenue-curve:q1:R1;q2:R2;...
//   linear | power:alpha | capped:eps | family:default | family:<spec>;<spec>;...
//   posted:p,k | vcg:k,r | hedge:n,k | myerson:k | opt-single:<utility>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "riskaverse/distribution.hpp"
#include "riskaverse/mechanism.hpp"
#include "riskaverse/utility.hpp"

namespace riskaverse {

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace parse_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return parts;
}

// Splits "head:rest" at the first colon; rest is empty when there is none.
inline std::pair<std::string_view, std::optional<std::string_view>> head(std::string_view s) {
  s = trim(s);
  const auto pos = s.find(':');
  if (pos == std::string_view::npos) return {s, std::nullopt};
  return {s.substr(0, pos), s.substr(pos + 1)};
}

}  // namespace parse_detail

inline double parse_real(std::string_view s) {
  s = parse_detail::trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::size_t parse_count(std::string_view s) {
  s = parse_detail::trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

namespace parse_detail {

inline std::vector<double> reals(std::optional<std::string_view> args, std::size_t count, std::string_view what) {
  if (!args) throw ParseError(std::string(what) + " needs " + std::to_string(count) + " parameter(s)");
  const auto parts = split(*args, ',');
  if (parts.size() != count) {
    throw ParseError(std::string(what) + " needs " + std::to_string(count) + " parameter(s)");
  }
  std::vector<double> out;
  for (auto p : parts) out.push_back(parse_real(p));
  return out;
}

// Runs a factory, reporting its argument errors as parse errors.
template <class F>
auto build(std::string_view spec, F&& make) {
  try {
    return make();
  } catch (const ParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ParseError("invalid spec '" + std::string(spec) + "': " + e.what());
  }
}

}  // namespace parse_detail

inline Distribution parse_distribution(std::string_view spec) {
  using namespace parse_detail;
  const auto [name, args] = head(spec);
  return build(spec, [&, name = name, args = args] {
    if (name == "uniform") {
      const auto v = reals(args, 2, name);
      return Distribution::uniform(v[0], v[1]);
    }
    if (name == "exponential") return Distribution::exponential(reals(args, 1, name)[0]);
    if (name == "left-triangle") return Distribution::left_triangle(reals(args, 1, name)[0]);
    if (name == "irregular-example") return Distribution::irregular_example(reals(args, 1, name)[0]);
    if (name == "revenue-curve") {
      if (!args || trim(*args).empty()) throw ParseError("revenue-curve needs points q:R;q:R;...");
      std::vector<CurvePoint> pts;
      for (auto item : split(*args, ';')) {
        const auto qr = split(item, ':');
        if (qr.size() != 2) throw ParseError("revenue-curve point must be q:R, got '" + std::string(item) + "'");
        pts.push_back({parse_real(qr[0]), parse_real(qr[1])});
      }
      return Distribution::from_curve(RevenueCurve(std::move(pts)));
    }
    throw ParseError("unknown distribution '" + std::string(name) + "'");
  });
}

inline UtilityFunction parse_utility(std::string_view spec) {
  using namespace parse_detail;
  const auto [name, args] = head(spec);
  return build(spec, [&, name = name, args = args] {
    if (name == "linear") {
      if (args) throw ParseError("linear takes no parameters");
      return UtilityFunction::linear();
    }
    if (name == "power") return UtilityFunction::power(reals(args, 1, name)[0]);
    if (name == "capped") return UtilityFunction::capped(reals(args, 1, name)[0]);
    throw ParseError("unknown utility '" + std::string(name) + "'");
  });
}

/// A single utility spec yields a one-member family.
inline UtilityFamily parse_family(std::string_view spec) {
  using namespace parse_detail;
  const auto [name, args] = head(spec);
  if (name != "family") return UtilityFamily{{parse_utility(spec)}};
  if (!args || trim(*args).empty()) throw ParseError("family needs 'default' or a ';'-separated list");
  if (trim(*args) == "default") return UtilityFamily::default_family();
  UtilityFamily fam;
  for (auto item : split(*args, ';')) fam.members.push_back(parse_utility(item));
  return fam;
}

enum class MechanismSpecKind { posted, vcg, hedge, myerson, opt_single };

/// Parsed mechanism spec; hedge, myerson and opt-single need a
/// distribution to become a Mechanism.
struct MechanismSpec {
  MechanismSpecKind kind = MechanismSpecKind::posted;
  double price = 0.0;        // posted price or VCG reserve
  std::size_t supply = 1;    // k
  std::size_t bidders = 0;   // hedge only
  std::optional<UtilityFunction> utility;  // opt-single only

  Mechanism resolve(const Distribution& d) const {
    switch (kind) {
      case MechanismSpecKind::posted:
        return Mechanism::posted_price(price, supply);
      case MechanismSpecKind::vcg:
        return Mechanism::vcg(supply, price);
      case MechanismSpecKind::hedge:
        return make_mechanism(MechanismRecipe::hedge, d, nullptr, bidders, supply);
      case MechanismSpecKind::myerson:
        return make_mechanism(MechanismRecipe::myerson_multiunit, d, nullptr, 0, supply);
      case MechanismSpecKind::opt_single:
        return make_mechanism(MechanismRecipe::utility_optimal_single, d, &*utility, 0, 1);
    }
    throw std::logic_error("unknown mechanism spec");
  }
};

inline MechanismSpec parse_mechanism(std::string_view spec) {
  using namespace parse_detail;
  const auto [name, args] = head(spec);
  MechanismSpec m;
  auto two = [&, args = args](std::string_view what) {
    if (!args) throw ParseError(std::string(what) + " needs 2 parameters");
    const auto parts = split(*args, ',');
    if (parts.size() != 2) throw ParseError(std::string(what) + " needs 2 parameters");
    return parts;
  };
  if (name == "posted") {
    const auto p = two(name);
    m.kind = MechanismSpecKind::posted;
    m.price = parse_real(p[0]);
    m.supply = parse_count(p[1]);
  } else if (name == "vcg") {
    const auto p = two(name);
    m.kind = MechanismSpecKind::vcg;
    m.supply = parse_count(p[0]);
    m.price = parse_real(p[1]);
  } else if (name == "hedge") {
    const auto p = two(name);
    m.kind = MechanismSpecKind::hedge;
    m.bidders = parse_count(p[0]);
    m.supply = parse_count(p[1]);
    if (m.supply < 1 || m.supply > m.bidders) throw ParseError("hedge needs 1 <= k <= n");
  } else if (name == "myerson") {
    if (!args) throw ParseError("myerson needs k");
    m.kind = MechanismSpecKind::myerson;
    m.supply = parse_count(*args);
  } else if (name == "opt-single") {
    if (!args) throw ParseError("opt-single needs a utility spec");
    m.kind = MechanismSpecKind::opt_single;
    m.utility = parse_utility(*args);
  } else {
    throw ParseError("unknown mechanism '" + std::string(name) + "'");
  }
  if (m.supply < 1) throw ParseError("supply must be at least 1");
  if (!(m.price >= 0.0) || !std::isfinite(m.price)) throw ParseError("price must be finite and non-negative");
  return m;
}

}  // namespace riskaverse

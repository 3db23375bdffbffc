#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskshare/basket.hpp"
#include "riskshare/market.hpp"

namespace riskshare::cli {

inline constexpr const char* kMarketSchema = "riskshare.market/1";

struct SolverParameters {
  double kappa = 10.0;
  double damping = 0.5;
  double tol = 1e-12;
  std::size_t max_iter = 10000;
  std::uint64_t seed = 1;
};

/// Market file contents after validation. Agent payoffs and securities are
/// kept as parsed so the echo reproduces them exactly.
struct MarketFile {
  struct AgentEntry {
    double gamma;
    std::vector<double> payoffs;
  };

  std::vector<double> probs;
  std::vector<AgentEntry> agents;
  std::optional<std::vector<std::vector<double>>> securities;
  SolverParameters parameters;

  Market market() const;
  /// Throws ValidationError naming `securities` when the file has none.
  SecurityBasket basket() const;
  bool has_securities() const { return securities.has_value(); }

  /// The file as it would be re-ingested: schema, probs, agents, optional
  /// securities and every solver parameter with its effective value.
  nlohmann::ordered_json echo() const;
};

/// Parses and validates market JSON. Syntax errors name line and column,
/// semantic errors name the offending field path (e.g. agents[1].gamma).
/// `source` prefixes every message.
MarketFile parse_market(const std::string& text, const std::string& source = "<market>");
MarketFile load_market(const std::string& path);

}  // namespace riskshare::cli

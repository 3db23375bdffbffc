#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "riskshare/basket.hpp"
#include "riskshare/market.hpp"

namespace riskshare::experiments {

using Rng = std::mt19937_64;

/// Bounds every generated market sequence must respect:
/// L2 norm of each endowment <= norm_bound, gamma_lo <= gamma_i <= gamma_hi.
struct AgentSequenceSpec {
  enum class Shape { centered_gaussian, constant };

  double norm_bound = 1.0;
  double gamma_lo = 0.5;
  double gamma_hi = 2.0;
  std::vector<std::size_t> sizes{2, 5, 10, 20, 50, 100, 200};
  std::uint64_t seed = 1;
  std::size_t states = 8;
  std::size_t securities = 2;
  Shape shape = Shape::centered_gaussian;

  void validate() const;
};

/// Nested markets: the market of size n is the first n agents of one long
/// draw, so growing n only ever adds agents.
class MarketSequence {
 public:
  explicit MarketSequence(AgentSequenceSpec spec);

  const AgentSequenceSpec& spec() const { return spec_; }
  std::size_t max_size() const { return agents_.size(); }

  /// Checks the spec bounds on every agent before returning.
  Market market(std::size_t n) const;
  /// One basket of uncorrelated unit-variance securities shared by every
  /// market of the sequence.
  const SecurityBasket& basket() const { return basket_; }

 private:
  AgentSequenceSpec spec_;
  std::vector<Agent> agents_;
  SecurityBasket basket_;
};

struct RandomMarketOptions {
  std::size_t agents = 2;
  std::size_t states = 5;
  double gamma_lo = 0.3;
  double gamma_hi = 3.0;
  bool homogeneous = false;
  double endowment_scale = 1.0;
  double mean_scale = 1.0;
};

/// Random probabilities, gammas and endowments with non-zero means. Agents
/// have linearly independent endowments whenever states > agents.
Market random_market(Rng& rng, const RandomMarketOptions& options);

/// k random securities on the space, redrawn until well conditioned.
SecurityBasket random_basket(Rng& rng, const SpacePtr& space, std::size_t k);

/// Two payoffs on three equally likely states with the requested variances
/// and correlation, both centered.
std::pair<Rv, Rv> moment_pair_endowments(double var1, double var2, double rho);

/// n agents with common gamma and uncorrelated, centered, unit-variance
/// endowments on n + 1 equally likely states.
Market uncorrelated_unit_market(std::size_t n, double gamma = 1.0);

}  // namespace riskshare::experiments

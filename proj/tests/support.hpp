#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "riskshare/generators.hpp"
#include "riskshare/basket.hpp"
#include "riskshare/market.hpp"

namespace riskshare::testing {

inline SpacePtr coin() { return ProbSpace::uniform(2); }

inline Rv rv(const SpacePtr& space, std::vector<double> payoffs) { return Rv(space, payoffs); }

// gamma = (1, 1), E_1 = (1, -1), E_2 = (-1, 1) on a fair coin.
inline Market opposed_pair() {
  const auto s = coin();
  return Market({{1.0, rv(s, {1.0, -1.0})}, {1.0, rv(s, {-1.0, 1.0})}});
}

inline double centered_distance(const Rv& x, const Rv& y) { return std::sqrt(std::max(0.0, var(x - y))); }

inline experiments::RandomMarketOptions small_market(std::size_t agents, std::size_t states) {
  experiments::RandomMarketOptions o;
  o.agents = agents;
  o.states = states;
  return o;
}

// Small market with a basket, sized within n <= 4, m <= 6, k <= 3.
struct SmallInstance {
  Market market;
  SecurityBasket basket;
};

inline SmallInstance small_instance(experiments::Rng& rng) {
  std::uniform_int_distribution<std::size_t> agents(2, 4);
  std::uniform_int_distribution<std::size_t> states(3, 6);
  auto options = small_market(agents(rng), states(rng));
  options.gamma_lo = 0.5;
  options.gamma_hi = 2.0;
  Market market = experiments::random_market(rng, options);
  std::uniform_int_distribution<std::size_t> securities(1, std::min<std::size_t>(3, options.states - 1));
  SecurityBasket basket = experiments::random_basket(rng, market.space_ptr(), securities(rng));
  return {std::move(market), std::move(basket)};
}

// Price at which an agent demands the given units: inverts the demand schedule.
inline Eigen::VectorXd price_for_units(double gamma, const Rv& endowment, const SecurityBasket& basket,
                                       const Eigen::VectorXd& units) {
  return basket.expected() - 2.0 * gamma * (basket.covariance() * units + basket.cov_with(endowment));
}

}  // namespace riskshare::testing

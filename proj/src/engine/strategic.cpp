#include "riskshare/strategic.hpp"

#include <algorithm>
#include <cmath>

#include "riskshare/errors.hpp"
#include "riskshare/pareto.hpp"

namespace riskshare::strategic {

namespace {

void check_index(const Market& market, std::size_t i) {
  if (i >= market.size()) {
    throw ValidationError("agent index " + std::to_string(i) + " out of range for " +
                          std::to_string(market.size()) + " agents");
  }
}

// gamma^2 / (gamma_i^2 - gamma^2), positive for n >= 2.
double others_weight(const Market& market, std::size_t i) {
  const double g = market.aggregate_gamma();
  const double gi = market.gamma(i);
  return g * g / ((gi - g) * (gi + g));
}

double own_weight(const Market& market, std::size_t i) {
  const double gi = market.gamma(i);
  return gi / (gi + market.aggregate_gamma());
}

}  // namespace

double reported_utility(const Market& market, std::size_t i, const Rv& report) {
  check_index(market, i);
  const Market reported = market.with_endowment(i, report);
  const auto sharing = pareto::optimal_sharing(reported);
  const Eigen::VectorXd prices = pareto::endowment_prices_unchecked(reported);
  const double cash = sharing.weights.row(static_cast<Eigen::Index>(i)).dot(prices);
  return mv_utility(market.gamma(i), market.endowment(i) + sharing.contracts[i]) - cash;
}

Rv best_endowment_response(const Market& market, std::size_t i) {
  check_index(market, i);
  const Rv b = own_weight(market, i) * market.endowment(i) + others_weight(market, i) * market.endowment_minus(i);
  return b.centered();
}

ResponseReport<Rv> endowment_response_report(const Market& market, std::size_t i) {
  Rv b = best_endowment_response(market, i);
  const double before = reported_utility(market, i, market.endowment(i));
  const double after = reported_utility(market, i, b);
  return {std::move(b), before, after};
}

double best_percentage_response(const Market& market, std::size_t i) {
  check_index(market, i);
  const Rv& own = market.endowment(i);
  const double own_var = var(own);
  if (!(own_var > 0.0)) {
    throw PreconditionError("best percentage response: endowment of agent " + std::to_string(i) + " is constant");
  }
  // rho(E_i,E_{-i}) sqrt(Var E_{-i} / Var E_i) = Cov(E_i, E_{-i}) / Var E_i
  const double slope = cov(own, market.endowment_minus(i)) / own_var;
  return std::max(0.0, own_weight(market, i) + others_weight(market, i) * slope);
}

ResponseReport<double> percentage_response_report(const Market& market, std::size_t i) {
  const double b = best_percentage_response(market, i);
  const double before = reported_utility(market, i, market.endowment(i));
  const double after = reported_utility(market, i, b * market.endowment(i));
  return {b, before, after};
}

EffectiveEndowmentChange effective_endowment_change(const Market& market, std::size_t i) {
  check_index(market, i);
  const double g = market.aggregate_gamma();
  return {-g / (market.gamma(i) + g), others_weight(market, i)};
}

double price_objective(const Market& market, std::size_t i, const SecurityBasket& basket,
                       std::span<const DemandSchedule> others, const Eigen::VectorXd& price) {
  check_index(market, i);
  Eigen::VectorXd others_demand = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basket.size()));
  for (const auto& z : others) others_demand += z.evaluate(basket, price);
  return mv_utility(market.gamma(i), market.endowment(i) - basket.portfolio(others_demand)) +
         others_demand.dot(price);
}

Eigen::VectorXd best_price_response(const Market& market, std::size_t i, const SecurityBasket& basket,
                                    std::span<const DemandSchedule> others) {
  check_index(market, i);
  if (others.size() + 1 != market.size()) {
    throw ValidationError("best price response expects the schedules of the other " +
                          std::to_string(market.size() - 1) + " agents");
  }
  std::size_t slot = 0;
  for (std::size_t j = 0; j < market.size(); ++j) {
    if (j == i) continue;
    const auto& z = others[slot++];
    const Eigen::VectorXd truthful = basket.cov_with(market.endowment(j));
    const double scale = 1.0 + truthful.lpNorm<Eigen::Infinity>();
    if (std::abs(z.gamma - market.gamma(j)) > 1e-12 * market.gamma(j) ||
        (z.c - truthful).lpNorm<Eigen::Infinity>() > 1e-9 * scale) {
      throw ValidationError("best price response: schedule of agent " + std::to_string(j) +
                            " is not truthful; use nash::best_price_given_schedules for arbitrary schedules");
    }
  }
  const double g = market.aggregate_gamma();
  const double gi = market.gamma(i);
  const Rv effective = own_weight(market, i) * market.endowment(i) +
                       (gi * gi / ((gi - g) * (gi + g))) * market.endowment_minus(i);
  return basket.expected() - 2.0 * g * basket.cov_with(effective);
}

DemandSchedule best_demand_response(const Market& market, std::size_t i, const SecurityBasket& basket) {
  return {market.gamma(i), basket.cov_with(best_endowment_response(market, i))};
}

std::vector<DemandSchedule> others_of(std::span<const DemandSchedule> schedules, std::size_t i) {
  std::vector<DemandSchedule> out;
  out.reserve(schedules.size());
  for (std::size_t j = 0; j < schedules.size(); ++j) {
    if (j != i) out.push_back(schedules[j]);
  }
  return out;
}

}  // namespace riskshare::strategic

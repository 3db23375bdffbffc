#include "riskshare/nash.hpp"

#include <algorithm>
#include <cmath>

#include "riskshare/errors.hpp"
#include "riskshare/pareto.hpp"
#include "riskshare/strategic.hpp"

namespace riskshare::nash {

namespace {

double centered_norm(const Rv& x, const Rv& y) { return std::sqrt(std::max(0.0, var(x - y))); }

}  // namespace

double equilibrium_denominator(const Market& market) {
  const double g = market.aggregate_gamma();
  double s = 0.0;
  for (const auto& a : market.agents()) s += (g / a.gamma) * (g / a.gamma);
  const double d = 1.0 - s;
  if (!(d > 0.0)) throw PreconditionError("Nash equilibrium denominator 1 - sum (gamma/gamma_i)^2 is not positive");
  return d;
}

NashEndowmentOutcome nash_endowment(const Market& market) {
  const auto n = market.size();
  const double g = market.aggregate_gamma();
  const double denom = equilibrium_denominator(market);

  Rv weighted = Rv::zero(market.space_ptr());
  for (const auto& a : market.agents()) weighted += a.endowment / a.gamma;
  Rv aggregate = (market.aggregate_endowment() - g * weighted) / denom;

  std::vector<Rv> reported;
  std::vector<Rv> contracts;
  reported.reserve(n);
  contracts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = market.gamma(i);
    const double gm = market.gamma_minus(i);
    const double w = gm / (gi + gm);
    reported.push_back((gi / (gi + gm)) * market.endowment(i) + (w * w) * aggregate);
    contracts.push_back((g / gi) * aggregate - reported.back());
  }

  double inefficiency = -g * var(market.aggregate_endowment() - aggregate);
  for (std::size_t i = 0; i < n; ++i) inefficiency += market.gamma(i) * var(market.endowment(i) - reported[i]);

  Eigen::VectorXd gains(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rv> view = reported;
    view[i] = market.endowment(i);
    const Market others_reporting = market.with_endowments(std::move(view));
    gains[static_cast<Eigen::Index>(i)] = strategic::reported_utility(others_reporting, i, reported[i]) -
                                          mv_utility(market.gamma(i), market.endowment(i));
  }

  return {std::move(reported), std::move(aggregate), std::move(contracts), inefficiency, std::move(gains)};
}

double realized_inefficiency(const Market& market, const NashEndowmentOutcome& outcome) {
  const auto sharing = pareto::optimal_sharing(market);
  double total = 0.0;
  for (std::size_t i = 0; i < market.size(); ++i) {
    const double gi = market.gamma(i);
    total += mv_utility(gi, market.endowment(i) + sharing.contracts[i]) -
             mv_utility(gi, market.endowment(i) + outcome.contracts[i]);
  }
  return total;
}

double TwoAgentComparison::max_discrepancy() const {
  double worst = 0.0;
  for (const RvRow* row : {&aggregate_shared, &reported, &contract}) {
    worst = std::max({worst, centered_norm(row->pareto_engine, row->pareto_closed),
                      centered_norm(row->nash_engine, row->nash_closed)});
  }
  for (const ScalarRow* row : {&gain, &inefficiency}) {
    worst = std::max({worst, std::abs(row->pareto_engine - row->pareto_closed),
                      std::abs(row->nash_engine - row->nash_closed)});
  }
  return worst;
}

TwoAgentComparison two_agent_comparison(const Market& market) {
  if (market.size() != 2) throw ValidationError("two-agent comparison needs exactly two agents");
  const double g1 = market.gamma(0);
  const double g2 = market.gamma(1);
  const double g = market.aggregate_gamma();
  const Rv& e1 = market.endowment(0);
  const Rv& e2 = market.endowment(1);

  const auto sharing = pareto::optimal_sharing(market);
  const auto levels = pareto::optimal_utility_levels(market);
  const auto nash = nash_endowment(market);
  const double u1 = mv_utility(g1, e1);

  double pareto_realized = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    pareto_realized += mv_utility(market.gamma(i), market.endowment(i) + sharing.contracts[i]);
  }

  const Rv spread = (g1 * e1 - g2 * e2) / (g1 + g2);
  const Rv half_spread = (g1 * e1 - g2 * e2) / 2.0;

  return TwoAgentComparison{
      .aggregate_shared = {market.aggregate_endowment(), e1 + e2, nash.aggregate, (g1 * e1 + g2 * e2) / (2.0 * g)},
      .reported = {e1, e1, nash.reported[0],
                   ((2.0 * g1 + g2) / (2.0 * (g1 + g2))) * e1 + (g2 * g2 / (2.0 * g1 * (g1 + g2))) * e2},
      .contract = {sharing.contracts[0], -spread, nash.contracts[0], -0.5 * spread},
      .gain = {levels[0] - u1, g1 * var(spread), nash.per_agent_gain[0], (g1 + 2.0 * g2) / 4.0 * var(spread)},
      .inefficiency = {pareto::representative_utility(market) - pareto_realized, 0.0, nash.inefficiency,
                       var(half_spread) / (g1 + g2)},
  };
}

double percentage_best_reply(const Market& market, std::size_t i, const Eigen::VectorXd& b, double kappa) {
  std::vector<Rv> view;
  view.reserve(market.size());
  for (std::size_t j = 0; j < market.size(); ++j) {
    view.push_back(j == i ? market.endowment(j) : b[static_cast<Eigen::Index>(j)] * market.endowment(j));
  }
  return std::min(kappa, strategic::best_percentage_response(market.with_endowments(std::move(view)), i));
}

NashPercentageOutcome nash_percentage(const Market& market, const PercentageParams& params) {
  if (!(params.kappa > 0.0)) throw ValidationError("kappa must be > 0");
  if (!(params.damping > 0.0 && params.damping <= 1.0)) throw ValidationError("damping must lie in (0, 1]");
  if (!(params.tol > 0.0)) throw ValidationError("tol must be > 0");
  if (params.max_iter == 0) throw ValidationError("max_iter must be >= 1");
  for (std::size_t i = 0; i < market.size(); ++i) {
    if (!(var(market.endowment(i)) > 0.0)) {
      throw PreconditionError("percentage game: endowment of agent " + std::to_string(i) + " is constant");
    }
  }

  const auto n = static_cast<Eigen::Index>(market.size());
  Eigen::VectorXd b = Eigen::VectorXd::Constant(n, std::min(1.0, params.kappa));
  Eigen::VectorXd reply(n);
  double residual = 0.0;
  for (std::size_t it = 1; it <= params.max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      reply[i] = percentage_best_reply(market, static_cast<std::size_t>(i), b, params.kappa);
    }
    residual = (reply - b).lpNorm<Eigen::Infinity>();
    if (residual < params.tol) return {b, params.kappa, it, true, residual};
    b = (1.0 - params.damping) * b + params.damping * reply;
  }
  return {b, params.kappa, params.max_iter, false, residual};
}

Eigen::VectorXd percentage_gains(const Market& market, const Eigen::VectorXd& b) {
  const auto n = market.size();
  if (static_cast<std::size_t>(b.size()) != n) throw ValidationError("percentage vector length does not match agents");
  Eigen::VectorXd gains(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rv> view;
    view.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      view.push_back(j == i ? market.endowment(j) : b[static_cast<Eigen::Index>(j)] * market.endowment(j));
    }
    const Market others_reporting = market.with_endowments(std::move(view));
    gains[static_cast<Eigen::Index>(i)] =
        strategic::reported_utility(others_reporting, i, b[static_cast<Eigen::Index>(i)] * market.endowment(i)) -
        mv_utility(market.gamma(i), market.endowment(i));
  }
  return gains;
}

NashPriceOutcome nash_price(const Market& market, const SecurityBasket& basket) {
  const auto nash = nash_endowment(market);
  const double g = market.aggregate_gamma();
  const auto n = static_cast<Eigen::Index>(market.size());

  NashPriceOutcome out;
  out.price = basket.expected() - 2.0 * g * basket.cov_with(nash.aggregate);
  out.allocation.resize(n, static_cast<Eigen::Index>(basket.size()));
  out.schedules.reserve(market.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out.schedules.push_back({market.gamma(idx), basket.cov_with(nash.reported[idx])});
    out.allocation.row(i) = out.schedules.back().evaluate(basket, out.price).transpose();
  }
  out.pressure = basket.cov_with(market.aggregate_endowment() - nash.aggregate);
  return out;
}

Eigen::VectorXd best_price_given_schedules(const Market& market, std::size_t i, const SecurityBasket& basket,
                                          std::span<const DemandSchedule> others) {
  if (i >= market.size()) throw ValidationError("agent index out of range");
  if (others.empty()) throw ValidationError("best price needs at least one other schedule");
  const double gi = market.gamma(i);
  double inv = 1.0 / gi;
  Eigen::VectorXd others_c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basket.size()));
  for (const auto& z : others) {
    if (!(z.gamma > 0.0)) throw ValidationError("schedule risk aversion must be > 0");
    inv += 1.0 / z.gamma;
    others_c += z.c;
  }
  const double g = 1.0 / inv;
  const Eigen::VectorXd own_c = basket.cov_with(market.endowment(i));
  return basket.expected() - 2.0 * g * ((gi / (gi + g)) * own_c + (gi * gi / ((gi - g) * (gi + g))) * others_c);
}

UtilityComparison nash_vs_pareto_utilities(const Market& market, const SecurityBasket& basket) {
  const auto n = market.size();
  const auto pareto_eq = pareto::capm_equilibrium(market, basket);
  const auto nash_eq = nash_price(market, basket);

  UtilityComparison out;
  out.pareto_utilities.resize(static_cast<Eigen::Index>(n));
  out.nash_utilities.resize(static_cast<Eigen::Index>(n));
  out.aggregate_decrease_direct = 0.0;
  out.aggregate_decrease_formula = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double gi = market.gamma(i);
    const Rv& ei = market.endowment(i);
    const Eigen::VectorXd z = demand(gi, ei, basket, pareto_eq.prices);
    const Eigen::VectorXd zh = nash_eq.allocation.row(r).transpose();
    out.pareto_utilities[r] = mv_utility(gi, ei + basket.portfolio(z)) - z.dot(pareto_eq.prices);
    out.nash_utilities[r] = mv_utility(gi, ei + basket.portfolio(zh)) - zh.dot(nash_eq.price);
    out.aggregate_decrease_direct +=
        mv_utility(gi, ei + basket.portfolio(z)) - mv_utility(gi, ei + basket.portfolio(zh));
    out.aggregate_decrease_formula +=
        gi * (zh - z).dot(basket.covariance() * (zh + z) + 2.0 * basket.cov_with(ei));
  }
  if (n == 2 && basket.size() == 1 && std::abs(basket.covariance()(0, 0) - 1.0) <= 1e-12) {
    out.closed_form_nash_utility = two_agent_nash_utility_closed_form(market, basket);
  }
  return out;
}

double two_agent_nash_utility_closed_form(const Market& market, const SecurityBasket& basket) {
  if (market.size() != 2 || basket.size() != 1 || std::abs(basket.covariance()(0, 0) - 1.0) > 1e-12) {
    throw PreconditionError("closed-form Nash utility holds only for two agents and one unit-variance security");
  }
  const double g1 = market.gamma(0);
  const double g2 = market.gamma(1);
  const auto sharing = pareto::optimal_sharing(market);
  const double c = cov(basket.security(0), sharing.contracts[0]);
  const double pareto_level = pareto::capm_equilibrium(market, basket).utility_levels[0];
  return pareto_level + (g2 / 2.0 - 0.75 * g1) * c * c;
}

double span_residual_variance(const SecurityBasket& basket, const Rv& x) {
  return std::max(0.0, var(x) - basket.inverse_quadratic_form(basket.cov_with(x)));
}

double excess_return_check(const Market& market, const SecurityBasket& basket, const Rv& payoff) {
  auto require_in_span = [&](const Rv& x, const std::string& what) {
    if (span_residual_variance(basket, x) > 1e-20 + 1e-12 * var(x)) {
      throw PreconditionError(what + " is not in the span of the securities and the constant");
    }
  };
  for (std::size_t i = 0; i < market.size(); ++i) require_in_span(market.endowment(i), "endowment " + std::to_string(i));
  require_in_span(payoff, "payoff");

  const double g = market.aggregate_gamma();
  const Rv aggregate = nash_endowment(market).aggregate;
  auto price = [&](const Rv& y) { return mean(y) - 2.0 * g * cov(y, aggregate); };
  const double px = price(payoff);
  const double pb = price(aggregate);
  if (std::abs(px) < 1e-12 || std::abs(pb) < 1e-12) throw PreconditionError("excess return undefined at a zero price");
  const double var_b = var(aggregate);
  if (!(var_b > 0.0)) throw PreconditionError("excess return beta undefined: shared aggregate is constant");

  const double expected_rx = mean(payoff) / px - 1.0;
  const double expected_rb = mean(aggregate) / pb - 1.0;
  const double cov_rx_rb = cov(payoff, aggregate) / (px * pb);
  const double var_rb = var_b / (pb * pb);
  return std::abs(expected_rx - cov_rx_rb / var_rb * expected_rb);
}

}  // namespace riskshare::nash

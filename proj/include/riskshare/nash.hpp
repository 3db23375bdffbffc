#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "riskshare/basket.hpp"
#include "riskshare/market.hpp"

namespace riskshare::nash {

/// Nash equilibrium of the endowment-reporting game (closed form).
struct NashEndowmentOutcome {
  std::vector<Rv> reported;        // B*_i
  Rv aggregate;                    // shared aggregate B* = sum_i B*_i
  std::vector<Rv> contracts;       // C*_i(B*_i)
  double inefficiency;             // sum gamma_i Var[E_i - B*_i] - gamma Var[E - B*]
  Eigen::VectorXd per_agent_gain;  // G_i(B*_i; B*_{-i}) - U_i(E_i)
};

/// 1 - sum_i (gamma/gamma_i)^2, strictly positive for every valid market.
double equilibrium_denominator(const Market& market);

NashEndowmentOutcome nash_endowment(const Market& market);

/// sum_i U_i(E_i + C*_i) - sum_i U_i(E_i + C_i(B*_i)), by direct evaluation.
double realized_inefficiency(const Market& market, const NashEndowmentOutcome& outcome);

/// Two-agent comparison of Pareto and Nash sharing for agent 1 (index 0).
/// Every cell holds the engine value and the closed form side by side.
struct TwoAgentComparison {
  struct RvRow {
    Rv pareto_engine, pareto_closed, nash_engine, nash_closed;
  };
  struct ScalarRow {
    double pareto_engine, pareto_closed, nash_engine, nash_closed;
  };
  RvRow aggregate_shared;
  RvRow reported;
  RvRow contract;
  ScalarRow gain;
  ScalarRow inefficiency;

  /// Largest engine-vs-closed-form gap: standard deviation of the difference
  /// for payoff rows, absolute difference for scalar rows.
  double max_discrepancy() const;
};

/// Throws ValidationError unless the market has exactly two agents.
TwoAgentComparison two_agent_comparison(const Market& market);

struct PercentageParams {
  double kappa = 10.0;
  double damping = 0.5;
  double tol = 1e-12;
  std::size_t max_iter = 10000;
};

struct NashPercentageOutcome {
  Eigen::VectorXd b_star;
  double kappa;
  std::size_t iterations;
  bool converged;
  double residual;  // max_i |b_i - clamp(BR_i(b_{-i}), 0, kappa)|
};

/// Clamped best percentage response of agent i when the others report
/// b_j E_j: max(0, gamma_i/(gamma_i+gamma) + gamma^2/(gamma_i^2-gamma^2)
/// Cov(E_i, sum_{j!=i} b_j E_j)/Var E_i), capped at kappa.
double percentage_best_reply(const Market& market, std::size_t i, const Eigen::VectorXd& b, double kappa);

/// Damped iteration b <- (1-damping) b + damping clamp(BR(b), 0, kappa),
/// started from truthful reports b = 1. Non-convergence is reported in the
/// outcome, never thrown. Throws PreconditionError for a constant endowment
/// and ValidationError for bad parameters.
NashPercentageOutcome nash_percentage(const Market& market, const PercentageParams& params = {});

/// G_i(b_i E_i; (b_j E_j)_{j != i}) - U_i(E_i) for every agent.
Eigen::VectorXd percentage_gains(const Market& market, const Eigen::VectorXd& b);

/// Nash equilibrium of the price-demand game on a basket.
struct NashPriceOutcome {
  Eigen::VectorXd price;                  // p_hat = E[C] - 2 gamma Cov(C, B*)
  std::vector<DemandSchedule> schedules;  // Z_hat_i, c = Cov(C, B*_i)
  Eigen::MatrixXd allocation;             // n x k, row i = Z_hat_i(p_hat)
  Eigen::VectorXd pressure;               // Cov(C_j, E - B*)
};

NashPriceOutcome nash_price(const Market& market, const SecurityBasket& basket);

/// Agent i's preferred clearing price against arbitrary reported schedules
/// of the others (any gammas, any covariance vectors):
///   p = E[C] - 2 g [gamma_i/(gamma_i+g) Cov(C,E_i) + gamma_i^2/(gamma_i^2-g^2) sum_j c_j]
/// where g aggregates gamma_i with the others' schedule gammas.
Eigen::VectorXd best_price_given_schedules(const Market& market, std::size_t i, const SecurityBasket& basket,
                                          std::span<const DemandSchedule> others);

struct UtilityComparison {
  Eigen::VectorXd pareto_utilities;  // U_i(E_i + Z_i(p*).C - Z_i(p*).p*)
  Eigen::VectorXd nash_utilities;    // U_i(E_i + Z_hat_i(p_hat).C - Z_hat_i(p_hat).p_hat)
  double aggregate_decrease_direct;  // sum U_i(E_i + Z_i.C) - sum U_i(E_i + Z_hat_i.C)
  double aggregate_decrease_formula;
  std::optional<double> closed_form_nash_utility;  // agent 1, only for n=2, k=1, Var[C]=1
};

UtilityComparison nash_vs_pareto_utilities(const Market& market, const SecurityBasket& basket);

/// Agent 1's Nash utility for n=2, k=1, Var[C]=1:
///   U_1^Pareto + (gamma_2/2 - 3 gamma_1/4) Cov^2(C, C*_1).
/// Throws PreconditionError outside that configuration.
double two_agent_nash_utility_closed_form(const Market& market, const SecurityBasket& basket);

/// |E[R_X] - Cov(R_X,R_B)/Var[R_B] E[R_B]| with R_Y = Y/pi(Y) - 1 and
/// pi(Y) = E[Y] - 2 gamma Cov(Y, B*), B* the Nash shared aggregate.
/// Requires every endowment and X in span{1, C}, and non-zero pi(X), pi(B*).
double excess_return_check(const Market& market, const SecurityBasket& basket, const Rv& payoff);

/// Variance of the residual of x after projection on span{1, C}.
double span_residual_variance(const SecurityBasket& basket, const Rv& x);

}  // namespace riskshare::nash

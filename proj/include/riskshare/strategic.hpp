#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "riskshare/basket.hpp"
#include "riskshare/market.hpp"

namespace riskshare::strategic {

/// Outcome of a single agent's deviation from truthful reporting.
template <class Response>
struct ResponseReport {
  Response response;
  double utility_before;  // utility of truthful play
  double utility_after;   // utility when the response is played
};

/// Utility of agent i when the optimal sharing mechanism and endowment
/// pricing are run on the reports (B for agent i, E_j of the market for
/// j != i) while agent i's true exposure stays E_i:
///   G_i(B) = U_i(E_i + C*_i(B)) - a*_i . p*_E(B).
/// The market's other endowments are read as the other agents' reports.
double reported_utility(const Market& market, std::size_t i, const Rv& report);

/// B*_i = gamma_i/(gamma_i+gamma) E_i + gamma^2/(gamma_i^2-gamma^2) E_{-i},
/// shifted to zero mean (the maximizer is unique up to constants).
Rv best_endowment_response(const Market& market, std::size_t i);
ResponseReport<Rv> endowment_response_report(const Market& market, std::size_t i);

/// Best non-negative multiple of the true endowment,
///   b*_i = max(0, gamma_i/(gamma_i+gamma)
///                 + gamma^2/(gamma_i^2-gamma^2) rho(E_i,E_{-i}) sqrt(Var E_{-i} / Var E_i)).
/// Throws PreconditionError when E_i is constant.
double best_percentage_response(const Market& market, std::size_t i);
ResponseReport<double> percentage_response_report(const Market& market, std::size_t i);

/// Relative changes of the effective endowment behind the best demand:
/// E_i is scaled by 1 + own, E_{-i} by 1 + others.
struct EffectiveEndowmentChange {
  double own;     // -gamma / (gamma_i + gamma)
  double others;  // gamma^2 / (gamma_i^2 - gamma^2)
};
EffectiveEndowmentChange effective_endowment_change(const Market& market, std::size_t i);

/// phi_i(p) = U_i(E_i - Z_others(p) . C) + Z_others(p) . p, the utility agent i
/// gets when the market clears at p against the others' aggregate schedule.
double price_objective(const Market& market, std::size_t i, const SecurityBasket& basket,
                       std::span<const DemandSchedule> others, const Eigen::VectorXd& price);

/// Clearing price most preferable to agent i against the truthful schedules
/// of the other agents (in index order, agent i skipped):
///   p_i = E[C] - 2 gamma Cov(C, gamma_i/(gamma_i+gamma) E_i + gamma_i^2/(gamma_i^2-gamma^2) E_{-i}).
/// Throws ValidationError if `others` are not the truthful schedules.
Eigen::VectorXd best_price_response(const Market& market, std::size_t i, const SecurityBasket& basket,
                                    std::span<const DemandSchedule> others);

/// Schedule agent i reports to make the market clear at its best price:
/// covariance vector Cov(C, B*_i).
DemandSchedule best_demand_response(const Market& market, std::size_t i, const SecurityBasket& basket);

/// Schedules of every agent except i, in index order.
std::vector<DemandSchedule> others_of(std::span<const DemandSchedule> schedules, std::size_t i);

}  // namespace riskshare::strategic

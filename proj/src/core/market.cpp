#include "riskshare/market.hpp"

#include <algorithm>
#include <cmath>

#include "riskshare/errors.hpp"

namespace riskshare {

namespace {

const std::vector<Agent>& validated(const std::vector<Agent>& agents) {
  if (agents.size() < 2) throw ValidationError("a market needs at least two agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const double g = agents[i].gamma;
    if (!std::isfinite(g) || g <= 0.0) {
      throw ValidationError("agent " + std::to_string(i) + ": risk aversion must be finite and > 0");
    }
    if (!agents[i].endowment.same_space(agents.front().endowment)) {
      throw ValidationError("agent " + std::to_string(i) + ": endowment lives on a different probability space");
    }
  }
  return agents;
}

double harmonic_aggregate(const std::vector<Agent>& agents) {
  double inv = 0.0;
  for (const auto& a : agents) inv += 1.0 / a.gamma;
  return 1.0 / inv;
}

Rv total_endowment(const std::vector<Agent>& agents) {
  Rv total = agents.front().endowment;
  for (std::size_t i = 1; i < agents.size(); ++i) total += agents[i].endowment;
  return total;
}

}  // namespace

Market::Market(std::vector<Agent> agents)
    : agents_(std::move(agents)),
      aggregate_gamma_(harmonic_aggregate(validated(agents_))),
      aggregate_endowment_(total_endowment(agents_)) {}

std::vector<double> Market::gammas() const {
  std::vector<double> out;
  out.reserve(agents_.size());
  for (const auto& a : agents_) out.push_back(a.gamma);
  return out;
}

std::vector<Rv> Market::endowments() const {
  std::vector<Rv> out;
  out.reserve(agents_.size());
  for (const auto& a : agents_) out.push_back(a.endowment);
  return out;
}

double Market::gamma_minus(std::size_t i) const {
  double inv = 0.0;
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    if (j != i) inv += 1.0 / agents_[j].gamma;
  }
  return 1.0 / inv;
}

Rv Market::endowment_minus(std::size_t i) const {
  // Summed directly rather than as E - E_i to avoid cancellation.
  Rv total = Rv::zero(space_ptr());
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    if (j != i) total += agents_[j].endowment;
  }
  return total;
}

Market Market::with_endowment(std::size_t i, Rv endowment) const {
  auto agents = agents_;
  agents.at(i).endowment = std::move(endowment);
  return Market(std::move(agents));
}

Market Market::with_endowments(std::vector<Rv> endowments) const {
  if (endowments.size() != agents_.size()) throw ValidationError("endowment count does not match agent count");
  auto agents = agents_;
  for (std::size_t i = 0; i < agents.size(); ++i) agents[i].endowment = std::move(endowments[i]);
  return Market(std::move(agents));
}

bool Market::homogeneous(double rel_tol) const {
  const double g0 = agents_.front().gamma;
  for (const auto& a : agents_) {
    if (std::abs(a.gamma - g0) > rel_tol * std::max(std::abs(g0), std::abs(a.gamma))) return false;
  }
  return true;
}

}  // namespace riskshare

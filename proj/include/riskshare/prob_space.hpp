#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace riskshare {

/// Finite state space with strictly positive probabilities summing to one.
class ProbSpace {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit ProbSpace(std::vector<double> probs);

  static std::shared_ptr<const ProbSpace> make(std::vector<double> probs);
  static std::shared_ptr<const ProbSpace> uniform(std::size_t states);

  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  const Eigen::VectorXd& probs() const { return probs_; }
  double prob(std::size_t state) const { return probs_[static_cast<Eigen::Index>(state)]; }

  bool operator==(const ProbSpace& other) const;

 private:
  Eigen::VectorXd probs_;
};

using SpacePtr = std::shared_ptr<const ProbSpace>;

}  // namespace riskshare

#include "riskshare/prob_space.hpp"

#include <cmath>
#include <sstream>

#include "riskshare/errors.hpp"

namespace riskshare {

ProbSpace::ProbSpace(std::vector<double> probs) {
  if (probs.empty()) throw ValidationError("probability space needs at least one state");
  double total = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    if (!std::isfinite(probs[s]) || probs[s] <= 0.0) {
      std::ostringstream msg;
      msg << "probability of state " << s << " must be > 0, got " << probs[s];
      throw ValidationError(msg.str());
    }
    total += probs[s];
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities must sum to 1 (within " << kSumTolerance << "), got " << total;
    throw ValidationError(msg.str());
  }
  probs_ = Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
}

std::shared_ptr<const ProbSpace> ProbSpace::make(std::vector<double> probs) {
  return std::make_shared<const ProbSpace>(std::move(probs));
}

std::shared_ptr<const ProbSpace> ProbSpace::uniform(std::size_t states) {
  if (states == 0) throw ValidationError("probability space needs at least one state");
  return make(std::vector<double>(states, 1.0 / static_cast<double>(states)));
}

bool ProbSpace::operator==(const ProbSpace& other) const {
  return probs_.size() == other.probs_.size() && probs_ == other.probs_;
}

}  // namespace riskshare

#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

// Derivative-free minimizers used by the oracle. None of them know anything
// about markets; they only see a scalar objective.
namespace riskshare::search {

using Objective1d = std::function<double(double)>;
using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Minimizer of a unimodal f on [lo, hi], bracket shrunk below tol.
double golden_section(const Objective1d& f, double lo, double hi, double tol = 1e-10);

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct CoordinateDescentOptions {
  double line_tol = 1e-9;
  double sweep_tol = 1e-7;   // stop once a full sweep moves no coordinate further
  std::size_t max_sweeps = 200;
};

/// Cyclic coordinate descent, each coordinate minimized by golden section
/// over its full interval in the box.
Eigen::VectorXd coordinate_descent(const Objective& f, Eigen::VectorXd x, const Box& box,
                                   const CoordinateDescentOptions& options = {});

struct NelderMeadOptions {
  double initial_step = 1.0;
  double tol = 1e-12;  // simplex spread in function value
  std::size_t max_iter = 20000;
};

Eigen::VectorXd nelder_mead(const Objective& f, const Eigen::VectorXd& start, const NelderMeadOptions& options = {});

struct GridOptions {
  std::size_t points = 11;  // per dimension, at least 3
  std::size_t depth = 40;   // refinement levels, at least 1
};

/// Tensor grid over the box; each level re-centres a box two cells wide
/// around the best point.
Eigen::VectorXd grid_refine(const Objective& f, const Box& box, const GridOptions& options = {});

/// Newton steps with central-difference gradient and Hessian. Exact on
/// quadratics, where value-only searches stall around sqrt(machine eps).
/// A step is kept only if it does not increase f beyond rounding.
Eigen::VectorXd newton_polish(const Objective& f, Eigen::VectorXd x, double step = 1e-3, std::size_t rounds = 3);

/// True when some coordinate of x lies within tol of a face of the box.
bool on_boundary(const Eigen::VectorXd& x, const Box& box, double tol = 1e-6);

}  // namespace riskshare::search

#include "riskshare/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace riskshare::search {

double golden_section(const Objective1d& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // the end points are candidates too: the minimum may sit on a face
  const double mid = 0.5 * (a + b);
  double best = mid;
  double fbest = f(mid);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < fbest) {
      fbest = fx;
      best = x;
    }
  }
  return best;
}

Eigen::VectorXd coordinate_descent(const Objective& f, Eigen::VectorXd x, const Box& box,
                                   const CoordinateDescentOptions& options) {
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double before = x[k];
      auto line = [&](double t) {
        Eigen::VectorXd y = x;
        y[k] = t;
        return f(y);
      };
      x[k] = golden_section(line, box.lo[k], box.hi[k], options.line_tol);
      moved = std::max(moved, std::abs(x[k] - before));
    }
    if (moved < options.sweep_tol) break;
  }
  return x;
}

Eigen::VectorXd nelder_mead(const Objective& f, const Eigen::VectorXd& start, const NelderMeadOptions& options) {
  const Eigen::Index dim = start.size();
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(dim + 1), start);
  for (Eigen::Index k = 0; k < dim; ++k) simplex[static_cast<std::size_t>(k + 1)][k] += options.initial_step;
  std::vector<double> values(simplex.size());
  std::transform(simplex.begin(), simplex.end(), values.begin(), f);
  std::vector<std::size_t> order(simplex.size());

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::abs(values[worst] - values[best]) <= options.tol * (1.0 + std::abs(values[best]))) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t j = 0; j < simplex.size(); ++j) {
      if (j != worst) centroid += simplex[j];
    }
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t j = 0; j < simplex.size(); ++j) {
      if (j == best) continue;
      simplex[j] = simplex[best] + 0.5 * (simplex[j] - simplex[best]);
      values[j] = f(simplex[j]);
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  return simplex[static_cast<std::size_t>(best)];
}

Eigen::VectorXd grid_refine(const Objective& f, const Box& box, const GridOptions& options) {
  if (options.points < 3) throw std::invalid_argument("grid needs at least 3 points per dimension");
  if (options.depth < 1) throw std::invalid_argument("grid refinement depth must be >= 1");
  const Eigen::Index dim = box.lo.size();
  Eigen::VectorXd lo = box.lo;
  Eigen::VectorXd hi = box.hi;
  Eigen::VectorXd best = 0.5 * (lo + hi);
  double fbest = f(best);
  const auto steps = static_cast<Eigen::Index>(options.points - 1);

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim));
  for (std::size_t level = 0; level < options.depth; ++level) {
    const Eigen::VectorXd cell = (hi - lo) / static_cast<double>(steps);
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      Eigen::VectorXd x(dim);
      for (Eigen::Index k = 0; k < dim; ++k) x[k] = lo[k] + static_cast<double>(idx[static_cast<std::size_t>(k)]) * cell[k];
      const double fx = f(x);
      if (fx < fbest) {
        fbest = fx;
        best = x;
      }
      Eigen::Index k = 0;
      while (k < dim && ++idx[static_cast<std::size_t>(k)] > steps) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == dim) break;
    }
    lo = (best - cell).cwiseMax(box.lo);
    hi = (best + cell).cwiseMin(box.hi);
  }
  return best;
}

Eigen::VectorXd newton_polish(const Objective& f, Eigen::VectorXd x, double step, std::size_t rounds) {
  const Eigen::Index dim = x.size();
  double fx = f(x);
  for (std::size_t r = 0; r < rounds; ++r) {
    Eigen::VectorXd grad(dim);
    Eigen::MatrixXd hess(dim, dim);
    auto at = [&](Eigen::Index a, double da, Eigen::Index b, double db) {
      Eigen::VectorXd y = x;
      y[a] += da;
      y[b] += db;
      return f(y);
    };
    for (Eigen::Index a = 0; a < dim; ++a) {
      const double plus = at(a, step, a, 0.0);
      const double minus = at(a, -step, a, 0.0);
      grad[a] = (plus - minus) / (2.0 * step);
      hess(a, a) = (plus - 2.0 * fx + minus) / (step * step);
      for (Eigen::Index b = 0; b < a; ++b) {
        const double h = (at(a, step, b, step) - at(a, step, b, -step) - at(a, -step, b, step) +
                          at(a, -step, b, -step)) /
                         (4.0 * step * step);
        hess(a, b) = h;
        hess(b, a) = h;
      }
    }
    const Eigen::VectorXd delta = hess.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(grad);
    const Eigen::VectorXd candidate = x - delta;
    const double fc = f(candidate);
    // near the optimum both values agree to rounding, so allow that much slack
    if (!(fc <= fx + 1e-13 * (1.0 + std::abs(fx)))) break;
    x = candidate;
    fx = fc;
  }
  return x;
}

bool on_boundary(const Eigen::VectorXd& x, const Box& box, double tol) {
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x[k] - box.lo[k] < tol || box.hi[k] - x[k] < tol) return true;
  }
  return false;
}

}  // namespace riskshare::search

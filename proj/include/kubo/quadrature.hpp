#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "kubo/util.hpp"

namespace kubo {

struct QuadResult {
  cd value{0.0, 0.0};
  double error = 0.0;
  size_t evals = 0;
  bool converged = true;
};

// adaptive Gauss-Kronrod 7/15 on [a, b]
QuadResult integrate_1d(const std::function<cd(double)>& f, double a, double b, double abs_tol,
                        int max_intervals = 2000);
double integrate_1d_real(const std::function<double(double)>& f, double a, double b, double abs_tol,
                         int max_intervals = 2000);

struct Rect {
  double x0, x1, y0, y1;
};

// adaptive 2d tensor Gauss-Kronrod over a rectangle. hot_points are integrable
// near-singularities: the initial partition places them on cell corners so
// nodes never sample them and refinement stays centered on them.
// Throws QuadratureFailure when the cell budget is exhausted above abs_tol
// unless allow_partial is set.
QuadResult integrate_2d(const std::function<cd(double, double)>& f, Rect domain,
                        std::span<const std::array<double, 2>> hot_points, double abs_tol,
                        size_t max_cells = 400000, bool allow_partial = false);

}  // namespace kubo

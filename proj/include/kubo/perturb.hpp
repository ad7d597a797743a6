#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "kubo/util.hpp"

namespace kubo {

// C^inf cutoff: 1 for t <= 1, 0 for t >= 2, monotone in between.
double smooth_cutoff(double t);

// Smooth compactly supported test potential. 2d variants are tensor-like
// f(x1) * f2(x2) with f2 supported in {x2 >= 0} near the lower boundary;
// only the x1 argument is Fourier-transformed.
class TestFunction {
 public:
  double support_radius = 0.0;     // x1 half-support
  double support_radius_x2 = 0.0;  // 2d: x2 support is [0, support_radius_x2]
  bool two_dimensional = false;

  double eval(double x) const { return f1_(x); }
  double eval2(double x1, double x2) const { return f1_(x1) * f2_(x2); }
  // cached continuum transform of the x1 profile, mu_hat(q) = int e^{-iqx} mu(x) dx
  cd fourier(double q) const;
  // 2d: transform in the first argument only
  cd fourier2(double q, double x2) const { return fourier(q) * f2_(x2); }
  double fourier_reach() const { return q_max_; }

  static TestFunction bump(double center, double half_width, double amplitude);
  // plateau value `amplitude` at x2 = 0, smooth decay to 0 by x2 = x2_width
  static TestFunction edge_bump(double center, double half_width, double amplitude, double x2_width);

 private:
  std::function<double(double)> f1_;
  std::function<double(double)> f2_ = [](double) { return 1.0; };
  std::shared_ptr<const std::vector<cd>> fourier_grid_;  // q = j*dq, j in [-N, N]
  double dq_ = 0.0;
  double q_max_ = 0.0;
  void build_fourier_cache();
};

struct EulerScaling {
  double eta = 0.0;    // adiabatic rate
  double a = 0.0;      // ratio
  double theta = 0.0;  // a * eta
  double alpha = 0.5;  // cutoff exponent in (0,1)
  static EulerScaling make(double eta, double a, double alpha = 0.5);
};

// Samples mu(theta x) on the ring (array index i <-> x = ring_coord(i, L)) and
// their DFT. The 2d variant carries one row per x2 with the transform along x1.
struct PeriodizedPotential {
  int L = 0;
  int rows = 1;  // 1d: 1; 2d: number of x2 rows with support
  double theta = 0.0;
  Eigen::MatrixXd samples;    // (L, rows)
  Eigen::MatrixXcd fourier;   // (L, rows): mu_hat_theta(p_j) per row, p_j = 2 pi j / L
  bool cutoff_applied = false;
  double cutoff_alpha = 0.0;

  double value(int x, int x2 = 0) const;  // 0 outside stored rows
};

PeriodizedPotential periodize(const TestFunction& f, const EulerScaling& s, int L);
PeriodizedPotential apply_momentum_cutoff(const PeriodizedPotential& pot, const EulerScaling& s);

}  // namespace kubo

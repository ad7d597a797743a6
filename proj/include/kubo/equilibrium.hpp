#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kubo/model.hpp"
#include "kubo/spectral.hpp"

namespace kubo {

struct EquilibriumParams {
  double beta = 1.0;  // +inf = zero temperature
  double mu = 0.0;
  bool zero_temperature() const { return std::isinf(beta); }
};

// overflow-safe 1/(1 + e^{beta e}); beta may be +inf
double fermi_factor(double beta, double e_minus_mu);

// Gamma_{(x,rho),(y,rho')} = <a*_{(y,rho')} a_{(x,rho)}>, site-major internal-minor
struct CorrelationMatrix {
  Eigen::MatrixXcd gamma;
};

CorrelationMatrix gibbs_correlation(const Model& model, const EquilibriumParams& p);

// g(k0, k) = (i k0 + H(k) - mu)^{-1}
Eigen::MatrixXcd matsubara_propagator(const Model& model, const EquilibriumParams& p, double k0,
                                      double k);

struct MatsubaraGrid {
  double beta = 0.0;
  int n_max = 0;          // fermionic |n| <= n_max, k0 = (2 pi / beta)(n + 1/2)
  double eta_snapped = 0.0;
  double step() const { return 2.0 * kPi / beta; }
  double freq(int n) const { return step() * (double(n) + 0.5); }
};

// smallest element of (2 pi / beta) N that is >= eta
double snap_eta(double beta, double eta);
MatsubaraGrid make_matsubara_grid(double beta, double eta, int n_max);

// g = g_s + g_r with g_s the chiral singular part built from rank-one Fermi
// projectors and linearized denominators; g_r defined by subtraction.
class PropagatorSplit {
 public:
  struct Chiral {
    int omega;
    double k_F;
    double v;
    Eigen::VectorXcd xi_F;
  };

  PropagatorSplit(Model model, FermiData fermi, double delta, EquilibriumParams params);

  Eigen::MatrixXcd g_full(double k0, double k) const;
  Eigen::MatrixXcd g_singular(double k0, double k) const;
  Eigen::MatrixXcd g_regular(double k0, double k) const;

  double omega_norm(int w, double k0, double k) const;  // ||(k0, k - k_F^w)||_w
  cd D(int w, double k0, double k) const;               // i k0 + v_w (k - k_F^w)
  double chi_delta(int w, double k0, double k) const;

  double delta() const { return delta_; }
  const std::vector<Chiral>& chirals() const { return chirals_; }

 private:
  Model model_;
  EquilibriumParams params_;
  std::vector<Chiral> chirals_;
  double delta_;
};

// default delta: min( (1/4) min_{w!=w'} |k_F^w - k_F^w'|_T * min_w |v_w|, Delta/2 )
double default_delta(const FermiData& fermi, double gap_window);

}  // namespace kubo

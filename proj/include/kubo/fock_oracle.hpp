#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "kubo/util.hpp"

namespace kubo {

// Dense Fock-space reference on <= 8 one-particle modes (Jordan-Wigner,
// site-major mode ordering). Test oracle: clarity over speed.
class FockSpace {
 public:
  static FockSpace from_one_particle(const Eigen::MatrixXcd& h);

  int modes() const { return m_; }
  int dim() const { return 1 << m_; }
  const Eigen::MatrixXcd& a(int i) const { return a_[size_t(i)]; }
  const Eigen::MatrixXcd& adag(int i) const { return adag_[size_t(i)]; }
  const Eigen::MatrixXcd& hamiltonian() const { return H_; }
  const Eigen::MatrixXcd& number() const { return N_; }

  // sum_ij K_ij a+_i a_j
  Eigen::MatrixXcd quadratic(const Eigen::MatrixXcd& kernel) const;
  double car_residual() const;
  Eigen::MatrixXcd gibbs_state(double beta, double mu) const;
  // <a*_y a_x> matrix from a density operator
  Eigen::MatrixXcd correlation(const Eigen::MatrixXcd& rho) const;

 private:
  int m_ = 0;
  std::vector<Eigen::MatrixXcd> a_, adag_;
  Eigen::MatrixXcd H_, N_;
};

// imaginary-time evolution frame: gamma_t(O) = e^{t(H-muN)} O e^{-t(H-muN)}
class ImagTimeFrame {
 public:
  ImagTimeFrame(const FockSpace& space, double beta, double mu);
  Eigen::MatrixXcd gamma(const Eigen::MatrixXcd& O, double t) const;
  const Eigen::MatrixXcd& rho() const { return rho_; }
  double beta() const { return beta_; }
  cd expect(const Eigen::MatrixXcd& O) const { return (rho_ * O).trace(); }

 private:
  double beta_, mu_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXcd evecs_;
  Eigen::MatrixXcd rho_;
};

struct TimedOp {
  const Eigen::MatrixXcd* op;
  double t;
};

// time-ordered moment of even operators (largest time leftmost, sign +1)
cd time_ordered_moment(const ImagTimeFrame& frame, std::vector<TimedOp> ops);
// cumulant from moments by Moebius inversion over set partitions, n <= 4
cd time_ordered_cumulant(const ImagTimeFrame& frame, const std::vector<TimedOp>& ops);

struct KmsResiduals {
  double standard;  // |<g_t(A) g_s(B)> - <g_{s+beta}(B) g_t(A)>|
  double printed;   // |<g_t(A) g_s(B)> - <g_{t+beta}(B) g_s(A)>|
};
KmsResiduals kms_check(const ImagTimeFrame& frame, const Eigen::MatrixXcd& A,
                       const Eigen::MatrixXcd& B, double t, double s);

// Wick rotation check: lhs is the damped real-time iterated-commutator
// integral, rhs the imaginary-time cumulant integral, both at observable time
// t = 0 and order n in {1, 2}.
std::pair<cd, cd> duhamel_vs_wick(const FockSpace& space, double beta, double mu,
                                  const Eigen::MatrixXcd& P, const Eigen::MatrixXcd& O,
                                  double eta_beta, int order, double tol = 1e-8);

// exact driven many-body evolution: i drho/dt = [H + theta e^{eta t} V, rho],
// rho(t_min) = Gibbs, integrated to t = 0 with 4th-order split steps (V must
// be diagonal in the Jordan-Wigner occupation basis, e.g. a local potential).
Eigen::MatrixXcd driven_state(const FockSpace& space, double beta, double mu,
                              const Eigen::VectorXd& v_diag_site, double theta, double eta,
                              double t_min, double h);

}  // namespace kubo

#include "kubo/equilibrium.hpp"

#include <cmath>

#include "kubo/errors.hpp"

namespace kubo {

double fermi_factor(double beta, double e_minus_mu) {
  if (std::isinf(beta)) {
    if (e_minus_mu < 0.0) return 1.0;
    if (e_minus_mu > 0.0) return 0.0;
    fail("HalfFilledOrbital", ErrKind::Precondition,
         "eigenvalue exactly at mu in the zero-temperature state");
  }
  const double x = beta * e_minus_mu;
  if (x > 0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

CorrelationMatrix gibbs_correlation(const Model& model, const EquilibriumParams& p) {
  Eigen::MatrixXcd H = dense_hamiltonian(model);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) fail("NumericalFailure", ErrKind::Numerical, "diagonalization failed");
  const int n = int(H.rows());
  Eigen::VectorXd f(n);
  for (int j = 0; j < n; ++j) {
    double e = es.eigenvalues()(j) - p.mu;
    if (p.zero_temperature() && std::abs(e) < 1e-12)
      fail("HalfFilledOrbital", ErrKind::Precondition, "orbital within 1e-12 of mu at beta=inf");
    f(j) = fermi_factor(p.beta, e);
  }
  CorrelationMatrix out;
  out.gamma = es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

Eigen::MatrixXcd matsubara_propagator(const Model& model, const EquilibriumParams& p, double k0,
                                      double k) {
  Eigen::MatrixXcd h = build_fiber(model, k).matrix;
  const int n = int(h.rows());
  if (k0 == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if ((es.eigenvalues().array() - p.mu).abs().minCoeff() < 1e-14)
      fail("SingularPropagator", ErrKind::Numerical, "k0 = 0 with mu in the fiber spectrum");
  }
  Eigen::MatrixXcd A = h - p.mu * Eigen::MatrixXcd::Identity(n, n);
  A += kI * k0 * Eigen::MatrixXcd::Identity(n, n);
  return A.partialPivLu().inverse();
}

double snap_eta(double beta, double eta) {
  if (beta <= 0 || eta <= 0) fail("SnapEta", ErrKind::Precondition, "beta and eta must be positive");
  const double step = 2.0 * kPi / beta;
  double n = std::ceil(eta / step - 1e-12);
  if (n < 1) n = 1;
  return step * n;
}

MatsubaraGrid make_matsubara_grid(double beta, double eta, int n_max) {
  return {beta, n_max, snap_eta(beta, eta)};
}

double default_delta(const FermiData& fermi, double gap_window) {
  double min_sep = std::numeric_limits<double>::infinity();
  double min_v = std::numeric_limits<double>::infinity();
  for (const auto& p : fermi.points) {
    min_v = std::min(min_v, std::abs(p.velocity));
    for (const auto& q : fermi.points)
      if (&p != &q) min_sep = std::min(min_sep, torus_dist(p.k_F - q.k_F));
  }
  if (fermi.points.size() < 2) min_sep = 2.0 * kPi;  // single point: no disjointness constraint
  return std::min(0.25 * min_sep * min_v, gap_window / 2.0);
}

PropagatorSplit::PropagatorSplit(Model model, FermiData fermi, double delta, EquilibriumParams params)
    : model_(std::move(model)), params_(params), delta_(delta) {
  if (fermi.empty()) fail("EmptyFermi", ErrKind::Precondition, "split needs a nonempty Fermi set");
  for (const auto& p : fermi.points) chirals_.push_back({p.omega, p.k_F, p.velocity, p.eigvec});
  // chi supports pairwise disjoint: 2 delta / |v_w| + 2 delta / |v_w'| < |k_F^w - k_F^w'|
  for (size_t i = 0; i < chirals_.size(); ++i)
    for (size_t j = i + 1; j < chirals_.size(); ++j) {
      const double sep = torus_dist(chirals_[i].k_F - chirals_[j].k_F);
      const double reach = 2.0 * delta_ / std::abs(chirals_[i].v) + 2.0 * delta_ / std::abs(chirals_[j].v);
      if (reach >= sep)
        fail("DeltaTooLarge", ErrKind::Precondition,
             "chiral cutoff supports overlap: delta=" + std::to_string(delta_));
    }
}

double PropagatorSplit::omega_norm(int w, double k0, double k) const {
  const auto& c = chirals_.at(size_t(w));
  const double dq = torus_dist(k - c.k_F);
  return std::sqrt(k0 * k0 + c.v * c.v * dq * dq);
}

cd PropagatorSplit::D(int w, double k0, double k) const {
  const auto& c = chirals_.at(size_t(w));
  return kI * k0 + c.v * torus_wrap(k - c.k_F);
}

double PropagatorSplit::chi_delta(int w, double k0, double k) const {
  return smooth_cutoff(omega_norm(w, k0, k) / delta_);
}

Eigen::MatrixXcd PropagatorSplit::g_full(double k0, double k) const {
  return matsubara_propagator(model_, params_, k0, k);
}

Eigen::MatrixXcd PropagatorSplit::g_singular(double k0, double k) const {
  const int n = fiber_dim(model_);
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
  for (size_t w = 0; w < chirals_.size(); ++w) {
    const double chi = chi_delta(int(w), k0, k);
    if (chi == 0.0) continue;
    // P_w(k): fiber eigenvector continuously connected to the branch at k_F
    BranchPoint bp = eval_branch(model_, k, chirals_[w].xi_F);
    g += (chi / D(int(w), k0, k)) * (bp.vec * bp.vec.adjoint());
  }
  return g;
}

Eigen::MatrixXcd PropagatorSplit::g_regular(double k0, double k) const {
  return g_full(k0, k) - g_singular(k0, k);
}

}  // namespace kubo

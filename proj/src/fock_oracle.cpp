#include "kubo/fock_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "kubo/errors.hpp"

namespace kubo {

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  Eigen::MatrixXcd C(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) C.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return C;
}

}  // namespace

FockSpace FockSpace::from_one_particle(const Eigen::MatrixXcd& h) {
  FockSpace fs;
  fs.m_ = int(h.rows());
  if (fs.m_ > 8) fail("TooManyModes", ErrKind::Precondition, "Fock oracle limited to 8 modes");
  Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd sz;
  sz << 1, 0, 0, -1;
  Eigen::Matrix2cd am;  // annihilator on one mode, basis |0>, |1>
  am << 0, 1, 0, 0;
  for (int i = 0; i < fs.m_; ++i) {
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
    for (int j = 0; j < fs.m_; ++j) {
      if (j < i) op = kron(op, sz);
      else if (j == i) op = kron(op, am);
      else op = kron(op, id2);
    }
    fs.a_.push_back(op);
    fs.adag_.push_back(op.adjoint());
  }
  fs.H_ = fs.quadratic(h);
  Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(fs.m_, fs.m_);
  fs.N_ = fs.quadratic(eye);
  return fs;
}

Eigen::MatrixXcd FockSpace::quadratic(const Eigen::MatrixXcd& kernel) const {
  const int D = dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(D, D);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      if (kernel(i, j) != cd(0, 0)) out += kernel(i, j) * (adag_[size_t(i)] * a_[size_t(j)]);
  return out;
}

double FockSpace::car_residual() const {
  const int D = dim();
  double r = 0.0;
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(D, D);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) {
      Eigen::MatrixXcd anti = a_[size_t(i)] * adag_[size_t(j)] + adag_[size_t(j)] * a_[size_t(i)];
      r = std::max(r, (anti - (i == j ? id : Eigen::MatrixXcd::Zero(D, D))).cwiseAbs().maxCoeff());
      Eigen::MatrixXcd aa = a_[size_t(i)] * a_[size_t(j)] + a_[size_t(j)] * a_[size_t(i)];
      r = std::max(r, aa.cwiseAbs().maxCoeff());
    }
  return r;
}

Eigen::MatrixXcd FockSpace::gibbs_state(double beta, double mu) const {
  if (beta >= 50.0) fail("BetaOverflow", ErrKind::Precondition, "dense Gibbs guarded to beta < 50");
  Eigen::MatrixXcd K = H_ - mu * N_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K);
  Eigen::VectorXd w = (-beta * (es.eigenvalues().array() - es.eigenvalues().minCoeff())).exp();
  w /= w.sum();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd FockSpace::correlation(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd g(m_, m_);
  for (int x = 0; x < m_; ++x)
    for (int y = 0; y < m_; ++y) g(x, y) = (rho * adag_[size_t(y)] * a_[size_t(x)]).trace();
  return g;
}

ImagTimeFrame::ImagTimeFrame(const FockSpace& space, double beta, double mu)
    : beta_(beta), mu_(mu) {
  Eigen::MatrixXcd K = space.hamiltonian() - mu * space.number();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K);
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  Eigen::VectorXd w = (-beta * (evals_.array() - evals_.minCoeff())).exp();
  w /= w.sum();
  rho_ = evecs_ * w.asDiagonal() * evecs_.adjoint();
}

Eigen::MatrixXcd ImagTimeFrame::gamma(const Eigen::MatrixXcd& O, double t) const {
  Eigen::MatrixXcd Ot = evecs_.adjoint() * O * evecs_;
  const int D = int(evals_.size());
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) Ot(i, j) *= std::exp(t * (evals_(i) - evals_(j)));
  return evecs_ * Ot * evecs_.adjoint();
}

cd time_ordered_moment(const ImagTimeFrame& frame, std::vector<TimedOp> ops) {
  std::stable_sort(ops.begin(), ops.end(), [](const TimedOp& a, const TimedOp& b) { return a.t > b.t; });
  Eigen::MatrixXcd prod = frame.gamma(*ops[0].op, ops[0].t);
  for (size_t i = 1; i < ops.size(); ++i) prod *= frame.gamma(*ops[i].op, ops[i].t);
  return (frame.rho() * prod).trace();
}

namespace {

// enumerate set partitions of {0..n-1} as block lists
void partitions_rec(int n, int i, std::vector<std::vector<int>>& cur,
                    std::vector<std::vector<std::vector<int>>>& out) {
  if (i == n) {
    out.push_back(cur);
    return;
  }
  for (auto& block : cur) {
    block.push_back(i);
    partitions_rec(n, i + 1, cur, out);
    block.pop_back();
  }
  cur.push_back({i});
  partitions_rec(n, i + 1, cur, out);
  cur.pop_back();
}

}  // namespace

cd time_ordered_cumulant(const ImagTimeFrame& frame, const std::vector<TimedOp>& ops) {
  const int n = int(ops.size());
  if (n > 4) fail("CumulantOrder", ErrKind::Precondition, "cumulants limited to n <= 4");
  std::vector<std::vector<std::vector<int>>> parts;
  std::vector<std::vector<int>> cur;
  partitions_rec(n, 0, cur, parts);
  cd total(0, 0);
  for (const auto& part : parts) {
    const int nb = int(part.size());
    double coeff = (nb % 2 == 1) ? 1.0 : -1.0;  // (-1)^{|P|-1} (|P|-1)!
    for (int f = 2; f < nb; ++f) coeff *= f;
    cd prod(1, 0);
    for (const auto& block : part) {
      std::vector<TimedOp> sub;
      for (int idx : block) sub.push_back(ops[size_t(idx)]);
      prod *= time_ordered_moment(frame, sub);
    }
    total += coeff * prod;
  }
  return total;
}

KmsResiduals kms_check(const ImagTimeFrame& frame, const Eigen::MatrixXcd& A,
                       const Eigen::MatrixXcd& B, double t, double s) {
  const double beta = frame.beta();
  const cd lhs = (frame.rho() * frame.gamma(A, t) * frame.gamma(B, s)).trace();
  const cd std_rhs = (frame.rho() * frame.gamma(B, s + beta) * frame.gamma(A, t)).trace();
  const cd printed_rhs = (frame.rho() * frame.gamma(B, t + beta) * frame.gamma(A, s)).trace();
  return {std::abs(lhs - std_rhs), std::abs(lhs - printed_rhs)};
}

namespace {

// adaptive 1d complex quadrature by recursive Simpson; small and deterministic
cd simpson_rec(const std::function<cd(double)>& f, double a, double b, cd fa, cd fm, cd fb,
               double tol, int depth) {
  const double m = 0.5 * (a + b);
  const cd fl = f(0.5 * (a + m)), fr = f(0.5 * (m + b));
  const cd s1 = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const cd s2 = (b - a) / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
  if (depth <= 0 || std::abs(s2 - s1) < 15.0 * tol) return s2 + (s2 - s1) / 15.0;
  return simpson_rec(f, a, m, fa, fl, fm, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, fr, fb, tol / 2, depth - 1);
}

cd adaptive(const std::function<cd(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return cd(0, 0);
  const cd fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
  return simpson_rec(f, a, b, fa, fm, fb, tol, 28);
}

}  // namespace

std::pair<cd, cd> duhamel_vs_wick(const FockSpace& space, double beta, double mu,
                                  const Eigen::MatrixXcd& P, const Eigen::MatrixXcd& O,
                                  double eta_beta, int order, double tol) {
  if (order < 1 || order > 2) fail("WickOrder", ErrKind::Precondition, "order must be 1 or 2");
  ImagTimeFrame frame(space, beta, mu);
  // real time: tau_t(A) = e^{iHt} A e^{-iHt}
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(space.hamiltonian());
  const Eigen::VectorXd he = hs.eigenvalues();
  const Eigen::MatrixXcd hv = hs.eigenvectors();
  auto tau = [&](const Eigen::MatrixXcd& A, double t) {
    Eigen::MatrixXcd At = hv.adjoint() * A * hv;
    const int D = int(he.size());
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) At(i, j) *= std::exp(kI * t * (he(i) - he(j)));
    return (hv * At * hv.adjoint()).eval();
  };
  const double t_min = std::log(1e-10) / eta_beta;
  cd lhs;
  if (order == 1) {
    lhs = adaptive(
        [&](double s) {
          Eigen::MatrixXcd Ps = tau(P, s);
          Eigen::MatrixXcd comm = O * Ps - Ps * O;  // tau_0(O) = O
          return std::exp(eta_beta * s) * (frame.rho() * comm).trace();
        },
        t_min, 0.0, tol);
  } else {
    lhs = adaptive(
        [&](double s1) {
          Eigen::MatrixXcd P1 = tau(P, s1);
          Eigen::MatrixXcd c1 = O * P1 - P1 * O;
          cd inner = adaptive(
              [&](double s2) {
                Eigen::MatrixXcd P2 = tau(P, s2);
                Eigen::MatrixXcd c2 = c1 * P2 - P2 * c1;
                return std::exp(eta_beta * s2) * (frame.rho() * c2).trace();
              },
              t_min, s1, tol);
          return std::exp(eta_beta * s1) * inner;
        },
        t_min, 0.0, tol);
  }
  cd rhs;
  if (order == 1) {
    rhs = adaptive(
        [&](double s) {
          std::vector<TimedOp> ops{{&P, s}, {&O, 0.0}};
          return std::exp(-kI * eta_beta * s) * time_ordered_cumulant(frame, ops);
        },
        0.0, beta, tol);
    rhs *= -kI;  // (-i)^1 e^{1 * eta * 0} / 1!
  } else {
    rhs = adaptive(
        [&](double s1) {
          return std::exp(-kI * eta_beta * s1) *
                 adaptive(
                     [&](double s2) {
                       std::vector<TimedOp> ops{{&P, s1}, {&P, s2}, {&O, 0.0}};
                       return std::exp(-kI * eta_beta * s2) * time_ordered_cumulant(frame, ops);
                     },
                     0.0, beta, tol);
        },
        0.0, beta, tol);
    rhs *= cd(-1, 0) / 2.0;  // (-i)^2 / 2!
  }
  return {lhs, rhs};
}

Eigen::MatrixXcd driven_state(const FockSpace& space, double beta, double mu,
                              const Eigen::VectorXd& v_diag_site, double theta, double eta,
                              double t_min, double h) {
  Eigen::MatrixXcd rho = space.gibbs_state(beta, mu);
  const int D = space.dim();
  // V = sum_x v(x) n_x is diagonal in the occupation basis
  Eigen::VectorXd vdiag = Eigen::VectorXd::Zero(D);
  for (int x = 0; x < space.modes(); ++x) {
    const Eigen::MatrixXcd nx = space.adag(x) * space.a(x);
    for (int b = 0; b < D; ++b) vdiag(b) += v_diag_site(x) * nx(b, b).real();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(space.hamiltonian());
  auto expH = [&](double dt) {
    Eigen::VectorXcd ph = (-kI * dt * hs.eigenvalues().array()).exp();
    return (hs.eigenvectors() * ph.asDiagonal() * hs.eigenvectors().adjoint()).eval();
  };
  auto strang = [&](Eigen::MatrixXcd& r, double t0, double dt) {
    const double l1 = theta * (std::exp(eta * (t0 + dt / 2)) - std::exp(eta * t0)) / eta;
    const double l2 = theta * (std::exp(eta * (t0 + dt)) - std::exp(eta * (t0 + dt / 2))) / eta;
    Eigen::VectorXcd d1 = (-kI * l1 * vdiag.array()).exp();
    Eigen::VectorXcd d2 = (-kI * l2 * vdiag.array()).exp();
    Eigen::MatrixXcd U = d2.asDiagonal() * expH(dt) * d1.asDiagonal();
    r = U * r * U.adjoint();
  };
  const double g1 = 1.0 / (2.0 - std::cbrt(2.0));
  const double g2 = 1.0 - 2.0 * g1;
  const int nst = int(std::ceil(-t_min / h));
  const double hh = -t_min / nst;
  double t = t_min;
  for (int s = 0; s < nst; ++s) {
    strang(rho, t, g1 * hh);
    strang(rho, t + g1 * hh, g2 * hh);
    strang(rho, t + (g1 + g2) * hh, g1 * hh);
    t += hh;
  }
  return rho;
}

}  // namespace kubo

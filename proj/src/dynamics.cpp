#include "kubo/dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "kubo/errors.hpp"

namespace kubo {

namespace {

int pub_index(const Model& m, int x1, int x2, int rho) {
  const int L = model_sites(m);
  const int M = model_kernel(m).internal_dim;
  if (!is_2d(m)) return ring_index(x1, L) * M + rho;
  return (ring_index(x1, L) * L + x2) * M + rho;
}

void add_bond(std::vector<KernelEntry>& out, const Model& m, int a1, int a2, int b1, int b2,
              double weight) {
  // weight * [ i a+_a H(a;b) a_b - i a+_b H(b;a) a_a ], dropped if the bond
  // leaves the strip (2d Dirichlet)
  const auto& ker = model_kernel(m);
  const int L = model_sites(m);
  if (is_2d(m) && (a2 < 0 || a2 >= L || b2 < 0 || b2 >= L)) return;
  int d1 = a1 - b1, d2 = a2 - b2;
  // ring wrap of the displacement
  if (d1 > L / 2) d1 -= L;
  if (d1 < -L / 2) d1 += L;
  const Eigen::MatrixXcd* B = ker.block(d1, d2);
  if (!B) return;
  const int M = ker.internal_dim;
  for (int r = 0; r < M; ++r)
    for (int c = 0; c < M; ++c) {
      const cd h = (*B)(r, c);
      if (h == cd(0, 0)) continue;
      out.push_back({pub_index(m, a1, a2, r), pub_index(m, b1, b2, c), weight * kI * h});
      out.push_back({pub_index(m, b1, b2, c), pub_index(m, a1, a2, r), -weight * kI * std::conj(h)});
    }
}

}  // namespace

ObservableKernel observable_kernel(const Model& model, int nu, int x, int ell) {
  const auto& ker = model_kernel(model);
  const int L = model_sites(model);
  const int M = ker.internal_dim;
  ObservableKernel K;
  K.nu = nu;
  K.x = x;
  K.ell = ell;
  if (!is_2d(model)) {
    if (nu == 0) {
      for (int r = 0; r < M; ++r) {
        const int i = pub_index(model, x, 0, r);
        K.entries.push_back({i, i, cd(1, 0)});
      }
      return K;
    }
    if (nu != 1) fail("BadNu", ErrKind::Precondition, "1d observables have nu in {0,1}");
    // current through the cut between x and x+1; reduces to the single bond
    // current for range-1 kernels
    for (int d = 1; d <= ker.range; ++d)
      for (int y = x - d + 1; y <= x; ++y) add_bond(K.entries, model, y, 0, y + d, 0, 1.0);
    return K;
  }
  if (ell <= 0) ell = L;
  if (ell > L) fail("StripTooWide", ErrKind::Precondition, "ell exceeds the cylinder height");
  for (int x2 = 0; x2 < ell; ++x2) {
    if (nu == 0) {
      for (int r = 0; r < M; ++r) {
        const int i = pub_index(model, x, x2, r);
        K.entries.push_back({i, i, cd(1, 0)});
      }
    } else if (nu == 1) {
      // five-bond horizontal current
      add_bond(K.entries, model, x, x2, x + 1, x2, 1.0);
      add_bond(K.entries, model, x, x2, x + 1, x2 - 1, 0.5);
      add_bond(K.entries, model, x, x2, x + 1, x2 + 1, 0.5);
      add_bond(K.entries, model, x, x2 - 1, x + 1, x2, 0.5);
      add_bond(K.entries, model, x, x2 + 1, x + 1, x2, 0.5);
    } else if (nu == 2) {
      add_bond(K.entries, model, x, x2, x, x2 + 1, 1.0);
      add_bond(K.entries, model, x, x2, x - 1, x2 + 1, 0.5);
      add_bond(K.entries, model, x, x2, x + 1, x2 + 1, 0.5);
      add_bond(K.entries, model, x - 1, x2, x, x2 + 1, 0.5);
      add_bond(K.entries, model, x + 1, x2, x, x2 + 1, 0.5);
    } else {
      fail("BadNu", ErrKind::Precondition, "2d observables have nu in {0,1,2}");
    }
  }
  return K;
}

Eigen::MatrixXcd current_vertex(const Model& model, double k, double p, int nu) {
  const int n = fiber_dim(model);
  if (nu == 0) return Eigen::MatrixXcd::Identity(n, n);
  if (torus_dist(p) < 1e-12) return fiber_derivative(model, k);
  const cd denom = cd(1, 0) - std::exp(-kI * p);
  return kI * (build_fiber(model, k).matrix - build_fiber(model, k - p).matrix) / denom;
}

namespace {

// Wait-free single-threaded split-step engine over a frame of column vectors.
// Internal layout: component c = rho (1d) or x2*M + rho (2d); index = c*L + x1.
class SplitStepEvolver {
 public:
  SplitStepEvolver(const Model& model, const PeriodizedPotential& pot, const EulerScaling& scaling,
                   const EquilibriumParams& params)
      : model_(model), scaling_(scaling), params_(params) {
    L_ = model_sites(model);
    M_ = model_kernel(model).internal_dim;
    C_ = is_2d(model) ? L_ * M_ : M_;
    dim_ = C_ * L_;
    // fibers and their eigendecompositions
    fiber_evals_.resize(size_t(L_));
    fiber_evecs_.resize(size_t(L_));
    for (int j = 0; j < L_; ++j) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(build_fiber(model, 2.0 * kPi * j / L_).matrix);
      if (es.info() != Eigen::Success)
        fail("NumericalFailure", ErrKind::Numerical, "fiber diagonalization failed");
      fiber_evals_[size_t(j)] = es.eigenvalues();
      fiber_evecs_[size_t(j)] = es.eigenvectors();
    }
    // potential support (internal indexing)
    for (int x2 = 0; x2 < pot.rows; ++x2)
      for (int i = 0; i < L_; ++i) {
        const double v = pot.samples(i, x2);
        if (v == 0.0) continue;
        for (int r = 0; r < M_; ++r) {
          v_idx_.push_back((is_2d(model) ? x2 * M_ + r : r) * L_ + i);
          v_val_.push_back(v);
        }
      }
  }

  ~SplitStepEvolver() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.fwd);
      fftw_destroy_plan(p.bwd);
    }
  }

  int dim() const { return dim_; }
  int internal_index(int pub) const {
    const int rho = pub % M_;
    if (!is_2d(model_)) return rho * L_ + pub / M_;
    const int site = pub / M_;
    const int x2 = site % L_, x1 = site / L_;
    return (x2 * M_ + rho) * L_ + x1;
  }

  double spectral_norm() const {
    double m = 0;
    for (const auto& e : fiber_evals_) m = std::max({m, std::abs(e.minCoeff()), std::abs(e.maxCoeff())});
    return m;
  }

  double norm_h() const { return spectral_norm(); }

  // evolve the frame in place from t0 by n_steps of size dt (dt may be < 0)
  void run(Eigen::MatrixXcd& frame, double t0, double dt, long long n_steps, int order,
           const std::function<void(long long, double)>& on_step = {}) {
    prepare_plan(frame);
    double t = t0;
    if (order == 2) {
      cache_propagators({dt});
      for (long long s = 0; s < n_steps; ++s) {
        strang(frame, t, dt);
        t = t0 + dt * double(s + 1);
        if (on_step) on_step(s, t);
      }
      return;
    }
    if (order != 4) fail("BadOrder", ErrKind::Precondition, "integrator_order must be 2 or 4");
    const double g1 = 1.0 / (2.0 - std::cbrt(2.0));
    const double g2 = 1.0 - 2.0 * g1;
    cache_propagators({g1 * dt, g2 * dt});
    for (long long s = 0; s < n_steps; ++s) {
      strang(frame, t, g1 * dt);
      strang(frame, t + g1 * dt, g2 * dt);
      strang(frame, t + (g1 + g2) * dt, g1 * dt);
      t = t0 + dt * double(s + 1);
      if (on_step) on_step(s, t);
    }
  }

  // apply the equilibrium correlation Gamma (fiber-blocked Fermi function)
  void apply_gamma(Eigen::MatrixXcd& frame) {
    prepare_plan(frame);
    fft(frame, true);
    if (C_ == 1) {
      Eigen::VectorXcd ph(L_);
      for (int j = 0; j < L_; ++j)
        ph(j) = fermi_factor(params_.beta, fiber_evals_[size_t(j)](0) - params_.mu) / double(L_);
      for (int c = 0; c < int(frame.cols()); ++c)
        frame.col(c).array() *= ph.array();
    } else {
      Eigen::MatrixXcd buf(C_, frame.cols());
      for (int j = 0; j < L_; ++j) {
        Eigen::VectorXd f(C_);
        for (int b = 0; b < C_; ++b)
          f(b) = fermi_factor(params_.beta, fiber_evals_[size_t(j)](b) - params_.mu);
        gather(frame, j, buf);
        buf = (fiber_evecs_[size_t(j)] * (f.asDiagonal() * (fiber_evecs_[size_t(j)].adjoint() * buf)))
                  .eval() /
              double(L_);
        scatter(frame, j, buf);
      }
    }
    fft(frame, false);
  }

  // equilibrium orbital frame: columns are fiber eigenvectors with weight
  // above the cut; returns weights
  Eigen::VectorXd build_occupied_frame(double cut, Eigen::MatrixXcd& frame) {
    std::vector<std::pair<int, int>> sel;  // (k index, band)
    for (int j = 0; j < L_; ++j)
      for (int b = 0; b < C_; ++b)
        if (fermi_factor(params_.beta, fiber_evals_[size_t(j)](b) - params_.mu) > cut)
          sel.emplace_back(j, b);
    frame.setZero(dim_, int(sel.size()));
    Eigen::VectorXd w(int(sel.size()));
    const double nrm = 1.0 / std::sqrt(double(L_));
    for (size_t i = 0; i < sel.size(); ++i) {
      const auto [j, b] = sel[i];
      w(int(i)) = fermi_factor(params_.beta, fiber_evals_[size_t(j)](b) - params_.mu);
      for (int c = 0; c < C_; ++c) {
        const cd amp = fiber_evecs_[size_t(j)](c, b) * nrm;
        for (int x1 = 0; x1 < L_; ++x1)
          frame(c * L_ + x1, int(i)) = amp * std::exp(kI * (2.0 * kPi * j / L_) * double(x1));
      }
    }
    return w;
  }

 private:
  struct Plans {
    fftw_plan fwd = nullptr, bwd = nullptr;
  };

  const Model& model_;
  EulerScaling scaling_;
  EquilibriumParams params_;
  int L_ = 0, M_ = 0, C_ = 0, dim_ = 0;
  std::vector<Eigen::VectorXd> fiber_evals_;
  std::vector<Eigen::MatrixXcd> fiber_evecs_;
  std::vector<int> v_idx_;
  std::vector<double> v_val_;
  std::map<long long, Plans> plans_;  // keyed by ncols
  std::map<double, std::vector<Eigen::MatrixXcd>> props_;  // dt -> per-fiber e^{-i dt H(k)} / L
  std::map<double, Eigen::VectorXcd> props_scalar_;        // C_ == 1 fast path
  Eigen::MatrixXcd gbuf_;

  void prepare_plan(Eigen::MatrixXcd& frame) {
    const long long nc = frame.cols();
    if (plans_.count(nc)) return;
    Plans p;
    auto* data = reinterpret_cast<fftw_complex*>(frame.data());
    const int n = L_;
    const long long howmany = (long long)C_ * nc;
    const unsigned flags = (dim_ * nc > (1 << 21)) ? FFTW_MEASURE : FFTW_ESTIMATE;
    // planning may clobber the buffer
    Eigen::MatrixXcd save;
    if (flags == FFTW_MEASURE) save = frame;
    p.fwd = fftw_plan_many_dft(1, &n, int(howmany), data, nullptr, 1, n, data, nullptr, 1, n,
                               FFTW_FORWARD, flags);
    p.bwd = fftw_plan_many_dft(1, &n, int(howmany), data, nullptr, 1, n, data, nullptr, 1, n,
                               FFTW_BACKWARD, flags);
    if (flags == FFTW_MEASURE) frame = save;
    plans_[nc] = p;
  }

  void fft(Eigen::MatrixXcd& frame, bool forward) {
    auto& p = plans_.at(frame.cols());
    auto* data = reinterpret_cast<fftw_complex*>(frame.data());
    fftw_execute_dft(forward ? p.fwd : p.bwd, data, data);
  }

  void gather(const Eigen::MatrixXcd& frame, int j, Eigen::MatrixXcd& buf) const {
    for (int col = 0; col < int(frame.cols()); ++col)
      for (int c = 0; c < C_; ++c) buf(c, col) = frame(c * L_ + j, col);
  }
  void scatter(Eigen::MatrixXcd& frame, int j, const Eigen::MatrixXcd& buf) const {
    for (int col = 0; col < int(frame.cols()); ++col)
      for (int c = 0; c < C_; ++c) frame(c * L_ + j, col) = buf(c, col);
  }

  void cache_propagators(std::initializer_list<double> dts) {
    for (double dt : dts) {
      if (C_ == 1) {
        if (props_scalar_.count(dt)) continue;
        Eigen::VectorXcd ph(L_);
        for (int j = 0; j < L_; ++j)
          ph(j) = std::exp(-kI * dt * fiber_evals_[size_t(j)](0)) / double(L_);
        props_scalar_[dt] = std::move(ph);
      } else {
        if (props_.count(dt)) continue;
        std::vector<Eigen::MatrixXcd> set(size_t(L_));
        for (int j = 0; j < L_; ++j) {
          Eigen::VectorXcd ph = (-kI * dt * fiber_evals_[size_t(j)].array()).exp();
          set[size_t(j)] =
              (fiber_evecs_[size_t(j)] * ph.asDiagonal() * fiber_evecs_[size_t(j)].adjoint()) /
              double(L_);
        }
        props_[dt] = std::move(set);
      }
    }
  }

  void apply_potential(Eigen::MatrixXcd& frame, double lambda) {
    if (lambda == 0.0) return;
    const int nc = int(frame.cols());
    for (size_t i = 0; i < v_idx_.size(); ++i) {
      const cd ph = std::exp(-kI * lambda * v_val_[i]);
      frame.row(v_idx_[i]) *= ph;
    }
    (void)nc;
  }

  void strang(Eigen::MatrixXcd& frame, double t, double dt) {
    const double eta = scaling_.eta;
    const double l1 = scaling_.theta * (std::exp(eta * (t + dt / 2)) - std::exp(eta * t)) / eta;
    const double l2 = scaling_.theta * (std::exp(eta * (t + dt)) - std::exp(eta * (t + dt / 2))) / eta;
    apply_potential(frame, l1);
    fft(frame, true);
    if (C_ == 1) {
      const auto& ph = props_scalar_.at(dt);
      for (int c = 0; c < int(frame.cols()); ++c) frame.col(c).array() *= ph.array();
    } else {
      const auto& set = props_.at(dt);
      if (gbuf_.cols() != frame.cols() || gbuf_.rows() != C_) gbuf_.resize(C_, frame.cols());
      Eigen::MatrixXcd tmp(C_, frame.cols());
      for (int j = 0; j < L_; ++j) {
        gather(frame, j, gbuf_);
        tmp.noalias() = set[size_t(j)] * gbuf_;
        scatter(frame, j, tmp);
      }
    }
    fft(frame, false);
    apply_potential(frame, l2);
  }
};

cd kernel_expectation(const ObservableKernel& K, const SplitStepEvolver& ev,
                      const Eigen::MatrixXcd& frame, const Eigen::VectorXd& w,
                      const std::vector<int>& internal_of_pub) {
  // sum_j w_j <phi_j| K |phi_j>
  cd out(0, 0);
  for (const auto& e : K.entries) {
    const int r = internal_of_pub[size_t(e.row)];
    const int c = internal_of_pub[size_t(e.col)];
    cd acc(0, 0);
    for (int j = 0; j < int(frame.cols()); ++j)
      acc += w(j) * std::conj(frame(r, j)) * frame(c, j);
    out += e.val * acc;
  }
  return out;
}

}  // namespace

std::vector<int> default_probes(const TestFunction& f, const EulerScaling& s, int L) {
  const int half = int(std::ceil((f.support_radius + 2.0) / s.theta));
  std::vector<int> out;
  for (int x = -std::min(half, L / 2); x <= std::min(half, L / 2); ++x) out.push_back(x);
  return out;
}

std::vector<ResponseCurve> evolve_response_multi(const Model& model, const PeriodizedPotential& pot,
                                                 const EulerScaling& scaling,
                                                 const EquilibriumParams& params,
                                                 const EvolutionConfig& cfg, std::span<const int> nus,
                                                 std::span<const int> probes, Trajectory* traj) {
  const int L = model_sites(model);
  if (pot.L != L) fail("ModelPotMismatch", ErrKind::Precondition, "potential and model have different L");
  SplitStepEvolver ev(model, pot, scaling, params);
  const double h_rule = std::min(0.05 / std::max(ev.norm_h(), 1e-12), 0.05 / scaling.eta);
  double h = cfg.step_size > 0 ? cfg.step_size : h_rule;
  if (h > h_rule * (1.0 + 1e-9))
    fail("StepTooLarge", ErrKind::Precondition,
         "step " + std::to_string(h) + " exceeds min(0.05/||H||, 0.05/eta) = " + std::to_string(h_rule));
  const double t_min = std::log(cfg.switch_floor) / scaling.eta;
  const long long n_steps = (long long)std::ceil(-t_min / h);
  const double dt = -t_min / double(n_steps);

  // kernels for every requested nu at every probe
  std::vector<std::vector<ObservableKernel>> kernels(nus.size());
  for (size_t i = 0; i < nus.size(); ++i)
    for (int x : probes) kernels[i].push_back(observable_kernel(model, nus[i], x, cfg.ell));

  // map public index -> internal evolver index
  std::vector<int> internal_of_pub(size_t(one_particle_dim(model)));
  for (size_t i = 0; i < internal_of_pub.size(); ++i)
    internal_of_pub[i] = ev.internal_index(int(i));

  EvolutionConfig::Mode mode = cfg.mode;
  if (mode == EvolutionConfig::Mode::Auto)
    mode = is_2d(model) ? EvolutionConfig::Mode::Heisenberg : EvolutionConfig::Mode::Forward;
  if (traj && mode != EvolutionConfig::Mode::Forward)
    fail("TrajectoryMode", ErrKind::Precondition, "trajectory recording needs forward mode");

  std::vector<ResponseCurve> out(nus.size());
  double unit_drift = 0, trace_drift = 0;
  std::string engine;

  if (mode == EvolutionConfig::Mode::Forward) {
    engine = "forward-orbital";
    Eigen::MatrixXcd frame;
    Eigen::VectorXd w = ev.build_occupied_frame(cfg.occupancy_cut, frame);
    // equilibrium kernel values from the same truncated frame
    std::vector<std::vector<double>> eq_vals(nus.size());
    for (size_t i = 0; i < nus.size(); ++i)
      for (const auto& K : kernels[i])
        eq_vals[i].push_back(kernel_expectation(K, ev, frame, w, internal_of_pub).real());
    // trajectory kernels
    std::vector<ObservableKernel> tk_n, tk_j1, tk_j1m, tk_j2, tk_j2m;
    if (traj) {
      traj->two_d = is_2d(model);
      traj->times.clear();
      for (int s : traj->sites) {
        const int x1 = traj->two_d ? s / L : s;
        const int x2 = traj->two_d ? s % L : 0;
        if (!traj->two_d) {
          tk_n.push_back(observable_kernel(model, 0, x1));
          tk_j1.push_back(observable_kernel(model, 1, x1));
          tk_j1m.push_back(observable_kernel(model, 1, x1 - 1));
        } else {
          // single-site 2d kernels: strip of height 1 starting at x2
          ObservableKernel n0;
          n0.nu = 0;
          const int M = model_kernel(model).internal_dim;
          for (int r = 0; r < M; ++r) {
            const int i = pub_index(model, x1, x2, r);
            n0.entries.push_back({i, i, cd(1, 0)});
          }
          tk_n.push_back(n0);
          auto bond5 = [&](int nu, int xa, int ya) {
            ObservableKernel K;
            K.nu = nu;
            if (nu == 1) {
              add_bond(K.entries, model, xa, ya, xa + 1, ya, 1.0);
              add_bond(K.entries, model, xa, ya, xa + 1, ya - 1, 0.5);
              add_bond(K.entries, model, xa, ya, xa + 1, ya + 1, 0.5);
              add_bond(K.entries, model, xa, ya - 1, xa + 1, ya, 0.5);
              add_bond(K.entries, model, xa, ya + 1, xa + 1, ya, 0.5);
            } else {
              add_bond(K.entries, model, xa, ya, xa, ya + 1, 1.0);
              add_bond(K.entries, model, xa, ya, xa - 1, ya + 1, 0.5);
              add_bond(K.entries, model, xa, ya, xa + 1, ya + 1, 0.5);
              add_bond(K.entries, model, xa - 1, ya, xa, ya + 1, 0.5);
              add_bond(K.entries, model, xa + 1, ya, xa, ya + 1, 0.5);
            }
            return K;
          };
          tk_j1.push_back(bond5(1, x1, x2));
          tk_j1m.push_back(bond5(1, x1 - 1, x2));
          tk_j2.push_back(bond5(2, x1, x2));
          tk_j2m.push_back(bond5(2, x1, x2 - 1));
        }
      }
    }
    auto snapshot = [&](double t) {
      traj->times.push_back(t);
      auto eval_set = [&](const std::vector<ObservableKernel>& ks) {
        std::vector<double> v;
        for (const auto& K : ks) v.push_back(kernel_expectation(K, ev, frame, w, internal_of_pub).real());
        return v;
      };
      traj->density.push_back(eval_set(tk_n));
      traj->j1.push_back(eval_set(tk_j1));
      traj->j1m.push_back(eval_set(tk_j1m));
      if (traj->two_d) {
        traj->j2.push_back(eval_set(tk_j2));
        traj->j2m.push_back(eval_set(tk_j2m));
      }
    };
    if (traj && cfg.snapshot_stride > 0) snapshot(t_min);
    ev.run(frame, t_min, dt, n_steps, cfg.integrator_order,
           (traj && cfg.snapshot_stride > 0)
               ? std::function<void(long long, double)>([&](long long s, double t) {
                   if ((s + 1) % cfg.snapshot_stride == 0) snapshot(t);
                 })
               : std::function<void(long long, double)>{});
    for (int j = 0; j < int(frame.cols()); ++j)
      unit_drift = std::max(unit_drift, std::abs(frame.col(j).norm() - 1.0));
    double tr = 0;
    for (int j = 0; j < int(frame.cols()); ++j) tr += w(j) * (frame.col(j).squaredNorm() - 1.0);
    trace_drift = std::abs(tr);
    for (size_t i = 0; i < nus.size(); ++i) {
      out[i].values.resize(probes.size());
      for (size_t p = 0; p < kernels[i].size(); ++p) {
        const double now = kernel_expectation(kernels[i][p], ev, frame, w, internal_of_pub).real();
        out[i].values[p] = (now - eq_vals[i][p]) / scaling.theta;
      }
    }
  } else {
    engine = "heisenberg-backward";
    // union of kernel site indices
    std::set<int> pubs;
    for (const auto& ks : kernels)
      for (const auto& K : ks)
        for (const auto& e : K.entries) {
          pubs.insert(e.row);
          pubs.insert(e.col);
        }
    std::vector<int> pub_list(pubs.begin(), pubs.end());
    std::map<int, int> col_of;
    for (size_t i = 0; i < pub_list.size(); ++i) col_of[pub_list[i]] = int(i);
    const int nv = int(pub_list.size());
    Eigen::MatrixXcd frame = Eigen::MatrixXcd::Zero(ev.dim(), nv);
    for (int i = 0; i < nv; ++i) frame(internal_of_pub[size_t(pub_list[size_t(i)])], i) = 1.0;
    // equilibrium pairings G_eq[b,a] = <e_b | Gamma | e_a>
    Eigen::MatrixXcd eq_frame = frame;
    ev.apply_gamma(eq_frame);
    Eigen::MatrixXcd Geq = frame.adjoint() * eq_frame;
    // backward evolution: psi(t) = U(t; 0) e, integrated 0 -> t_min
    ev.run(frame, 0.0, -dt, n_steps, cfg.integrator_order);
    for (int j = 0; j < nv; ++j)
      unit_drift = std::max(unit_drift, std::abs(frame.col(j).norm() - 1.0));
    trace_drift = unit_drift;
    Eigen::MatrixXcd gframe = frame;
    ev.apply_gamma(gframe);
    Eigen::MatrixXcd G = frame.adjoint() * gframe;
    for (size_t i = 0; i < nus.size(); ++i) {
      out[i].values.resize(probes.size());
      for (size_t p = 0; p < kernels[i].size(); ++p) {
        cd acc(0, 0);
        for (const auto& e : kernels[i][p].entries)
          acc += e.val * (G(col_of[e.row], col_of[e.col]) - Geq(col_of[e.row], col_of[e.col]));
        out[i].values[p] = acc.real() / scaling.theta;
      }
    }
  }

  for (size_t i = 0; i < nus.size(); ++i) {
    auto& r = out[i];
    r.nu = nus[i];
    r.positions.assign(probes.begin(), probes.end());
    r.eta = scaling.eta;
    r.a = scaling.a;
    r.theta = scaling.theta;
    r.alpha = pot.cutoff_applied ? pot.cutoff_alpha : std::nan("");
    r.beta = params.beta;
    r.L = L;
    r.ell = 0;
    r.model_tag = model_id(model);
    r.unitarity_drift = unit_drift;
    r.trace_drift = trace_drift;
    r.switch_floor = cfg.switch_floor;
    r.engine = engine;
    std::ostringstream os;
    os << r.model_tag << "|" << r.eta << "|" << r.a << "|" << r.beta << "|" << r.L << "|" << nus[i]
       << "|" << cfg.integrator_order << "|" << h;
    r.config_hash = fnv1a(os.str());
  }
  if (unit_drift > 1e-8)
    fail("StepTooLarge", ErrKind::Numerical,
         "unitarity drift " + std::to_string(unit_drift) + " exceeds 1e-8");
  return out;
}

ResponseCurve evolve_response(const Model& model, const PeriodizedPotential& pot,
                              const EulerScaling& scaling, const EquilibriumParams& params,
                              const EvolutionConfig& cfg, int nu, std::span<const int> probes,
                              Trajectory* traj) {
  std::vector<int> nus{nu};
  return evolve_response_multi(model, pot, scaling, params, cfg, nus, probes, traj)[0];
}

ContinuityReport verify_continuity_dynamic(const Model& model, const Trajectory& traj) {
  (void)model;
  ContinuityReport rep;
  if (traj.times.size() < 3) fail("TrajectoryShort", ErrKind::Precondition, "need >= 3 snapshots");
  for (size_t i = 1; i + 1 < traj.times.size(); ++i) {
    const double dt2 = traj.times[i + 1] - traj.times[i - 1];
    for (size_t s = 0; s < traj.sites.size(); ++s) {
      const double dndt = (traj.density[i + 1][s] - traj.density[i - 1][s]) / dt2;
      double div = traj.j1[i][s] - traj.j1m[i][s];
      if (traj.two_d) div += traj.j2[i][s] - traj.j2m[i][s];
      const double res = std::abs(dndt + div);
      if (res > rep.max_residual) {
        rep.max_residual = res;
        rep.worst_site = traj.sites[s];
        rep.worst_time = traj.times[i];
      }
    }
  }
  return rep;
}

}  // namespace kubo

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "kubo/equilibrium.hpp"
#include "kubo/model.hpp"
#include "kubo/perturb.hpp"

namespace kubo {

// One-particle observable kernel K with <O> = tr(K Gamma). Entries are in the
// public basis: 1d index x*M + rho, 2d index (x1*L + x2)*M + rho.
struct KernelEntry {
  int row;  // creation index
  int col;  // annihilation index
  cd val;
};

struct ObservableKernel {
  int nu = 0;   // 0 density, 1 current, 2 vertical current (2d)
  int x = 0;    // site (x1 in 2d)
  int ell = 0;  // strip width for 2d kernels
  std::vector<KernelEntry> entries;
};

ObservableKernel observable_kernel(const Model& model, int nu, int x, int ell = 0);

// J_nu(k, p): J_0 = identity; J_1 = i (H(k) - H(k-p)) / (1 - e^{-ip}), with the
// p = 0 limit dH/dk taken analytically.
Eigen::MatrixXcd current_vertex(const Model& model, double k, double p, int nu = 1);

struct EvolutionConfig {
  double switch_floor = 1e-8;   // epsilon_s; t_min = ln(eps_s)/eta
  double step_size = 0.0;       // 0: use min(0.05/||H||, 0.05/eta)
  double occupancy_cut = 1e-12;
  int integrator_order = 2;     // 2 (Strang) or 4 (Yoshida composition)
  int ell = 0;                  // 2d strip width for edge observables; 0 = full height
  enum class Mode { Auto, Forward, Heisenberg } mode = Mode::Auto;
  int snapshot_stride = 0;      // forward mode: record trajectory every N steps
};

struct ResponseCurve {
  int nu = 0;
  std::vector<int> positions;
  std::vector<double> values;  // chi_nu(x)
  // run metadata
  double eta = 0, a = 0, theta = 0, alpha = 0, beta = 0;
  int L = 0, ell = 0;
  std::string model_tag;
  uint64_t config_hash = 0;
  double unitarity_drift = 0, trace_drift = 0, switch_floor = 0;
  std::string engine;
};

// per-site snapshots used by the continuity check (forward mode only)
struct Trajectory {
  bool two_d = false;
  std::vector<int> sites;          // x (1d) / encoded x1*L+x2 (2d)
  std::vector<double> times;
  // per snapshot, per site: density, j1 at x, j1 at x-e1, j2 at x, j2 at x-e2
  std::vector<std::vector<double>> density, j1, j1m, j2, j2m;
};

std::vector<ResponseCurve> evolve_response_multi(const Model& model, const PeriodizedPotential& pot,
                                                 const EulerScaling& scaling,
                                                 const EquilibriumParams& params,
                                                 const EvolutionConfig& cfg, std::span<const int> nus,
                                                 std::span<const int> probes,
                                                 Trajectory* traj = nullptr);

ResponseCurve evolve_response(const Model& model, const PeriodizedPotential& pot,
                              const EulerScaling& scaling, const EquilibriumParams& params,
                              const EvolutionConfig& cfg, int nu, std::span<const int> probes,
                              Trajectory* traj = nullptr);

struct ContinuityReport {
  double max_residual = 0.0;
  int worst_site = 0;
  double worst_time = 0.0;
};

ContinuityReport verify_continuity_dynamic(const Model& model, const Trajectory& traj);

std::vector<int> default_probes(const TestFunction& f, const EulerScaling& s, int L);

}  // namespace kubo

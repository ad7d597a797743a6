#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kubo/model.hpp"

namespace kubo {

// Band branches tracked continuously in k by eigenvector-overlap matching.
struct BandStructure {
  std::vector<double> k_grid;        // sorted, [0, 2*pi)
  Eigen::MatrixXd energies;          // (n_branches, nk)
  std::vector<Eigen::MatrixXcd> vectors;  // per k: columns follow branch order
  double gap_window = 0.0;           // Delta
};

enum class EdgeSide { Lower, Upper, Bulk };

struct FermiPoint {
  int omega = 0;          // index into the Fermi set
  double k_F = 0.0;
  double velocity = 0.0;  // e'(k_F), finite-difference + Richardson
  double velocity_fh = 0.0;  // Feynman-Hellmann cross-check <xi|dH/dk|xi>
  int band_index = 0;     // tracked branch index
  Eigen::VectorXcd eigvec;
  EdgeSide side = EdgeSide::Bulk;
  double decay_rate = 0.0;  // fitted c for edge modes
};

struct FermiData {
  std::vector<FermiPoint> points;
  bool empty() const { return points.empty(); }
};

BandStructure band_structure(const Model& model, int k_count);

// Roots of e_w(k) = mu inside the window (mu-delta, mu+delta), polished to
// |e - mu| <= tol. Throws TransversalityViolated / DegeneracyViolated.
FermiData find_fermi_points(const Model& model, double delta, double tol);

// Assigns side = Lower/Upper by exponential-decay fits of ||xi(k_F; x2)||.
FermiData classify_edge_modes(const CylinderModel2D& model, FermiData fermi, int decay_fit_window);

int check_net_chirality(const FermiData& fermi);

// Half the distance from mu to the nearest band edge outside the crossing
// branches, capped at 1.0.
double default_gap_window(const Model& model, int k_count = 128);

// branch-tracked eigenpair of the fiber at arbitrary k, selected by overlap
// with a reference eigenvector
struct BranchPoint {
  double energy;
  Eigen::VectorXcd vec;
  double nearest_other;  // distance to the nearest other eigenvalue
};
BranchPoint eval_branch(const Model& model, double k, const Eigen::VectorXcd& ref);

}  // namespace kubo

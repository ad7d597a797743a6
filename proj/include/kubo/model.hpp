#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <variant>

#include "kubo/config.hpp"
#include "kubo/util.hpp"

namespace kubo {

// Finite-range translation-invariant hopping blocks: block(d) = H(x; x-d),
// an M x M complex matrix per integer displacement d (pair (d1,d2) in 2d).
struct HoppingKernel {
  int dimension = 1;
  int internal_dim = 1;  // M
  int range = 1;         // R, in sites
  std::map<std::array<int, 2>, Eigen::MatrixXcd> blocks;  // 1d uses {d, 0}

  void add_block(int d1, int d2, const Eigen::MatrixXcd& b);
  const Eigen::MatrixXcd* block(int d1, int d2 = 0) const;
  // Hermiticity block(d) = block(-d)^dagger and |d| <= R; throws KernelNotHermitian.
  void validate() const;
};

struct LatticeModel1D {
  HoppingKernel kernel;
  int sites = 0;  // L
  double chemical_potential = 0.0;
};

struct CylinderModel2D {
  HoppingKernel kernel;
  int sites = 0;  // L: circumference = height
  double chemical_potential = 0.0;
};

using Model = std::variant<LatticeModel1D, CylinderModel2D>;

struct BlochFiber {
  double k = 0.0;
  Eigen::MatrixXcd matrix;  // M x M (1d), (L*M) x (L*M) (2d, Dirichlet in x2)
};

BlochFiber build_bloch_1d(const LatticeModel1D& model, double k);
// rows/cols ordered x2-major, internal-minor: index = x2*M + rho
BlochFiber build_fiber_2d(const CylinderModel2D& model, double k);
BlochFiber build_fiber(const Model& model, double k);

// d/dk of the fiber matrix, from the analytic finite hopping sum
Eigen::MatrixXcd fiber_derivative(const Model& model, double k);

Model builtin_model(const std::string& name, const std::map<std::string, double>& params);
Model model_from_config(const Config& cfg);

inline int model_sites(const Model& m) {
  return std::visit([](const auto& x) { return x.sites; }, m);
}
inline double model_mu(const Model& m) {
  return std::visit([](const auto& x) { return x.chemical_potential; }, m);
}
inline const HoppingKernel& model_kernel(const Model& m) {
  return std::visit([](const auto& x) -> const HoppingKernel& { return x.kernel; }, m);
}
inline bool is_2d(const Model& m) { return std::holds_alternative<CylinderModel2D>(m); }
// dimension of one Bloch fiber: M in 1d, L*M in 2d
int fiber_dim(const Model& m);
// total one-particle dimension: L*M in 1d, L*L*M in 2d
int one_particle_dim(const Model& m);
std::string model_id(const Model& m);

// dense one-particle Hamiltonian in position basis, site-major (x slow in 1d;
// (x1, x2) slow lexicographic in 2d), internal-minor. Guarded for small sizes.
Eigen::MatrixXcd dense_hamiltonian(const Model& m);

}  // namespace kubo

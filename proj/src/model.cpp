#include "kubo/model.hpp"

#include <cmath>
#include <sstream>

#include "kubo/errors.hpp"

namespace kubo {

void HoppingKernel::add_block(int d1, int d2, const Eigen::MatrixXcd& b) {
  blocks[{d1, d2}] = b;
}

const Eigen::MatrixXcd* HoppingKernel::block(int d1, int d2) const {
  auto it = blocks.find({d1, d2});
  return it == blocks.end() ? nullptr : &it->second;
}

void HoppingKernel::validate() const {
  for (const auto& [d, b] : blocks) {
    if (b.rows() != internal_dim || b.cols() != internal_dim)
      fail("KernelShape", ErrKind::Precondition, "block is not M x M");
    if (std::abs(d[0]) > range || std::abs(d[1]) > range)
      fail("KernelRange", ErrKind::Precondition, "displacement exceeds range");
    if (dimension == 1 && d[1] != 0)
      fail("KernelRange", ErrKind::Precondition, "1d kernel with transverse displacement");
    auto it = blocks.find({-d[0], -d[1]});
    if (it == blocks.end() || (b - it->second.adjoint()).cwiseAbs().maxCoeff() > 1e-13)
      fail("KernelNotHermitian", ErrKind::Precondition,
           "block(d) != adjoint(block(-d)) at d=(" + std::to_string(d[0]) + "," + std::to_string(d[1]) + ")");
  }
}

BlochFiber build_bloch_1d(const LatticeModel1D& model, double k) {
  model.kernel.validate();
  const int M = model.kernel.internal_dim;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(M, M);
  for (const auto& [d, b] : model.kernel.blocks) h += std::exp(-kI * k * double(d[0])) * b;
  return {k, std::move(h)};
}

BlochFiber build_fiber_2d(const CylinderModel2D& model, double k) {
  model.kernel.validate();
  const int M = model.kernel.internal_dim;
  const int W = model.sites;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(W * M, W * M);
  for (const auto& [d, b] : model.kernel.blocks) {
    const cd phase = std::exp(-kI * k * double(d[0]));
    for (int y2 = 0; y2 < W; ++y2) {
      const int x2 = y2 + d[1];
      if (x2 < 0 || x2 >= W) continue;  // Dirichlet: hoppings exiting the strip dropped
      h.block(x2 * M, y2 * M, M, M) += phase * b;
    }
  }
  return {k, std::move(h)};
}

BlochFiber build_fiber(const Model& model, double k) {
  if (is_2d(model)) return build_fiber_2d(std::get<CylinderModel2D>(model), k);
  return build_bloch_1d(std::get<LatticeModel1D>(model), k);
}

Eigen::MatrixXcd fiber_derivative(const Model& model, double k) {
  const auto& ker = model_kernel(model);
  const int M = ker.internal_dim;
  if (!is_2d(model)) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(M, M);
    for (const auto& [d, b] : ker.blocks) h += (-kI * double(d[0])) * std::exp(-kI * k * double(d[0])) * b;
    return h;
  }
  const int W = model_sites(model);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(W * M, W * M);
  for (const auto& [d, b] : ker.blocks) {
    const cd phase = (-kI * double(d[0])) * std::exp(-kI * k * double(d[0]));
    for (int y2 = 0; y2 < W; ++y2) {
      const int x2 = y2 + d[1];
      if (x2 < 0 || x2 >= W) continue;
      h.block(x2 * M, y2 * M, M, M) += phase * b;
    }
  }
  return h;
}

int fiber_dim(const Model& m) {
  const auto& ker = model_kernel(m);
  return is_2d(m) ? model_sites(m) * ker.internal_dim : ker.internal_dim;
}

int one_particle_dim(const Model& m) {
  const int L = model_sites(m);
  const int M = model_kernel(m).internal_dim;
  return is_2d(m) ? L * L * M : L * M;
}

namespace {

Eigen::Matrix2cd pauli(int i) {
  Eigen::Matrix2cd s;
  switch (i) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -kI, kI, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

double need(const std::map<std::string, double>& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) fail("ModelParams", ErrKind::Precondition, "missing parameter: " + key);
  return it->second;
}

void check_odd_L(long long L) {
  if (L < 3 || L % 2 == 0)
    fail("EvenL", ErrKind::Precondition, "L must be odd and >= 3, got " + std::to_string(L));
}

}  // namespace

Model builtin_model(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "laplacian_chain") {
    const double t = need(params, "t");
    long long L = llround(need(params, "L"));
    check_odd_L(L);
    HoppingKernel ker;
    ker.dimension = 1;
    ker.internal_dim = 1;
    ker.range = 1;
    Eigen::MatrixXcd b(1, 1);
    b(0, 0) = t;
    ker.add_block(1, 0, b);
    ker.add_block(-1, 0, b);
    b(0, 0) = -2.0 * t;
    ker.add_block(0, 0, b);
    return LatticeModel1D{std::move(ker), int(L), need(params, "mu")};
  }
  if (name == "ssh_chain") {
    const double t1 = need(params, "t1"), t2 = need(params, "t2");
    long long L = llround(need(params, "L"));
    check_odd_L(L);
    HoppingKernel ker;
    ker.dimension = 1;
    ker.internal_dim = 2;
    ker.range = 1;
    Eigen::MatrixXcd b0 = Eigen::MatrixXcd::Zero(2, 2), bp = Eigen::MatrixXcd::Zero(2, 2);
    b0(0, 1) = t1;
    b0(1, 0) = t1;
    bp(0, 1) = t2;  // H_{12}(k) = t1 + t2 e^{-ik}
    ker.add_block(1, 0, bp);
    ker.add_block(-1, 0, bp.adjoint());
    ker.add_block(0, 0, b0);
    return LatticeModel1D{std::move(ker), int(L), need(params, "mu")};
  }
  if (name == "qwz_cylinder") {
    // d(k) = (sin k1, sin k2, u + cos k1 + cos k2) contracted with Pauli matrices
    const double u = need(params, "u");
    long long L = llround(need(params, "L"));
    check_odd_L(L);
    HoppingKernel ker;
    ker.dimension = 2;
    ker.internal_dim = 2;
    ker.range = 1;
    ker.add_block(1, 0, (kI * pauli(1) + pauli(3)) / 2.0);
    ker.add_block(-1, 0, (-kI * pauli(1) + pauli(3)) / 2.0);
    ker.add_block(0, 1, (kI * pauli(2) + pauli(3)) / 2.0);
    ker.add_block(0, -1, (-kI * pauli(2) + pauli(3)) / 2.0);
    ker.add_block(0, 0, u * pauli(3));
    return CylinderModel2D{std::move(ker), int(L), need(params, "mu")};
  }
  fail("UnknownModel", ErrKind::Precondition, "no builtin model named " + name);
}

Model model_from_config(const Config& cfg) {
  const std::string type = cfg.get_string("model.type");
  if (type == "custom") {
    HoppingKernel ker;
    ker.dimension = int(cfg.get_int("model.kernel.dimension"));
    ker.internal_dim = int(cfg.get_int("model.kernel.M"));
    ker.range = int(cfg.get_int("model.kernel.R"));
    const auto& rows = cfg.get("model.kernel.blocks");
    if (rows.kind != ConfigValue::Kind::Array)
      fail("ConfigType", ErrKind::Precondition, "model.kernel.blocks must be an array");
    // each entry: (d, row, col, re, im) in 1d; (d1, d2, row, col, re, im) in 2d
    const size_t stride = (ker.dimension == 1) ? 5 : 6;
    std::map<std::array<int, 2>, Eigen::MatrixXcd> blocks;
    for (const auto& row : rows.arr) {
      if (row.kind != ConfigValue::Kind::Array || row.arr.size() != stride)
        fail("ConfigType", ErrKind::Precondition, "bad kernel block entry");
      int d1 = int(row.arr[0].as_int());
      int d2 = (ker.dimension == 1) ? 0 : int(row.arr[1].as_int());
      size_t off = (ker.dimension == 1) ? 1 : 2;
      int r = int(row.arr[off].as_int()), c = int(row.arr[off + 1].as_int());
      cd v(row.arr[off + 2].as_double(), row.arr[off + 3].as_double());
      auto& b = blocks[{d1, d2}];
      if (b.size() == 0) b = Eigen::MatrixXcd::Zero(ker.internal_dim, ker.internal_dim);
      b(r, c) = v;
    }
    ker.blocks = std::move(blocks);
    ker.validate();
    long long L = cfg.get_int("model.L");
    check_odd_L(L);
    double mu = cfg.get_double("model.mu");
    if (ker.dimension == 1) return LatticeModel1D{std::move(ker), int(L), mu};
    return CylinderModel2D{std::move(ker), int(L), mu};
  }
  std::map<std::string, double> params;
  params["L"] = double(cfg.get_int("model.L"));
  params["mu"] = cfg.get_double("model.mu");
  for (const auto& key : cfg.keys_with_prefix("model.params."))
    params[key.substr(std::string("model.params.").size())] = cfg.get_double(key);
  return builtin_model(type, params);
}

std::string model_id(const Model& m) {
  std::ostringstream os;
  os << (is_2d(m) ? "cylinder2d" : "chain1d") << "_L" << model_sites(m) << "_M"
     << model_kernel(m).internal_dim << "_mu" << model_mu(m);
  return os.str();
}

Eigen::MatrixXcd dense_hamiltonian(const Model& m) {
  const int dim = one_particle_dim(m);
  if (dim > 8192) fail("DenseTooLarge", ErrKind::Precondition, "dense Hamiltonian over 8192 dims");
  const auto& ker = model_kernel(m);
  const int L = model_sites(m);
  const int M = ker.internal_dim;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  if (!is_2d(m)) {
    for (const auto& [d, b] : ker.blocks)
      for (int y = 0; y < L; ++y) {
        int x = ring_index(y + d[0], L);  // H(x; y) = block(x - y), periodized
        H.block(x * M, y * M, M, M) += b;
      }
    return H;
  }
  for (const auto& [d, b] : ker.blocks)
    for (int y1 = 0; y1 < L; ++y1)
      for (int y2 = 0; y2 < L; ++y2) {
        int x1 = ring_index(y1 + d[0], L);
        int x2 = y2 + d[1];
        if (x2 < 0 || x2 >= L) continue;
        H.block((x1 * L + x2) * M, (y1 * L + y2) * M, M, M) += b;
      }
  return H;
}

}  // namespace kubo

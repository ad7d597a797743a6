#include "kubo/perturb.hpp"

#include <fftw3.h>

#include <cmath>
#include <vector>

#include "kubo/errors.hpp"

namespace kubo {

namespace {
double mollify(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
}

double smooth_cutoff(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double a = mollify(2.0 - t), b = mollify(t - 1.0);
  return a / (a + b);
}

cd TestFunction::fourier(double q) const {
  if (!fourier_grid_) fail("NoFourier", ErrKind::Precondition, "test function has no Fourier cache");
  const auto& g = *fourier_grid_;
  const long long N = (long long(g.size()) - 1) / 2;
  const double u = q / dq_;
  if (std::abs(u) >= double(N - 2)) return cd(0.0, 0.0);
  const long long j0 = (long long)std::floor(u);
  const double t = u - double(j0);
  // Catmull-Rom through the four surrounding grid values
  const cd pm1 = g[size_t(j0 - 1 + N)], p0 = g[size_t(j0 + N)], p1 = g[size_t(j0 + 1 + N)],
           p2 = g[size_t(j0 + 2 + N)];
  const cd a0 = p0;
  const cd a1 = 0.5 * (p1 - pm1);
  const cd a2 = pm1 - 2.5 * p0 + 2.0 * p1 - 0.5 * p2;
  const cd a3 = 0.5 * (p2 - pm1) + 1.5 * (p0 - p1);
  return a0 + t * (a1 + t * (a2 + t * a3));
}

void TestFunction::build_fourier_cache() {
  // dense FFT quadrature: sample over 8x the support, zero-pad 16x for a fine
  // q-grid, keep the sub-grid where the transform is above noise
  const double S = std::max(support_radius, 1e-12);
  const size_t n0 = size_t(1) << 16;
  const size_t npad = size_t(1) << 20;
  const double x_lo = -8.0 * S;
  const double len = 16.0 * S;
  const double dx = len / double(n0);
  std::vector<cd> buf(npad, cd(0, 0));
  for (size_t i = 0; i < n0; ++i) buf[i] = f1_(x_lo + dx * double(i));
  fftw_plan plan = fftw_plan_dft_1d(int(npad), reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                    FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double dq = 2.0 * kPi / (double(npad) * dx);
  // mu_hat(q_j) = dx * e^{-i q_j x_lo} * FFT_j
  const long long half = (long long)npad / 2;
  long long reach = 16;  // keep at least a few points
  for (long long j = half - 1; j >= 16; --j) {
    if (std::abs(buf[size_t(j)]) * dx > 1e-17 || std::abs(buf[size_t(npad - j)]) * dx > 1e-17) {
      reach = j;
      break;
    }
  }
  auto grid = std::make_shared<std::vector<cd>>(size_t(2 * reach + 1));
  for (long long j = -reach; j <= reach; ++j) {
    const size_t idx = size_t(j >= 0 ? j : j + (long long)npad);
    const double q = dq * double(j);
    (*grid)[size_t(j + reach)] = dx * buf[idx] * std::exp(-kI * q * x_lo);
  }
  fourier_grid_ = std::move(grid);
  dq_ = dq;
  q_max_ = dq * double(reach - 2);
}

TestFunction TestFunction::bump(double center, double half_width, double amplitude) {
  if (half_width <= 0) fail("BumpWidth", ErrKind::Precondition, "half_width must be positive");
  TestFunction f;
  f.support_radius = std::abs(center) + half_width;
  f.f1_ = [center, half_width, amplitude](double x) {
    const double z = (x - center) / half_width;
    if (std::abs(z) >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - z * z));
  };
  f.build_fourier_cache();
  return f;
}

TestFunction TestFunction::edge_bump(double center, double half_width, double amplitude,
                                     double x2_width) {
  TestFunction f = bump(center, half_width, amplitude);
  f.two_dimensional = true;
  f.support_radius_x2 = x2_width;
  f.f2_ = [x2_width](double x2) {
    if (x2 < 0.0) return 0.0;
    return smooth_cutoff(1.0 + x2 / x2_width);
  };
  return f;
}

EulerScaling EulerScaling::make(double eta, double a, double alpha) {
  if (eta <= 0 || a <= 0) fail("ScalingSign", ErrKind::Precondition, "eta and a must be positive");
  if (alpha <= 0 || alpha >= 1) fail("AlphaRange", ErrKind::Precondition, "alpha must be in (0,1)");
  return {eta, a, a * eta, alpha};
}

double PeriodizedPotential::value(int x, int x2) const {
  if (x2 < 0 || x2 >= rows) return 0.0;
  return samples(ring_index(x, L), x2);
}

namespace {

void dft_columns(Eigen::MatrixXd const& samples, Eigen::MatrixXcd& out) {
  const int L = int(samples.rows());
  const int rows = int(samples.cols());
  out.resize(L, rows);
  std::vector<cd> buf(size_t(L));
  fftw_plan plan = fftw_plan_dft_1d(L, reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                    FFTW_ESTIMATE);
  for (int c = 0; c < rows; ++c) {
    for (int i = 0; i < L; ++i) buf[size_t(i)] = samples(i, c);
    fftw_execute(plan);
    for (int i = 0; i < L; ++i) out(i, c) = buf[size_t(i)];
  }
  fftw_destroy_plan(plan);
}

}  // namespace

PeriodizedPotential periodize(const TestFunction& f, const EulerScaling& s, int L) {
  if (s.theta * L <= 2.0 * f.support_radius)
    fail("SupportWrap", ErrKind::Precondition,
         "theta*L = " + std::to_string(s.theta * L) + " does not exceed twice the support radius");
  PeriodizedPotential pot;
  pot.L = L;
  pot.theta = s.theta;
  if (!f.two_dimensional) {
    pot.rows = 1;
    pot.samples.resize(L, 1);
    for (int i = 0; i < L; ++i) {
      const int x = ring_coord(i, L);
      double v = 0.0;  // image sum, truncated when the tail is below 1e-14
      for (int n = 0;; ++n) {
        const double up = f.eval(s.theta * (x + double(n) * L));
        const double dn = n == 0 ? 0.0 : f.eval(s.theta * (x - double(n) * L));
        v += up + dn;
        if (n > 0 && std::abs(up) + std::abs(dn) < 1e-14) break;
        if (n > 64) break;
      }
      pot.samples(i, 0) = v;
    }
  } else {
    const int rows = std::min(L, int(std::ceil(f.support_radius_x2 / s.theta)) + 2);
    pot.rows = rows;
    pot.samples.resize(L, rows);
    for (int x2 = 0; x2 < rows; ++x2)
      for (int i = 0; i < L; ++i) {
        const int x = ring_coord(i, L);
        double v = 0.0;
        for (int n = 0;; ++n) {
          const double up = f.eval2(s.theta * (x + double(n) * L), s.theta * x2);
          const double dn = n == 0 ? 0.0 : f.eval2(s.theta * (x - double(n) * L), s.theta * x2);
          v += up + dn;
          if (n > 0 && std::abs(up) + std::abs(dn) < 1e-14) break;
          if (n > 64) break;
        }
        pot.samples(i, x2) = v;
      }
  }
  dft_columns(pot.samples, pot.fourier);
  return pot;
}

PeriodizedPotential apply_momentum_cutoff(const PeriodizedPotential& pot, const EulerScaling& s) {
  PeriodizedPotential out = pot;
  out.cutoff_applied = true;
  out.cutoff_alpha = s.alpha;
  const int L = pot.L;
  const double scale = std::pow(s.theta, s.alpha - 1.0);
  for (int j = 0; j < L; ++j) {
    const double p = 2.0 * kPi * double(j) / double(L);
    const double chi = smooth_cutoff(scale * torus_dist(p));
    out.fourier.row(j) *= chi;
  }
  // position samples recomputed by inverse transform
  std::vector<cd> buf(size_t(L));
  fftw_plan plan = fftw_plan_dft_1d(L, reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
  for (int c = 0; c < out.rows; ++c) {
    for (int i = 0; i < L; ++i) buf[size_t(i)] = out.fourier(i, c);
    fftw_execute(plan);
    for (int i = 0; i < L; ++i) out.samples(i, c) = buf[size_t(i)].real() / double(L);
  }
  fftw_destroy_plan(plan);
  return out;
}

}  // namespace kubo

#include "kubo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kubo/errors.hpp"

namespace kubo {

namespace {

constexpr double kVelocityFloor = 1e-6;  // transversality threshold, energy*site

struct EigK {
  Eigen::VectorXd evals;
  Eigen::MatrixXcd evecs;
};

EigK diag_fiber(const Model& model, double k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(build_fiber(model, k).matrix);
  if (es.info() != Eigen::Success)
    fail("NumericalFailure", ErrKind::Numerical, "fiber diagonalization failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// permutation matching cur columns to prev columns by max |overlap|
std::vector<int> match_branches(const Eigen::MatrixXcd& prev, const Eigen::MatrixXcd& cur,
                                const Eigen::VectorXd& prev_e, const Eigen::VectorXd& cur_e) {
  const int n = int(prev.cols());
  Eigen::MatrixXd ov = (prev.adjoint() * cur).cwiseAbs();
  std::vector<int> assign(n, -1);
  std::vector<bool> used(n, false);
  // greedy by descending overlap; ties broken by energy proximity
  std::vector<std::tuple<double, double, int, int>> cands;
  cands.reserve(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cands.emplace_back(ov(i, j), -std::abs(prev_e(i) - cur_e(j)), i, j);
  std::sort(cands.begin(), cands.end(), std::greater<>());
  int placed = 0;
  for (const auto& [o, de, i, j] : cands) {
    if (assign[i] >= 0 || used[j]) continue;
    assign[i] = j;
    used[j] = true;
    if (++placed == n) break;
  }
  return assign;
}

}  // namespace

BandStructure band_structure(const Model& model, int k_count) {
  if (k_count < 8) fail("KCount", ErrKind::Precondition, "k_count must be >= 8");
  BandStructure bs;
  bs.k_grid.resize(k_count);
  const int n = fiber_dim(model);
  bs.energies.resize(n, k_count);
  bs.vectors.resize(k_count);
  for (int ik = 0; ik < k_count; ++ik) {
    const double k = 2.0 * kPi * ik / k_count;
    bs.k_grid[ik] = k;
    EigK e = diag_fiber(model, k);
    if (ik == 0) {
      bs.energies.col(0) = e.evals;
      bs.vectors[0] = e.evecs;
      continue;
    }
    auto assign = match_branches(bs.vectors[ik - 1], e.evecs, bs.energies.col(ik - 1), e.evals);
    Eigen::MatrixXcd v(n, n);
    for (int i = 0; i < n; ++i) {
      bs.energies(i, ik) = e.evals(assign[i]);
      v.col(i) = e.evecs.col(assign[i]);
    }
    bs.vectors[ik] = std::move(v);
  }
  return bs;
}

BranchPoint eval_branch(const Model& model, double k, const Eigen::VectorXcd& ref) {
  EigK e = diag_fiber(model, k);
  const int n = int(e.evals.size());
  int best = 0;
  double best_ov = -1.0;
  for (int j = 0; j < n; ++j) {
    const double ov = std::abs((ref.adjoint() * e.evecs.col(j))(0, 0));
    if (ov > best_ov) {
      best_ov = ov;
      best = j;
    }
  }
  double nearest = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j)
    if (j != best) nearest = std::min(nearest, std::abs(e.evals(j) - e.evals(best)));
  return {e.evals(best), e.evecs.col(best), nearest};
}

namespace {

// bisection for e(k) - mu = 0 on a tracked branch between grid neighbours
FermiPoint locate_crossing(const Model& model, double ka, double kb, const Eigen::VectorXcd& ref,
                           double mu, double tol) {
  Eigen::VectorXcd track = ref;
  double ea = eval_branch(model, ka, track).energy - mu;
  for (int it = 0; it < 200; ++it) {
    const double km = 0.5 * (ka + kb);
    BranchPoint bp = eval_branch(model, km, track);
    track = bp.vec;
    const double em = bp.energy - mu;
    if (std::abs(em) <= tol * 0.5 || (kb - ka) < 1e-15) break;
    if ((em > 0) == (ea > 0)) {
      ka = km;
      ea = em;
    } else {
      kb = km;
    }
  }
  const double kf = 0.5 * (ka + kb);
  BranchPoint at = eval_branch(model, kf, track);
  FermiPoint fp;
  fp.k_F = kf;
  fp.eigvec = at.vec;
  if (at.nearest_other < 10.0 * tol)
    fail("DegeneracyViolated", ErrKind::Precondition,
         "crossing eigenvalue degenerate at k_F=" + std::to_string(kf));
  // velocity: centred difference with one Richardson step on the tracked branch
  const double h = 1e-4;
  auto slope = [&](double hh) {
    const double ep = eval_branch(model, kf + hh, at.vec).energy;
    const double em2 = eval_branch(model, kf - hh, at.vec).energy;
    return (ep - em2) / (2.0 * hh);
  };
  const double vh = slope(h), vh2 = slope(h / 2.0);
  fp.velocity = (4.0 * vh2 - vh) / 3.0;
  fp.velocity_fh = (at.vec.adjoint() * fiber_derivative(model, kf) * at.vec)(0, 0).real();
  return fp;
}

}  // namespace

FermiData find_fermi_points(const Model& model, double delta, double tol) {
  if (delta <= 0) fail("GapWindow", ErrKind::Precondition, "delta must be positive");
  const double mu = model_mu(model);
  const int n = fiber_dim(model);
  const int nk = is_2d(model) ? 384 : 1024;
  BandStructure bs = band_structure(model, nk);
  FermiData out;
  const double dk = 2.0 * kPi / nk;
  for (int br = 0; br < n; ++br) {
    // only branches entering the window matter
    double emin = bs.energies.row(br).minCoeff(), emax = bs.energies.row(br).maxCoeff();
    if (emax < mu - delta || emin > mu + delta) continue;
    for (int ik = 0; ik < nk; ++ik) {
      const int jk = (ik + 1) % nk;
      const int hk = (ik - 1 + nk) % nk;
      const double ea = bs.energies(br, ik) - mu;
      const double eb = bs.energies(br, jk) - mu;
      const double ep = bs.energies(br, hk) - mu;
      const double ka = bs.k_grid[ik], kb = bs.k_grid[ik] + dk;
      if ((ea <= 0 && eb > 0) || (ea >= 0 && eb < 0)) {
        if (ea == 0.0 && eb == 0.0) continue;
        FermiPoint fp = locate_crossing(model, ka, kb, bs.vectors[ik].col(br), mu, tol);
        fp.band_index = br;
        if (std::abs(fp.velocity) < kVelocityFloor)
          fail("TransversalityViolated", ErrKind::Precondition,
               "zero Fermi velocity at k_F=" + std::to_string(fp.k_F));
        out.points.push_back(std::move(fp));
      } else if ((ep > 0) == (eb > 0) && std::abs(ea) <= std::abs(eb) && std::abs(ea) <= std::abs(ep) &&
                 std::abs(ea) < std::min(delta, 64.0 * tol + dk * dk)) {
        // tangency probe: local minimum of |e - mu| without a sign change
        double lo = ka - dk, hi = ka + dk;
        Eigen::VectorXcd ref = bs.vectors[ik].col(br);
        for (int it = 0; it < 80 && (hi - lo) > 1e-13; ++it) {
          const double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
          const double f1 = std::abs(eval_branch(model, m1, ref).energy - mu);
          const double f2 = std::abs(eval_branch(model, m2, ref).energy - mu);
          if (f1 < f2) hi = m2; else lo = m1;
        }
        const double km = 0.5 * (lo + hi);
        BranchPoint bp = eval_branch(model, km, ref);
        if (std::abs(bp.energy - mu) <= tol)
          fail("TransversalityViolated", ErrKind::Precondition,
               "band tangent to mu at k=" + std::to_string(km));
      }
    }
  }
  // dedupe (ring wraparound can double-count the same root)
  std::sort(out.points.begin(), out.points.end(),
            [](const FermiPoint& a, const FermiPoint& b) { return a.k_F < b.k_F; });
  std::vector<FermiPoint> uniq;
  for (auto& p : out.points) {
    if (!uniq.empty() && torus_dist(p.k_F - uniq.back().k_F) < 1e-8 && p.band_index == uniq.back().band_index)
      continue;
    uniq.push_back(std::move(p));
  }
  out.points = std::move(uniq);
  for (size_t i = 0; i < out.points.size(); ++i) out.points[i].omega = int(i);
  return out;
}

FermiData classify_edge_modes(const CylinderModel2D& model, FermiData fermi, int decay_fit_window) {
  const int M = model.kernel.internal_dim;
  const int W = model.sites;
  const int w = std::min(decay_fit_window, W / 2);
  if (w < 4) fail("FitWindow", ErrKind::Precondition, "decay_fit_window too small");
  for (auto& p : fermi.points) {
    Eigen::VectorXd weight(W);
    for (int x2 = 0; x2 < W; ++x2) weight(x2) = p.eigvec.segment(x2 * M, M).squaredNorm();
    auto fit = [&](bool from_lower) {
      // least squares on log w(x2) over the window; returns (slope, residual)
      std::vector<double> xs, ys;
      for (int i = 0; i < w; ++i) {
        const int x2 = from_lower ? i : W - 1 - i;
        if (weight(x2) < 1e-280) break;
        xs.push_back(i);
        ys.push_back(std::log(weight(x2)));
      }
      if (xs.size() < 4) return std::pair<double, double>(0.0, 1e300);
      const size_t m = xs.size();
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (size_t i = 0; i < m; ++i) { sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i]; }
      const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      const double icpt = (sy - slope * sx) / m;
      double res = 0;
      for (size_t i = 0; i < m; ++i) {
        const double d = ys[i] - (icpt + slope * xs[i]);
        res += d * d;
      }
      return std::pair<double, double>(slope, std::sqrt(res / m));
    };
    auto [slo, rlo] = fit(true);
    auto [shi, rhi] = fit(false);
    const double res_max = 1.0;  // log-scale residual threshold for "exponential"
    const bool lo_ok = slo < -1e-3 && rlo < res_max;
    const bool hi_ok = shi < -1e-3 && rhi < res_max;
    if (lo_ok && (!hi_ok || rlo <= rhi)) {
      p.side = EdgeSide::Lower;
      p.decay_rate = -slo / 2.0;  // amplitude rate: |xi| ~ e^{-c x2}, weight ~ e^{-2c x2}
    } else if (hi_ok) {
      p.side = EdgeSide::Upper;
      p.decay_rate = -shi / 2.0;
    } else {
      fail("AssumptionBViolated", ErrKind::Precondition,
           "state at k_F=" + std::to_string(p.k_F) + " is not edge-localized");
    }
  }
  return fermi;
}

int check_net_chirality(const FermiData& fermi) {
  int s = 0;
  for (const auto& p : fermi.points) s += (p.velocity > 0) ? 1 : -1;
  return s;
}

double default_gap_window(const Model& model, int k_count) {
  const double mu = model_mu(model);
  BandStructure bs = band_structure(model, k_count);
  const int n = int(bs.energies.rows());
  double dist = std::numeric_limits<double>::infinity();
  for (int br = 0; br < n; ++br) {
    const double emin = bs.energies.row(br).minCoeff();
    const double emax = bs.energies.row(br).maxCoeff();
    if (emin > mu) dist = std::min(dist, emin - mu);
    else if (emax < mu) dist = std::min(dist, mu - emax);
    else {
      // crossing branch: its own band edges
      dist = std::min(dist, mu - emin);
      dist = std::min(dist, emax - mu);
    }
  }
  if (!std::isfinite(dist) || dist <= 0) return 1.0;
  return std::min(1.0, dist / 2.0);
}

}  // namespace kubo

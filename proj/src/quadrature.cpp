#include "kubo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "kubo/errors.hpp"

namespace kubo {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (QUADPACK dqk15)
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.0};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct GK {
  cd kronrod;
  cd gauss;
};

GK gk15(const std::function<cd(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  GK r{cd(0, 0), cd(0, 0)};
  const cd fc = f(c);
  r.kronrod = kWgk[7] * fc;
  r.gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const cd fp = f(c + h * kXgk[j]);
    const cd fm = f(c - h * kXgk[j]);
    r.kronrod += kWgk[j] * (fp + fm);
    if (j % 2 == 1) r.gauss += kWg[j / 2] * (fp + fm);
  }
  r.kronrod *= h;
  r.gauss *= h;
  return r;
}

struct Interval {
  double a, b;
  cd val;
  double err;
  bool operator<(const Interval& o) const { return err < o.err; }
};

}  // namespace

QuadResult integrate_1d(const std::function<cd(double)>& f, double a, double b, double abs_tol,
                        int max_intervals) {
  QuadResult out;
  if (!(b > a)) return out;
  std::priority_queue<Interval> q;
  cd total(0, 0);
  double total_err = 0;
  auto push = [&](double lo, double hi) {
    GK g = gk15(f, lo, hi);
    out.evals += 15;
    const double e = std::abs(g.kronrod - g.gauss);
    q.push({lo, hi, g.kronrod, e});
    total += g.kronrod;
    total_err += e;
  };
  push(a, b);
  int n = 1;
  while (total_err > abs_tol && n < max_intervals) {
    Interval w = q.top();
    const double m = 0.5 * (w.a + w.b);
    if (m <= w.a || m >= w.b) break;  // precision floor
    q.pop();
    total -= w.val;
    total_err -= w.err;
    push(w.a, m);
    push(m, w.b);
    ++n;
  }
  // recompute aggregates in deterministic (sorted) order
  std::vector<Interval> ivs;
  while (!q.empty()) {
    ivs.push_back(q.top());
    q.pop();
  }
  std::sort(ivs.begin(), ivs.end(), [](const Interval& x, const Interval& y) { return x.a < y.a; });
  total = cd(0, 0);
  total_err = 0;
  for (const auto& iv : ivs) {
    total += iv.val;
    total_err += iv.err;
  }
  out.value = total;
  out.error = total_err;
  out.converged = total_err <= abs_tol;
  return out;
}

double integrate_1d_real(const std::function<double(double)>& f, double a, double b, double abs_tol,
                         int max_intervals) {
  return integrate_1d([&](double x) { return cd(f(x), 0.0); }, a, b, abs_tol, max_intervals)
      .value.real();
}

namespace {

struct Cell {
  Rect r;
  cd val;
  double err;
  bool operator<(const Cell& o) const { return err < o.err; }
};

// tensor GK15: kronrod 15x15 with embedded gauss 7x7
void gk2d(const std::function<cd(double, double)>& f, const Rect& r, cd& kron, cd& gauss) {
  const double cx = 0.5 * (r.x0 + r.x1), hx = 0.5 * (r.x1 - r.x0);
  const double cy = 0.5 * (r.y0 + r.y1), hy = 0.5 * (r.y1 - r.y0);
  double nx[15], wxk[15], wxg[15];
  double ny[15], wyk[15], wyg[15];
  for (int j = 0; j < 7; ++j) {
    nx[j] = cx - hx * kXgk[j];
    nx[14 - j] = cx + hx * kXgk[j];
    wxk[j] = wxk[14 - j] = kWgk[j];
    wxg[j] = wxg[14 - j] = (j % 2 == 1) ? kWg[j / 2] : 0.0;
    ny[j] = cy - hy * kXgk[j];
    ny[14 - j] = cy + hy * kXgk[j];
    wyk[j] = wyk[14 - j] = kWgk[j];
    wyg[j] = wyg[14 - j] = (j % 2 == 1) ? kWg[j / 2] : 0.0;
  }
  nx[7] = cx;
  wxk[7] = kWgk[7];
  wxg[7] = kWg[3];
  ny[7] = cy;
  wyk[7] = kWgk[7];
  wyg[7] = kWg[3];
  kron = cd(0, 0);
  gauss = cd(0, 0);
  for (int iy = 0; iy < 15; ++iy) {
    cd rowk(0, 0), rowg(0, 0);
    for (int ix = 0; ix < 15; ++ix) {
      const cd v = f(nx[ix], ny[iy]);
      rowk += wxk[ix] * v;
      rowg += wxg[ix] * v;
    }
    kron += wyk[iy] * rowk;
    gauss += wyg[iy] * rowg;
  }
  kron *= hx * hy;
  gauss *= hx * hy;
}

}  // namespace

QuadResult integrate_2d(const std::function<cd(double, double)>& f, Rect domain,
                        std::span<const std::array<double, 2>> hot_points, double abs_tol,
                        size_t max_cells, bool allow_partial) {
  QuadResult out;
  // initial partition: grid lines through every interior hot coordinate
  std::set<double> xs{domain.x0, domain.x1}, ys{domain.y0, domain.y1};
  for (const auto& h : hot_points) {
    if (h[0] > domain.x0 + 1e-300 && h[0] < domain.x1) xs.insert(h[0]);
    if (h[1] > domain.y0 + 1e-300 && h[1] < domain.y1) ys.insert(h[1]);
  }
  std::priority_queue<Cell> q;
  cd total(0, 0);
  double total_err = 0;
  size_t ncells = 0;
  auto push = [&](const Rect& r) {
    if (r.x1 <= r.x0 || r.y1 <= r.y0) return;
    cd k, g;
    gk2d(f, r, k, g);
    out.evals += 225;
    double e = std::abs(k - g);
    q.push({r, k, e});
    total += k;
    total_err += e;
    ++ncells;
  };
  std::vector<double> xv(xs.begin(), xs.end()), yv(ys.begin(), ys.end());
  for (size_t i = 0; i + 1 < xv.size(); ++i)
    for (size_t j = 0; j + 1 < yv.size(); ++j) push({xv[i], xv[i + 1], yv[j], yv[j + 1]});

  while (total_err > abs_tol && ncells < max_cells) {
    Cell w = q.top();
    q.pop();
    total -= w.val;
    total_err -= w.err;
    --ncells;
    const double mx = 0.5 * (w.r.x0 + w.r.x1), my = 0.5 * (w.r.y0 + w.r.y1);
    if (mx <= w.r.x0 || mx >= w.r.x1 || my <= w.r.y0 || my >= w.r.y1) {
      q.push(w);  // cell at precision floor
      total += w.val;
      total_err += w.err;
      ++ncells;
      break;
    }
    push({w.r.x0, mx, w.r.y0, my});
    push({mx, w.r.x1, w.r.y0, my});
    push({w.r.x0, mx, my, w.r.y1});
    push({mx, w.r.x1, my, w.r.y1});
  }
  // recompute aggregates in deterministic order
  total = cd(0, 0);
  total_err = 0;
  std::vector<Cell> cells;
  cells.reserve(ncells);
  while (!q.empty()) {
    cells.push_back(q.top());
    q.pop();
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.r.x0 != b.r.x0) return a.r.x0 < b.r.x0;
    if (a.r.y0 != b.r.y0) return a.r.y0 < b.r.y0;
    if (a.r.x1 != b.r.x1) return a.r.x1 < b.r.x1;
    return a.r.y1 < b.r.y1;
  });
  for (const auto& c : cells) {
    total += c.val;
    total_err += c.err;
  }
  out.value = total;
  out.error = total_err;
  out.converged = total_err <= abs_tol;
  if (!out.converged && !allow_partial)
    fail("QuadratureFailure", ErrKind::Numerical,
         "2d quadrature reached " + std::to_string(cells.size()) + " cells with error " +
             std::to_string(total_err) + " > tol " + std::to_string(abs_tol));
  return out;
}

}  // namespace kubo

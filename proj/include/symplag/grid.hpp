#pragma once
// Uniform rectangular grids over the parameter plane z = x + i y, finite
// difference stencils, and a small data-parallel helper.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace symplag {

struct GridGeom {
  int nx = 0, ny = 0;
  double x0 = 0, y0 = 0, dx = 0, dy = 0;

  double x(int i) const { return x0 + i * dx; }
  double y(int j) const { return y0 + j * dy; }
  std::complex<double> z(int i, int j) const { return {x(i), y(j)}; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

  void validate() const {
    if (nx < 1 || ny < 1) throw ConfigError("empty grid");
    if (!(dx > 0) || !(dy > 0)) throw ConfigError("grid spacing must be positive");
    if (!std::isfinite(x0) || !std::isfinite(y0)) throw ConfigError("grid origin not finite");
  }
  bool same_as(const GridGeom& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && dx == o.dx && dy == o.dy;
  }
  static GridGeom square(int n, double a, double b) { return {n, n, a, a, (b - a) / (n - 1), (b - a) / (n - 1)}; }
};

inline void require_same(const GridGeom& a, const GridGeom& b) {
  if (!a.same_as(b)) throw GeometryMismatch("grids do not share geometry");
}

// Node (i, j) sits at (x0 + i dx, y0 + j dy); storage is i-major.
template <class T>
struct Grid {
  GridGeom geom;
  std::vector<T> v;

  Grid() = default;
  explicit Grid(const GridGeom& g, const T& fill = T{}) : geom(g), v(g.size(), fill) {}

  int nx() const { return geom.nx; }
  int ny() const { return geom.ny; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * geom.ny + j; }
  T& operator()(int i, int j) { return v[index(i, j)]; }
  const T& operator()(int i, int j) const { return v[index(i, j)]; }
};

using ComplexGrid = Grid<std::complex<double>>;
using RealGrid = Grid<double>;

// ---- parallelism -----------------------------------------------------------

// Worker cap from SYMPLAG_THREADS, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("SYMPLAG_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(k) for k in [0, n) in contiguous chunks. f must not share mutable state.
template <class F>
void parallel_for(int n, F&& f) {
  const unsigned w = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max(n, 1)));
  if (w <= 1 || n < 64) {
    for (int k = 0; k < n; ++k) f(k);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex mu;
  std::exception_ptr err;
  const int chunk = (n + static_cast<int>(w) - 1) / static_cast<int>(w);
  for (unsigned t = 0; t < w; ++t) {
    const int lo = static_cast<int>(t) * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f, &mu, &err] {
      try {
        for (int k = lo; k < hi; ++k) f(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

template <class T, class F>
auto map(const Grid<T>& g, F&& f) {
  using U = std::decay_t<decltype(f(g.v[0]))>;
  Grid<U> out(g.geom);
  parallel_for(static_cast<int>(g.v.size()), [&](int k) { out.v[k] = f(g.v[k]); });
  return out;
}

template <class T, class U, class F>
auto zip(const Grid<T>& a, const Grid<U>& b, F&& f) {
  require_same(a.geom, b.geom);
  using V = std::decay_t<decltype(f(a.v[0], b.v[0]))>;
  Grid<V> out(a.geom);
  parallel_for(static_cast<int>(a.v.size()), [&](int k) { out.v[k] = f(a.v[k], b.v[k]); });
  return out;
}

// Sup norm of |value| over nodes at least `margin` away from every edge.
template <class T>
double max_abs(const Grid<T>& g, int margin = 0) {
  double m = 0;
  for (int i = margin; i < g.nx() - margin; ++i)
    for (int j = margin; j < g.ny() - margin; ++j) m = std::max(m, static_cast<double>(std::abs(g(i, j))));
  return m;
}

template <class T>
double min_abs(const Grid<T>& g) {
  double m = INFINITY;
  for (const auto& x : g.v) m = std::min(m, static_cast<double>(std::abs(x)));
  return m;
}

// ---- finite differences ----------------------------------------------------

// Weights of the first-derivative interpolation stencil at offset 0 for the
// given (distinct) node offsets: derivative of each Lagrange basis polynomial.
inline std::vector<double> fd_weights(const std::vector<double>& off) {
  const std::size_t n = off.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == k) continue;
      double prod = 1.0 / (off[k] - off[m]);
      for (std::size_t l = 0; l < n; ++l)
        if (l != k && l != m) prod *= (0.0 - off[l]) / (off[k] - off[l]);
      s += prod;
    }
    w[k] = s;
  }
  return w;
}

// Per-node stencils on a line of n nodes: centred (order+1)-point stencils in
// the interior, one-sided windows of the same width near the ends.
struct LineStencil {
  int order = 4;
  std::vector<int> start;
  std::vector<std::vector<double>> w;

  LineStencil(int n, int ord) : order(ord), start(n), w(n) {
    if (ord < 2 || ord % 2) throw ConfigError("stencil order must be even and >= 2");
    if (n < ord + 1) throw GridTooSmall("need at least " + std::to_string(ord + 1) + " nodes per axis, got " + std::to_string(n));
    const int half = ord / 2;
    for (int i = 0; i < n; ++i) {
      const int s = std::clamp(i - half, 0, n - ord - 1);
      std::vector<double> off(ord + 1);
      for (int k = 0; k <= ord; ++k) off[k] = s + k - i;
      start[i] = s;
      w[i] = fd_weights(off);
    }
  }
};

// Order 0 selects, per axis, the widest of orders 8, 6, 4 that fits the axis.
inline constexpr int kAutoOrder = 0;

inline int effective_order(int order, int n) { return order > 0 ? order : (n >= 9 ? 8 : n >= 7 ? 6 : 4); }

inline void require_stencil(const GridGeom& g, int order = kAutoOrder) {
  if (order <= 0) order = 4;
  if (g.nx < order + 1 || g.ny < order + 1)
    throw GridTooSmall("grid " + std::to_string(g.nx) + "x" + std::to_string(g.ny) + " smaller than stencil width " +
                       std::to_string(order + 1));
}

// Partial derivative along axis 0 (x) or 1 (y).
template <class T>
Grid<T> diff(const Grid<T>& f, int axis, int order = kAutoOrder) {
  require_stencil(f.geom, order);
  const int n = axis == 0 ? f.nx() : f.ny();
  const double h = axis == 0 ? f.geom.dx : f.geom.dy;
  const LineStencil st(n, effective_order(order, n));
  Grid<T> out(f.geom);
  parallel_for(f.nx(), [&](int i) {
    for (int j = 0; j < f.ny(); ++j) {
      const int c = axis == 0 ? i : j;
      const auto& w = st.w[c];
      const int s = st.start[c];
      T acc = (axis == 0 ? f(s, j) : f(i, s)) * w[0];
      for (int k = 1; k < static_cast<int>(w.size()); ++k) acc = acc + (axis == 0 ? f(s + k, j) : f(i, s + k)) * w[k];
      out(i, j) = acc * (1.0 / h);
    }
  });
  return out;
}

template <class T>
Grid<T> d_x(const Grid<T>& f, int order = kAutoOrder) { return diff(f, 0, order); }
template <class T>
Grid<T> d_y(const Grid<T>& f, int order = kAutoOrder) { return diff(f, 1, order); }

// Wirtinger derivatives d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2.
inline ComplexGrid d_z(const ComplexGrid& f, int order = kAutoOrder) {
  const auto fx = diff(f, 0, order), fy = diff(f, 1, order);
  return zip(fx, fy, [](auto a, auto b) { return 0.5 * (a - std::complex<double>(0, 1) * b); });
}
inline ComplexGrid d_zbar(const ComplexGrid& f, int order = kAutoOrder) {
  const auto fx = diff(f, 0, order), fy = diff(f, 1, order);
  return zip(fx, fy, [](auto a, auto b) { return 0.5 * (a + std::complex<double>(0, 1) * b); });
}

// Samples a function of (x, y) on the grid.
template <class F>
auto sample(const GridGeom& g, F&& f) {
  using T = std::decay_t<decltype(f(0.0, 0.0))>;
  Grid<T> out(g);
  parallel_for(g.nx, [&](int i) {
    for (int j = 0; j < g.ny; ++j) out(i, j) = f(g.x(i), g.y(j));
  });
  return out;
}

inline RealGrid real_part(const ComplexGrid& g) { return map(g, [](auto c) { return c.real(); }); }
inline RealGrid imag_part(const ComplexGrid& g) { return map(g, [](auto c) { return c.imag(); }); }
inline ComplexGrid to_complex(const RealGrid& g) { return map(g, [](double r) { return std::complex<double>(r, 0); }); }

}  // namespace symplag

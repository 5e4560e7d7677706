#pragma once
// Scalar fields on the parameter plane: invariant triples, integrability
// residuals, invariant differential forms, and the genericity operators that
// recover p from h.

#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include "grid.hpp"

namespace symplag {

using cplx = std::complex<double>;
inline constexpr cplx I_unit{0.0, 1.0};

struct InvariantTriple {
  ComplexGrid t, h, p;

  const GridGeom& geom() const { return t.geom; }

  // Shared geometry, stencil-sized grid, t never zero.
  void validate(const Tolerances& tol = {}) const {
    require_same(t.geom, h.geom);
    require_same(t.geom, p.geom);
    t.geom.validate();
    require_stencil(t.geom);
    const double m = min_abs(t);
    if (!(m > tol.rank)) throw ConfigError("t vanishes somewhere on the grid (min |t| = " + std::to_string(m) + ")");
  }
};

namespace detail {
inline ComplexGrid conj(const ComplexGrid& g) { return map(g, [](cplx c) { return std::conj(c); }); }
inline ComplexGrid abs2(const ComplexGrid& g) { return map(g, [](cplx c) { return cplx(std::norm(c), 0); }); }
}  // namespace detail

// ---- integrability ---------------------------------------------------------

struct InteqResidual {
  ComplexGrid r1, r2, r3;
};

// r1 = t_zb - conj(t) h
// r2 = p_zb - (2 h conj(h)_z + (|h|^2)_z)
// r3 = (conj(p) h - p conj(h)) - (h_zbzb - conj(h)_zz)
inline InteqResidual inteq_residual(const InvariantTriple& inv, int order = kAutoOrder) {
  require_same(inv.t.geom, inv.h.geom);
  require_same(inv.t.geom, inv.p.geom);
  require_stencil(inv.t.geom, order);
  const auto hb = detail::conj(inv.h);
  const auto t_zb = d_zbar(inv.t, order), p_zb = d_zbar(inv.p, order);
  const auto hb_z = d_z(hb, order), m_z = d_z(detail::abs2(inv.h), order);
  const auto h_zbzb = d_zbar(d_zbar(inv.h, order), order), hb_zz = d_z(hb_z, order);
  InteqResidual r{ComplexGrid(inv.geom()), ComplexGrid(inv.geom()), ComplexGrid(inv.geom())};
  for (std::size_t k = 0; k < r.r1.v.size(); ++k) {
    const cplx t = inv.t.v[k], h = inv.h.v[k], p = inv.p.v[k];
    r.r1.v[k] = t_zb.v[k] - std::conj(t) * h;
    r.r2.v[k] = p_zb.v[k] - (2.0 * h * hb_z.v[k] + m_z.v[k]);
    r.r3.v[k] = (std::conj(p) * h - p * std::conj(h)) - (h_zbzb.v[k] - hb_zz.v[k]);
  }
  return r;
}

struct DiffeqResidual {
  ComplexGrid r1;
  RealGrid r2, r3;
};

// Real-h system: r1 = t_zb - h conj(t), r2 = h_xy + 2 h p2, r3 = lap(p2) + 4 (h^2)_xy.
inline DiffeqResidual diffeq_residual(const ComplexGrid& t, const ComplexGrid& h, const RealGrid& p2,
                                      const Tolerances& tol = {}) {
  require_same(t.geom, h.geom);
  require_same(t.geom, p2.geom);
  require_stencil(t.geom);
  const double im = max_abs(imag_part(h));
  if (im > tol.resid) throw NonRealH("max |Im h| = " + std::to_string(im));
  const RealGrid hr = real_part(h);
  const RealGrid h2 = map(hr, [](double a) { return a * a; });
  const auto t_zb = d_zbar(t);
  const auto h_xy = d_x(d_y(hr)), h2_xy = d_x(d_y(h2));
  const auto lap = zip(d_x(d_x(p2)), d_y(d_y(p2)), [](double a, double b) { return a + b; });
  DiffeqResidual r{ComplexGrid(t.geom), RealGrid(t.geom), RealGrid(t.geom)};
  for (std::size_t k = 0; k < t.v.size(); ++k) {
    r.r1.v[k] = t_zb.v[k] - hr.v[k] * std::conj(t.v[k]);
    r.r2.v[k] = h_xy.v[k] + 2.0 * hr.v[k] * p2.v[k];
    r.r3.v[k] = lap.v[k] + 4.0 * h2_xy.v[k];
  }
  return r;
}

// ---- line quadrature ---------------------------------------------------------

// Cubic Lagrange interpolation on a window of four nodes around segment
// [k, k+1], clamped at the ends of the line.
struct CubicWindow {
  int start = 0;
  std::array<double, 4> w{};
};

inline int cubic_window_start(int k, int n) { return std::clamp(k - 1, 0, n - 4); }

// Interpolation weights at fractional position k + s.
inline CubicWindow cubic_at(int k, double s, int n) {
  CubicWindow c;
  c.start = cubic_window_start(k, n);
  const double x = k + s;
  for (int a = 0; a < 4; ++a) {
    double L = 1;
    for (int b = 0; b < 4; ++b)
      if (b != a) L *= (x - (c.start + b)) / static_cast<double>(a - b);
    c.w[a] = L;
  }
  return c;
}

inline constexpr double kGauss1 = 0.5 - 0.28867513459481288225;  // 1/2 - sqrt(3)/6
inline constexpr double kGauss2 = 0.5 + 0.28867513459481288225;

// Integrates a sampled function along a line with the 2-point Gauss rule
// applied to its cubic interpolant (fourth order). Returns cumulative values.
template <class T, class Get>
std::vector<T> cumulative_integral(int n, double h, Get&& get, const T& zero) {
  std::vector<T> out(n, zero);
  if (n < 4) throw GridTooSmall("line integration needs at least 4 nodes");
  for (int k = 0; k + 1 < n; ++k) {
    T seg = zero;
    for (double s : {kGauss1, kGauss2}) {
      const auto c = cubic_at(k, s, n);
      for (int a = 0; a < 4; ++a) seg = seg + get(c.start + a) * (0.5 * h * c.w[a]);
    }
    out[k + 1] = out[k] + seg;
  }
  return out;
}

// Integrates the exact-at-tolerance 1-form P dx + Q dy from the base node.
// column_first: along x = x0 in y, then along rows in x; else transposed.
inline RealGrid integrate_one_form(const RealGrid& P, const RealGrid& Q, bool column_first = true) {
  require_same(P.geom, Q.geom);
  const GridGeom& g = P.geom;
  RealGrid out(g, 0.0);
  if (column_first) {
    const auto col = cumulative_integral(g.ny, g.dy, [&](int j) { return Q(0, j); }, 0.0);
    parallel_for(g.ny, [&](int j) {
      const auto row = cumulative_integral(g.nx, g.dx, [&](int i) { return P(i, j); }, 0.0);
      for (int i = 0; i < g.nx; ++i) out(i, j) = col[j] + row[i];
    });
  } else {
    const auto row = cumulative_integral(g.nx, g.dx, [&](int i) { return P(i, 0); }, 0.0);
    parallel_for(g.nx, [&](int i) {
      const auto col = cumulative_integral(g.ny, g.dy, [&](int j) { return Q(i, j); }, 0.0);
      for (int j = 0; j < g.ny; ++j) out(i, j) = row[i] + col[j];
    });
  }
  return out;
}

// p1 with dp1 = [(p2)_y + 2(h^2)_x] dx - [(p2)_x + 2(h^2)_y] dy and p1(base) = 0.
// Adding a constant to the result moves along the associated family.
inline RealGrid p1_from_p2(const RealGrid& p2, const RealGrid& h, const Tolerances& tol = {}, bool column_first = true) {
  require_same(p2.geom, h.geom);
  require_stencil(p2.geom);
  const RealGrid h2 = map(h, [](double a) { return a * a; });
  const auto p2x = d_x(p2), p2y = d_y(p2), h2x = d_x(h2), h2y = d_y(h2);
  const auto P = zip(p2y, h2x, [](double a, double b) { return a + 2 * b; });
  const auto Q = zip(p2x, h2y, [](double a, double b) { return -(a + 2 * b); });
  const auto curl = zip(d_x(Q), d_y(P), [](double a, double b) { return a - b; });
  const double c = max_abs(curl);
  if (c > tol.resid) throw NotClosed("curl residual " + std::to_string(c));
  return integrate_one_form(P, Q, column_first);
}

// ---- invariant forms ---------------------------------------------------------

struct FormCoefficients {
  ComplexGrid fubini, hopf, thomsen, nform;
};

// Adapted-gauge coefficients: t^2, |t|^(2/3) h, |h|^2, |t|^2 h.
inline FormCoefficients form_coefficients(const InvariantTriple& inv) {
  require_same(inv.t.geom, inv.h.geom);
  FormCoefficients f{ComplexGrid(inv.geom()), ComplexGrid(inv.geom()), ComplexGrid(inv.geom()), ComplexGrid(inv.geom())};
  for (std::size_t k = 0; k < inv.t.v.size(); ++k) {
    const cplx t = inv.t.v[k], h = inv.h.v[k];
    f.fubini.v[k] = t * t;
    f.hopf.v[k] = std::cbrt(std::norm(t)) * h;  // |t|^(2/3) = (|t|^2)^(1/3)
    f.thomsen.v[k] = std::norm(h);
    f.nform.v[k] = std::norm(t) * h;
  }
  return f;
}

// d_zb(t^2) - 2 |t|^2 h
inline ComplexGrid dbar_fubini_residual(const InvariantTriple& inv, int order = kAutoOrder) {
  require_same(inv.t.geom, inv.h.geom);
  const auto t2 = map(inv.t, [](cplx t) { return t * t; });
  const auto d = d_zbar(t2, order);
  ComplexGrid r(inv.geom());
  for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = d.v[k] - 2.0 * std::norm(inv.t.v[k]) * inv.h.v[k];
  return r;
}

// ---- genericity ----------------------------------------------------------------

struct GenericityOps {
  ComplexGrid D2, D3, P2, D4;
};

// D2 = (conj(h)_zz - h_zbzb) / (2 conj(h))
// D3 = [(D2)_zb - 2 h conj(h)_z - (|h|^2)_z] / h
// P2 = (conj(h)_z / conj(h))_zb - (h_zb / h)_z
// D4 = conj(D3)_zb - (D3)_z - (conj(h)_z / conj(h)) D3 + (h_zb / h) conj(D3)
inline GenericityOps genericity_ops(const ComplexGrid& h, const Tolerances& tol = {}, int order = kAutoOrder) {
  require_stencil(h.geom, order);
  const double hm = min_abs(h);
  if (!(hm > tol.umbilic)) throw UmbilicPoint("min |h| = " + std::to_string(hm));
  const auto hb = detail::conj(h);
  const auto h_zb = d_zbar(h, order), hb_z = d_z(hb, order);
  const auto hb_zz = d_z(hb_z, order), h_zbzb = d_zbar(h_zb, order);
  const auto m_z = d_z(detail::abs2(h), order);
  const GridGeom& g = h.geom;

  GenericityOps o{ComplexGrid(g), ComplexGrid(g), ComplexGrid(g), ComplexGrid(g)};
  ComplexGrid lb(g), lh(g);  // conj(h)_z / conj(h), h_zb / h
  for (std::size_t k = 0; k < g.size(); ++k) {
    o.D2.v[k] = (hb_zz.v[k] - h_zbzb.v[k]) / (2.0 * hb.v[k]);
    lb.v[k] = hb_z.v[k] / hb.v[k];
    lh.v[k] = h_zb.v[k] / h.v[k];
  }
  const auto D2_zb = d_zbar(o.D2, order);
  for (std::size_t k = 0; k < g.size(); ++k)
    o.D3.v[k] = (D2_zb.v[k] - 2.0 * h.v[k] * hb_z.v[k] - m_z.v[k]) / h.v[k];
  const auto lb_zb = d_zbar(lb, order), lh_z = d_z(lh, order);
  const auto D3b = detail::conj(o.D3);
  const auto D3b_zb = d_zbar(D3b, order), D3_z = d_z(o.D3, order);
  for (std::size_t k = 0; k < g.size(); ++k) {
    o.P2.v[k] = lb_zb.v[k] - lh_z.v[k];
    o.D4.v[k] = D3b_zb.v[k] - D3_z.v[k] - lb.v[k] * o.D3.v[k] + lh.v[k] * D3b.v[k];
  }
  return o;
}

// 1 where h and P2 are both nonzero at tolerance, else 0.
inline Grid<int> is_generic(const InvariantTriple& inv, double tol_p2 = Tolerances{}.resid, const Tolerances& tol = {}) {
  Grid<int> out(inv.geom(), 0);
  if (min_abs(inv.h) <= tol.umbilic) {
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] = std::abs(inv.h.v[k]) > tol.umbilic;
    return out;
  }
  const auto ops = genericity_ops(inv.h, tol);
  for (std::size_t k = 0; k < out.v.size(); ++k)
    out.v[k] = std::abs(inv.h.v[k]) > tol.umbilic && std::abs(ops.P2.v[k]) > tol_p2;
  return out;
}

struct RecoveredP {
  RealGrid s;
  RealGrid s_imag;  // imaginary part of -D4/P2; zero when h is consistent
  ComplexGrid p;
};

// s = Re(-D4/P2), p = h s + D2(h). Refuses where P2 vanishes.
inline RecoveredP recover_p(const ComplexGrid& h, double tol_p2 = Tolerances{}.resid, const Tolerances& tol = {}) {
  const auto ops = genericity_ops(h, tol);
  std::size_t bad = 0;
  std::ostringstream first;
  for (int i = 0; i < h.nx(); ++i)
    for (int j = 0; j < h.ny(); ++j)
      if (!(std::abs(ops.P2(i, j)) > tol_p2)) {
        if (bad < 5) first << " (" << i << "," << j << ")";
        ++bad;
      }
  if (bad) throw NotGeneric(std::to_string(bad) + " nodes with P2 ~ 0, e.g." + first.str());
  RecoveredP r{RealGrid(h.geom), RealGrid(h.geom), ComplexGrid(h.geom)};
  for (std::size_t k = 0; k < h.v.size(); ++k) {
    const cplx s = -ops.D4.v[k] / ops.P2.v[k];
    r.s.v[k] = s.real();
    r.s_imag.v[k] = s.imag();
    r.p.v[k] = h.v[k] * s.real() + ops.D2.v[k];
  }
  return r;
}

// ---- applicability -------------------------------------------------------------

inline InvariantTriple shift_family(const InvariantTriple& inv, double lambda) {
  InvariantTriple out = inv;
  for (auto& p : out.p.v) p -= lambda;
  return out;
}

struct ApplicabilityResidual {
  RealGrid alignment;   // |Im(conj(w) h)|
  RealGrid holomorphy;  // |w_zb|
  RealGrid total() const { return zip(alignment, holomorphy, [](double a, double b) { return a + b; }); }
};

// Certifies a candidate quadratic differential w dz^2 against the Hopf data h.
inline ApplicabilityResidual applicability_residual(const ComplexGrid& h, const ComplexGrid& w) {
  require_same(h.geom, w.geom);
  const auto w_zb = d_zbar(w);
  ApplicabilityResidual r{RealGrid(h.geom), RealGrid(h.geom)};
  for (std::size_t k = 0; k < h.v.size(); ++k) {
    r.alignment.v[k] = std::abs((std::conj(w.v[k]) * h.v[k]).imag());
    r.holomorphy.v[k] = std::abs(w_zb.v[k]);
  }
  return r;
}

}  // namespace symplag

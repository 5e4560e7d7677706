#pragma once
// Closed-form example surfaces.
//
// Constant-invariant family: h = 1, p real constant, t from a separated ansatz
// solving t_zb = conj(t). Its Maurer-Cartan matrices commute, so the frame is
// exp(x A + y B) and the immersion has an explicit formula.
//
// Totally umbilic family: complex curves in C^2 obtained from the SL(2,C)
// system X^-1 dX = [[0, -i(p - lambda)], [1, 0]] dz with f = int X_1 dz.

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "cartan.hpp"

namespace symplag {

struct Section5Params {
  double p = 0;
  double c1 = 1, c2 = 1, a1 = 0, a2 = 0, m1 = 0, m2 = 0;

  void require_p_domain(double tol_rank = Tolerances{}.rank) const {
    if (!(std::abs(p - 2) > tol_rank) || !(std::abs(p + 2) > tol_rank))
      throw ParameterDomain("p = +-2 is excluded");
  }
  // Non-fatal issues with the ansatz constants.
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (a1 != 0) w.push_back("a1 != 0: the ansatz then misses t_zb = conj(t) by the constant -2 a1 in its real part");
    if (c1 == 0 && c2 == 0 && m1 == 0 && m2 == 0 && a1 == 0 && a2 == 0) w.push_back("all constants zero: t vanishes identically");
    return w;
  }
};

struct Section5Matrices {
  AffineAlgebra4 A, B;
};

inline Section5Matrices section5_AB(double p) {
  Mat4 A, B;
  A << 1, 0, p + 1, 0,
       0, -1, 0, -(p + 1),
       1, 0, -1, 0,
       0, -1, 0, 1;
  B << 0, -1, 0, 1 - p,
       -1, 0, 1 - p, 0,
       0, 1, 0, 1,
       1, 0, 1, 0;
  return {{Vec4::Zero(), SpAlgebra4::from_matrix(A)}, {Vec4::Zero(), SpAlgebra4::from_matrix(B)}};
}

// t = (v1 + w1) + i (v2 + w2) with
// v1 = c1 e^{2x} - a1, v2 = c2 e^{-2x} - a2,
// w1 = m1 e^{2y} + m2 e^{-2y} - a1, w2 = -m1 e^{2y} + m2 e^{-2y} + a2.
inline cplx section5_t(const Section5Params& q, double x, double y) {
  const double v1 = q.c1 * std::exp(2 * x) - q.a1, v2 = q.c2 * std::exp(-2 * x) - q.a2;
  const double w1 = q.m1 * std::exp(2 * y) + q.m2 * std::exp(-2 * y) - q.a1;
  const double w2 = -q.m1 * std::exp(2 * y) + q.m2 * std::exp(-2 * y) + q.a2;
  return {v1 + w1, v2 + w2};
}

// First two columns of exp(x A + y B). Square roots are taken over C so the
// same expressions cover |p| > 2, where the hyperbolic functions turn
// trigonometric; the imaginary parts cancel.
inline std::pair<Vec4, Vec4> section5_columns(double p, double x, double y) {
  Section5Params{p}.require_p_domain();
  const cplx sp = std::sqrt(cplx(2 + p)), sm = std::sqrt(cplx(2 - p)), s4 = std::sqrt(cplx(4 - p * p));
  const cplx ch = std::cosh(sp * x), sh = std::sinh(sp * x), cy = std::cosh(sm * y), sy = std::sinh(sm * y);
  const cplx X1[4] = {cy * (ch + sh / sp), -(sp * ch + p * sh) * sy / s4, cy * sh / sp, (sp * ch + 2.0 * sh) * sy / s4};
  const cplx X2[4] = {(-sp * ch + p * sh) * sy / s4, cy * (ch - sh / sp), (sp * ch - 2.0 * sh) * sy / s4, -cy * sh / sp};
  Vec4 a, b;
  for (int k = 0; k < 4; ++k) {
    a(k) = X1[k].real();
    b(k) = X2[k].real();
  }
  return {a, b};
}

// Explicit immersion for a1 = a2 = m1 = m2 = 0 (defined up to a constant).
inline Vec4 section5_f(const Section5Params& q, double x, double y) {
  q.require_p_domain();
  if (q.a1 != 0 || q.a2 != 0 || q.m1 != 0 || q.m2 != 0)
    throw ParameterDomain("the explicit immersion needs a1 = a2 = m1 = m2 = 0");
  const double p = q.p, c1 = q.c1, c2 = q.c2;
  const cplx sp = std::sqrt(cplx(p + 2)), s4 = std::sqrt(cplx(4 - p * p)), sm = std::sqrt(cplx(2 - p));
  const cplx R = std::sqrt(cplx((p + 2) * (4 - p * p)));
  const cplx cy = std::cosh(sm * y), sy = std::sinh(sm * y);
  const double e4 = std::exp(4 * x);
  const cplx A[4] = {-c1 * e4 * R * cy - c2 * (p * p - 4) * sy, -c1 * e4 * (p * p - 4) * sy - c2 * R * cy,
                     c1 * e4 * R * cy, c2 * R * cy};
  const cplx B[4] = {c1 * e4 * p * s4 * cy - c2 * (p - 2) * sp * sy, c1 * e4 * (p - 2) * sp * sy - c2 * p * s4 * cy,
                     -2.0 * c1 * e4 * s4 * cy - c2 * (p - 2) * sp * sy, c1 * e4 * (p - 2) * sp * sy + 2.0 * c2 * s4 * cy};
  const cplx pref = std::exp(-2 * x) / ((p - 2) * R);
  const cplx ch = std::cosh(sp * x), sh = std::sinh(sp * x);
  Vec4 f;
  for (int k = 0; k < 4; ++k) f(k) = (pref * (ch * A[k] + sh * B[k])).real();
  return f;
}

inline InvariantTriple section5_triple(const Section5Params& q, const GridGeom& g, double lambda = 0) {
  InvariantTriple inv{sample(g, [&](double x, double y) { return section5_t(q, x, y); }), ComplexGrid(g, cplx(1, 0)),
                      ComplexGrid(g, cplx(q.p - lambda, 0))};
  return inv;
}

inline ImmersionGrid section5_immersion_closed(const Section5Params& q, const GridGeom& g) {
  return sample(g, [&](double x, double y) { return section5_f(q, x, y); });
}

// ---- totally umbilic curves ------------------------------------------------------

using C2Grid = Grid<CVec2>;

struct UmbilicCurveSpec {
  ComplexGrid p_fn;  // holomorphic curvature datum
  double lambda = 0;
};

struct UmbilicCurve {
  C2Grid curve;
  Grid<CMat2> frame;
  std::vector<std::string> warnings;
};

// |f_z ^ f_zz| per node.
inline RealGrid flex_defect(const C2Grid& c) {
  require_stencil(c.geom);
  const ComplexGrid f1 = map(c, [](const CVec2& v) { return v(0); }), f2 = map(c, [](const CVec2& v) { return v(1); });
  const auto a1 = d_z(f1), a2 = d_z(f2), b1 = d_z(a1), b2 = d_z(a2);
  RealGrid r(c.geom);
  for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = std::abs(a1.v[k] * b2.v[k] - a2.v[k] * b1.v[k]);
  return r;
}

// Integrates the affine system d[[1,0],[f,X]] = [[1,0],[f,X]] [[0,0],[e1,M]] dz
// with X(base) = I, f(base) = 0. Holomorphic data make the result path independent.
inline UmbilicCurve umbilic_curve(const UmbilicCurveSpec& spec, const Tolerances& tol = {}) {
  const GridGeom& g = spec.p_fn.geom;
  require_stencil(g);
  const double hol = max_abs(d_zbar(spec.p_fn));
  if (hol > tol.resid) throw NotHolomorphic("max |p_zb| = " + std::to_string(hol));
  using M3 = Eigen::Matrix3cd;
  auto alg = [&](int i, int j) {
    M3 a = M3::Zero();
    a(1, 0) = 1;
    a(1, 2) = -I_unit * (spec.p_fn(i, j) - spec.lambda);
    a(2, 1) = 1;
    return a;
  };
  auto ax = [&](int i, int j) { return alg(i, j); };
  auto ay = [&](int i, int j) { return M3(I_unit * alg(i, j)); };
  const Grid<M3> S = sweep_grid(M3(M3::Identity()), g, ax, ay, true, [](M3&, int, int) {});
  UmbilicCurve out{C2Grid(g), Grid<CMat2>(g), {}};
  double det_err = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.curve.v[k] = S.v[k].block<2, 1>(1, 0);
    out.frame.v[k] = S.v[k].block<2, 2>(1, 1);
    det_err = std::max(det_err, std::abs(out.frame.v[k].determinant() - 1.0));
  }
  if (det_err > tol.group) out.warnings.push_back("determinant drift " + std::to_string(det_err));
  const RealGrid flex = flex_defect(out.curve);
  for (double v : flex.v)
    if (v < tol.rank) {
      out.warnings.push_back("FlexPoint: |f_z ^ f_zz| below tol_rank at some nodes");
      break;
    }
  return out;
}

// Real immersion of a complex curve under the C^2 = R^4 identification.
inline ImmersionGrid curve_immersion(const C2Grid& c) {
  return map(c, [](const CVec2& v) -> Vec4 { return from_c2(v); });
}

// The sampled curve (z, z^2 / 2).
inline C2Grid parabola_curve(const GridGeom& g) {
  return sample(g, [](double x, double y) -> CVec2 {
    const cplx z(x, y);
    return CVec2(z, 0.5 * z * z);
  });
}

}  // namespace symplag

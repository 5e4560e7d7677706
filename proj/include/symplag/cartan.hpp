#pragma once
// Moving frames along elliptic Lagrangian surfaces: Maurer-Cartan forms built
// from invariants, frame integration, frame reduction of a sampled immersion,
// invariant extraction, and congruence testing.
//
// Index conventions on the 5x5 algebra matrix M (row/col 0 is the affine slot):
//   tau^j      = M(j, 0)           j = 1, 2
//   alpha^i_j  = M(i, j)           i, j = 1, 2
//   beta^i_j   = M(i, j + 2)
//   gamma^i_j  = M(i + 2, j)

#include <atomic>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fields.hpp"
#include "lie.hpp"
#include "sympl_core.hpp"

namespace symplag {

// Theta = A dx + B dy at every node.
struct MaurerCartanField {
  Grid<Mat5> A, B;
  const GridGeom& geom() const { return A.geom; }
};

using ImmersionGrid = Grid<Vec4>;

struct FrameField {
  Grid<Mat5> S;
  double flatness_report = 0;  // max flatness residual of the integrated form
  double path_defect = 0;      // sup difference against the transposed sweep
  double max_defect = 0;       // worst symplectic defect after projection
  int projected_nodes = 0;
  std::vector<std::string> warnings;
  const GridGeom& geom() const { return S.geom; }
};

// ---- assembly ------------------------------------------------------------------

inline MaurerCartanField theta_from_invariants(const InvariantTriple& inv, int order = kAutoOrder) {
  require_same(inv.t.geom, inv.h.geom);
  require_same(inv.t.geom, inv.p.geom);
  require_stencil(inv.geom(), order);
  const GridGeom& g = inv.geom();
  const auto h_zb = d_zbar(inv.h, order);
  MaurerCartanField th{Grid<Mat5>(g, Mat5::Zero()), Grid<Mat5>(g, Mat5::Zero())};
  parallel_for(static_cast<int>(g.size()), [&](int k) {
    const cplx t = inv.t.v[k], h = inv.h.v[k], p = inv.p.v[k];
    const double t1 = t.real(), t2 = t.imag(), h1 = h.real(), h2 = h.imag(), m = std::norm(h);
    // upsilon = 2 Re(h_zb dz) ; rho = (p + |h|^2) dx + i (p - |h|^2) dy
    const double ups[2] = {2 * h_zb.v[k].real(), -2 * h_zb.v[k].imag()};
    const cplx rho[2] = {p + m, I_unit * (p - m)};
    const double tau1[2] = {t1, -t2}, tau2[2] = {-t2, -t1};
    const double al[2][2][2] = {{{h1, -h2}, {-h2, -h1}}, {{-h2, -h1}, {-h1, h2}}};
    const double ga[2][2][2] = {{{1, 0}, {0, 1}}, {{0, 1}, {-1, 0}}};
    for (int d = 0; d < 2; ++d) {
      Mat5& M = d == 0 ? th.A.v[k] : th.B.v[k];
      const double be[2][2] = {{ups[d] + rho[d].real(), -rho[d].imag()}, {-rho[d].imag(), ups[d] - rho[d].real()}};
      M(1, 0) = tau1[d];
      M(2, 0) = tau2[d];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          M(1 + i, 1 + j) = al[i][j][d];
          M(1 + i, 3 + j) = be[i][j];
          M(3 + i, 1 + j) = ga[i][j][d];
          M(3 + i, 3 + j) = -al[j][i][d];
        }
    }
  });
  return th;
}

// |d_x B - d_y A + [A, B]| per node (entrywise max).
inline RealGrid flatness_residual(const MaurerCartanField& th, int order = kAutoOrder) {
  const auto Bx = d_x(th.B, order), Ay = d_y(th.A, order);
  RealGrid r(th.geom());
  parallel_for(static_cast<int>(r.v.size()), [&](int k) {
    const Mat5& A = th.A.v[k];
    const Mat5& B = th.B.v[k];
    r.v[k] = (Bx.v[k] - Ay.v[k] + A * B - B * A).cwiseAbs().maxCoeff();
  });
  return r;
}

// ---- integration ---------------------------------------------------------------

inline double frame_defect(const Mat5& S) { return symplectic_defect(S.block<4, 4>(1, 1)); }

// Integrates dS = S Theta with fourth-order Magnus steps. Nodes whose
// symplectic defect exceeds tol.frame get Newton re-projection.
inline FrameField integrate_frame(const MaurerCartanField& th, const AffineSymplecticElement& S0 = {},
                                  const Tolerances& tol = {}) {
  const GridGeom& g = th.geom();
  require_same(g, th.B.geom);
  FrameField F;
  const RealGrid flat = flatness_residual(th);
  F.flatness_report = max_abs(flat);
  if (F.flatness_report > tol.flat)
    F.warnings.push_back("flatness residual " + std::to_string(F.flatness_report) + " exceeds tol_flat");

  std::atomic<int> projected{0};
  auto post = [&](Mat5& S, int, int) {
    if (!(S.cwiseAbs().maxCoeff() <= 1e12)) throw IntegrationBlowup("frame norm exceeded 1e12");
    double d = frame_defect(S);
    if (d > tol.frame) {
      ++projected;
      for (int it = 0; it < 3 && d > tol.frame; ++it) {
        S.block<4, 4>(1, 1) = symplectic_newton_step(S.block<4, 4>(1, 1));
        d = frame_defect(S);
      }
      if (d > 100 * tol.frame) throw FrameDefect("symplectic defect " + std::to_string(d) + " after projection");
    }
  };
  auto ax = [&](int i, int j) -> const Mat5& { return th.A(i, j); };
  auto ay = [&](int i, int j) -> const Mat5& { return th.B(i, j); };
  const Mat5 s0 = S0.matrix();
  F.S = sweep_grid(s0, g, ax, ay, true, post);
  const Grid<Mat5> T = sweep_grid(s0, g, ax, ay, false, post);
  for (std::size_t k = 0; k < g.size(); ++k) {
    F.path_defect = std::max(F.path_defect, (F.S.v[k] - T.v[k]).cwiseAbs().maxCoeff());
    const double d = frame_defect(F.S.v[k]);
    F.max_defect = std::max(F.max_defect, d);
  }
  F.projected_nodes = projected.load();
  return F;
}

inline ImmersionGrid immersion_from_frame(const Grid<Mat5>& S) {
  return map(S, [](const Mat5& m) -> Vec4 { return m.block<4, 1>(1, 0); });
}
inline ImmersionGrid immersion_from_frame(const FrameField& F) { return immersion_from_frame(F.S); }

// |Omega(f_x, f_y)| with fourth-order (central in the interior) partials.
inline RealGrid lagrangian_defect(const ImmersionGrid& m) {
  const auto fx = d_x(m), fy = d_y(m);
  return zip(fx, fy, [](const Vec4& a, const Vec4& b) { return std::abs(omega(a, b)); });
}

// 1 at nodes where df has numerical rank < 2.
inline Grid<int> singular_nodes(const ImmersionGrid& m, double tol_rank = Tolerances{}.rank) {
  const auto fx = d_x(m), fy = d_y(m);
  return zip(fx, fy, [&](const Vec4& a, const Vec4& b) {
    Eigen::Matrix<double, 4, 2> D;
    D << a, b;
    const auto sv = Eigen::JacobiSVD<Eigen::Matrix<double, 4, 2>>(D).singularValues();
    return static_cast<int>(!(sv(1) > tol_rank * std::max(1.0, sv(0))));
  });
}

// ---- numerical Maurer-Cartan form ----------------------------------------------

struct MCForm {
  Grid<Mat5> Ax, Ay;
};

inline MCForm maurer_cartan(const Grid<Mat5>& S, int order = kAutoOrder) {
  const auto Sx = d_x(S, order), Sy = d_y(S, order);
  MCForm out{Grid<Mat5>(S.geom), Grid<Mat5>(S.geom)};
  parallel_for(static_cast<int>(S.v.size()), [&](int k) {
    const Mat5 Si = affine_inverse(S.v[k]);
    out.Ax.v[k] = Si * Sx.v[k];
    out.Ay.v[k] = Si * Sy.v[k];
  });
  return out;
}

namespace detail {
// dz and dzbar coefficients of the real 1-form cx dx + cy dy.
inline cplx dz_part(cplx cx, cplx cy) { return 0.5 * (cx - I_unit * cy); }
inline cplx dzb_part(cplx cx, cplx cy) { return 0.5 * (cx + I_unit * cy); }
}  // namespace detail

// Complex 1-forms read from one algebra element (per direction).
struct FrameForms {
  cplx tau, omega, eta, rho;  // tau1 - i tau2, etc.
  double gamma_trace, alpha_trace, alpha_asym;
};

inline FrameForms frame_forms(const Mat5& M) {
  FrameForms f;
  f.tau = cplx(M(1, 0), -M(2, 0));
  f.omega = cplx(0.5 * (M(3, 1) - M(4, 2)), M(4, 1));
  f.eta = cplx(0.5 * (M(1, 1) - M(2, 2)), -0.5 * (M(2, 1) + M(1, 2)));
  f.rho = cplx(0.5 * (M(1, 3) - M(2, 4)), -M(2, 3));
  f.gamma_trace = M(3, 1) + M(4, 2);
  f.alpha_trace = M(1, 1) + M(2, 2);
  f.alpha_asym = M(2, 1) - M(1, 2);
  return f;
}

// Adapted-gauge diagnostics (sup norms over the checked region).
struct GaugeReport {
  double omega_dz = 0;     // |omega_z - 1|
  double omega_dzbar = 0;  // |omega_zb|
  double gamma_trace = 0;  // second-order condition
  double ell = 0;          // third-order condition |eta_zb|
  double alpha_trace = 0;
  double alpha_asym = 0;
  double tau_dzbar = 0;  // consequence of the structure equations
  double rho_dzbar = 0;  // |rho_zb - |h|^2|, likewise
  int margin = 0;        // boundary band excluded from the sup norms

  double worst_condition() const {
    return std::max({omega_dz, omega_dzbar, gamma_trace, ell, alpha_trace, alpha_asym});
  }
};

struct ExtractOptions {
  int order = kAutoOrder;  // stencil order for S^-1 dS
  int margin = 0;  // nodes excluded at each edge when checking the gauge
  bool check = true;
};

struct ExtractedInvariants {
  InvariantTriple inv;
  GaugeReport report;
  int t_sign = 1;  // -1 when the raw t was negated by the sign convention
};

// Reads (t, h, p) from an adapted frame field. The sign of t is fixed by
// Re t > 0 at the base node (Im t > 0 if Re t = 0), which makes the result
// independent of the frame sign ambiguity S -> -S.
inline ExtractedInvariants extract_invariants(const Grid<Mat5>& S, const ExtractOptions& opt = {},
                                              const Tolerances& tol = {}) {
  const GridGeom& g = S.geom;
  const MCForm mc = maurer_cartan(S, opt.order);
  ExtractedInvariants out{{ComplexGrid(g), ComplexGrid(g), ComplexGrid(g)}, {}};
  GaugeReport& r = out.report;
  r.margin = opt.margin;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const FrameForms fx = frame_forms(mc.Ax(i, j)), fy = frame_forms(mc.Ay(i, j));
      const cplx t = detail::dz_part(fx.tau, fy.tau);
      const cplx h = detail::dz_part(fx.eta, fy.eta);
      const cplx p = detail::dz_part(fx.rho, fy.rho);
      out.inv.t(i, j) = t;
      out.inv.h(i, j) = h;
      out.inv.p(i, j) = p;
      if (i < opt.margin || j < opt.margin || i >= g.nx - opt.margin || j >= g.ny - opt.margin) continue;
      auto up = [](double& a, double b) { a = std::max(a, std::abs(b)); };
      up(r.omega_dz, std::abs(detail::dz_part(fx.omega, fy.omega) - 1.0));
      up(r.omega_dzbar, std::abs(detail::dzb_part(fx.omega, fy.omega)));
      up(r.gamma_trace, std::max(std::abs(fx.gamma_trace), std::abs(fy.gamma_trace)));
      up(r.ell, std::abs(detail::dzb_part(fx.eta, fy.eta)));
      up(r.alpha_trace, std::max(std::abs(fx.alpha_trace), std::abs(fy.alpha_trace)));
      up(r.alpha_asym, std::max(std::abs(fx.alpha_asym), std::abs(fy.alpha_asym)));
      up(r.tau_dzbar, std::abs(detail::dzb_part(fx.tau, fy.tau)));
      up(r.rho_dzbar, std::abs(detail::dzb_part(fx.rho, fy.rho) - std::norm(h)));
    }
  const cplx t0 = out.inv.t(0, 0);
  const bool flip = t0.real() < 0 || (t0.real() == 0 && t0.imag() < 0);
  if (flip) {
    out.t_sign = -1;
    for (auto& t : out.inv.t.v) t = -t;
  }
  if (opt.check) {
    const std::pair<const char*, double> checks[] = {
        {"omega_dz", r.omega_dz},       {"omega_dzbar", r.omega_dzbar}, {"gamma_trace", r.gamma_trace},
        {"ell", r.ell},                 {"alpha_trace", r.alpha_trace}, {"alpha_asym", r.alpha_asym}};
    for (const auto& [name, v] : checks)
      if (!(v <= tol.gauge)) throw NotAdapted(std::string(name) + " residual " + std::to_string(v));
  }
  return out;
}

inline ExtractedInvariants extract_invariants(const FrameField& F, const ExtractOptions& opt = {},
                                              const Tolerances& tol = {}) {
  return extract_invariants(F.S, opt, tol);
}

// Coefficient of dz^3 in tau^2 omega for a frame whose tau and omega are (1,0)-forms.
inline ComplexGrid fubini_coefficient(const Grid<Mat5>& S, int order = kAutoOrder) {
  const MCForm mc = maurer_cartan(S, order);
  ComplexGrid out(S.geom);
  for (std::size_t k = 0; k < out.v.size(); ++k) {
    const FrameForms fx = frame_forms(mc.Ax.v[k]), fy = frame_forms(mc.Ay.v[k]);
    const cplx t = detail::dz_part(fx.tau, fy.tau), w = detail::dz_part(fx.omega, fy.omega);
    out.v[k] = t * t * w;
  }
  return out;
}

// ---- frame reduction -----------------------------------------------------------

// Gauge element Y(A, b) = [[A, A b], [0, A^-T]] embedded in 5x5.
inline Mat5 gauge_Y(const Mat2& A, const Mat2& b) {
  Mat5 Y = Mat5::Zero();
  Y(0, 0) = 1;
  Y.block<2, 2>(1, 1) = A;
  Y.block<2, 2>(1, 3) = A * b;
  Y.block<2, 2>(3, 3) = A.inverse().transpose();
  return Y;
}

struct FirstOrderFrameData {
  RealGrid l1, l2, phi, ell;
};

struct ReductionOptions {
  int order = 6;  // nested derivatives amplify roundoff; higher orders lose accuracy here
  int check_margin = 2;  // boundary band excluded from gauge and Lagrangian checks
  int orientation = 1;   // -1 parametrizes by the conjugate coordinate x - i y
};

struct ReductionResult {
  FrameField F;
  FirstOrderFrameData data;
  InvariantTriple inv;
  GaugeReport gauge;
  std::vector<std::string> warnings;
};

namespace detail {

inline Grid<Mat5> first_order_frame(const ImmersionGrid& f, int order) {
  const auto fx = d_x(f, order), fy = d_y(f, order);
  const auto fxx = d_x(fx, order), fyy = d_y(fy, order);
  const auto fxy1 = d_x(fy, order), fxy2 = d_y(fx, order);
  Grid<Mat5> S(f.geom, Mat5::Zero());
  parallel_for(static_cast<int>(f.v.size()), [&](int k) {
    const Vec4 X1 = fy.v[k], X2 = fx.v[k];
    Eigen::Matrix<double, 4, 3> V;
    V << fxx.v[k], 0.5 * (fxy1.v[k] + fxy2.v[k]), fyy.v[k];
    Eigen::Matrix<double, 2, 3> K;
    for (int c = 0; c < 3; ++c) {
      K(0, c) = omega(X1, V.col(c));
      K(1, c) = omega(X2, V.col(c));
    }
    const Eigen::Matrix<double, 4, 2> W = V * K.transpose() * (K * K.transpose()).inverse();
    const double c = omega(W.col(0), W.col(1));
    Mat4 X;
    X << X1, X2, W.col(0) - c * X2, W.col(1);
    for (int it = 0; it < 3; ++it) X = symplectic_newton_step(X);
    Mat5& s = S.v[k];
    s(0, 0) = 1;
    s.block<4, 1>(1, 0) = f.v[k];
    s.block<4, 4>(1, 1) = X;
  });
  return S;
}

// Makes the continuous square root q = sqrt(mu/|mu|) consistent in sign,
// first along the base column and then along every row.
inline void unwrap_sign(ComplexGrid& q) {
  for (int j = 1; j < q.ny(); ++j)
    if ((q(0, j) * std::conj(q(0, j - 1))).real() < 0) q(0, j) = -q(0, j);
  for (int i = 1; i < q.nx(); ++i)
    for (int j = 0; j < q.ny(); ++j)
      if ((q(i, j) * std::conj(q(i - 1, j))).real() < 0) q(i, j) = -q(i, j);
}

inline ImmersionGrid reflect_y(const ImmersionGrid& m) {
  GridGeom g = m.geom;
  g.y0 = -(m.geom.y0 + (m.geom.ny - 1) * m.geom.dy);
  ImmersionGrid out(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) out(i, j) = m(i, g.ny - 1 - j);
  return out;
}

template <class T>
Grid<T> unreflect_y(const Grid<T>& m, const GridGeom& original) {
  Grid<T> out(original);
  for (int i = 0; i < original.nx; ++i)
    for (int j = 0; j < original.ny; ++j) out(i, j) = m(i, original.ny - 1 - j);
  return out;
}

}  // namespace detail

// Staged frame reduction of a sampled immersion to the adapted frame of the
// grid coordinate: first order (tangent basis completed symplectically),
// second order (gauge matrix built from l1, l2), conformal normalization of omega,
// and a symmetric b removing the trace, antisymmetric and dzbar parts of alpha.
inline ReductionResult reduction_pipeline(const ImmersionGrid& m_in, const ReductionOptions& opt = {},
                                          const Tolerances& tol = {}) {
  if (opt.orientation != 1 && opt.orientation != -1) throw ConfigError("orientation must be +1 or -1");
  m_in.geom.validate();
  require_stencil(m_in.geom, opt.order);
  const ImmersionGrid m = opt.orientation == 1 ? m_in : detail::reflect_y(m_in);
  const GridGeom& g = m.geom;
  const int mg = opt.check_margin;
  ReductionResult res;

  const RealGrid lag = lagrangian_defect(m);
  const double lagmax = max_abs(lag, mg);
  if (lagmax > tol.resid) throw NotLagrangian("max |Omega(f_x, f_y)| = " + std::to_string(lagmax));

  // Stage 1.
  Grid<Mat5> S = detail::first_order_frame(m, opt.order);

  // Stage 2: sigma = l1 omega1 + l2 omega2 per direction.
  MCForm mc = maurer_cartan(S, opt.order);
  res.data = {RealGrid(g), RealGrid(g), RealGrid(g), RealGrid(g)};
  std::size_t bad = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Mat5 &Mx = mc.Ax.v[k], &My = mc.Ay.v[k];
    // g = -gamma11 gamma22 + gamma21^2 as a quadratic form in (dx, dy).
    const double a11 = Mx(3, 1), b11 = My(3, 1), a22 = Mx(4, 2), b22 = My(4, 2), a21 = Mx(4, 1), b21 = My(4, 1);
    const double gxx = -a11 * a22 + a21 * a21, gyy = -b11 * b22 + b21 * b21;
    const double gxy = -0.5 * (a11 * b22 + b11 * a22) + a21 * b21;
    const bool pd = gxx > 0 && gxx * gyy - gxy * gxy > 0;
    const double o1x = 0.5 * (a11 - a22), o1y = 0.5 * (b11 - b22), o2x = a21, o2y = b21;
    const double sx = 0.5 * (a11 + a22), sy = 0.5 * (b11 + b22);
    const double det = o1x * o2y - o1y * o2x;
    const double l1 = (sx * o2y - sy * o2x) / det, l2 = (o1x * sy - o1y * sx) / det;
    res.data.l1.v[k] = l1;
    res.data.l2.v[k] = l2;
    if (!pd || !(l1 * l1 + l2 * l2 < 1)) {
      ++bad;
      res.data.phi.v[k] = NAN;
      continue;
    }
    res.data.phi.v[k] = std::asin(-l2 / std::sqrt(1 - l1 * l1));
  }
  if (bad) throw NotElliptic(std::to_string(bad) + " nodes fail the ellipticity condition");
  parallel_for(static_cast<int>(g.size()), [&](int k) {
    const double l1 = res.data.l1.v[k], ph = res.data.phi.v[k];
    const double a = std::sqrt((1 - l1) / 2), d = std::sqrt((1 + l1) / 2);
    Mat2 A;
    A << a * std::cos(ph), a * std::sin(ph), 0, d;
    S.v[k] = S.v[k] * gauge_Y(A, Mat2::Zero());
  });

  // Stage 3: omega = mu dz + (small) dzbar; rescale and rotate so omega = dz.
  mc = maurer_cartan(S, opt.order);
  ComplexGrid q(g), mu(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const FrameForms fx = frame_forms(mc.Ax.v[k]), fy = frame_forms(mc.Ay.v[k]);
    mu.v[k] = detail::dz_part(fx.omega, fy.omega);
    res.data.ell.v[k] = (detail::dzb_part(fx.eta, fy.eta) / std::conj(mu.v[k])).real();
    q.v[k] = std::sqrt(mu.v[k] / std::abs(mu.v[k]));
  }
  detail::unwrap_sign(q);
  parallel_for(static_cast<int>(g.size()), [&](int k) {
    const double r = 1 / std::sqrt(std::abs(mu.v[k])), s = std::arg(q.v[k]);
    Mat2 A;
    A << std::cos(s), -std::sin(s), std::sin(s), std::cos(s);
    S.v[k] = S.v[k] * gauge_Y(r * A, Mat2::Zero());
  });

  // Stage 4: alpha -> alpha - b gamma; least squares over symmetric b for
  // tr alpha = 0, alpha symmetric, eta_zbar = 0 (six equations, three unknowns).
  mc = maurer_cartan(S, opt.order);
  parallel_for(static_cast<int>(g.size()), [&](int k) {
    const Mat5 &Mx = mc.Ax.v[k], &My = mc.Ay.v[k];
    auto feats = [](const Mat2& ax, const Mat2& ay) {
      Eigen::Matrix<double, 6, 1> v;
      const cplx ex(0.5 * (ax(0, 0) - ax(1, 1)), -0.5 * (ax(1, 0) + ax(0, 1)));
      const cplx ey(0.5 * (ay(0, 0) - ay(1, 1)), -0.5 * (ay(1, 0) + ay(0, 1)));
      const cplx ezb = detail::dzb_part(ex, ey);
      v << ax.trace(), ay.trace(), ax(1, 0) - ax(0, 1), ay(1, 0) - ay(0, 1), ezb.real(), ezb.imag();
      return v;
    };
    const Mat2 alx = Mx.block<2, 2>(1, 1), aly = My.block<2, 2>(1, 1);
    const Mat2 gx = Mx.block<2, 2>(3, 1), gy = My.block<2, 2>(3, 1);
    Eigen::Matrix<double, 6, 3> Mm;
    const Mat2 basis[3] = {(Mat2() << 1, 0, 0, 0).finished(), (Mat2() << 0, 1, 1, 0).finished(),
                           (Mat2() << 0, 0, 0, 1).finished()};
    for (int c = 0; c < 3; ++c) Mm.col(c) = feats(basis[c] * gx, basis[c] * gy);
    const Eigen::Vector3d bv = (Mm.transpose() * Mm).ldlt().solve(Mm.transpose() * feats(alx, aly));
    const Mat2 b = bv(0) * basis[0] + bv(1) * basis[1] + bv(2) * basis[2];
    S.v[k] = S.v[k] * gauge_Y(Mat2::Identity(), b);
  });

  // Fix the residual sign so that Re t > 0 at the base node.
  ExtractOptions eo{opt.order, mg, false};
  auto ex = extract_invariants(S, eo, tol);
  if (ex.t_sign < 0)
    for (auto& s : S.v) s.block<4, 4>(1, 1) = -s.block<4, 4>(1, 1);
  const double worst = ex.report.worst_condition();
  if (!(worst <= tol.gauge)) throw NotAdapted("reduced frame misses the adapted gauge by " + std::to_string(worst));

  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(ex.inv.h.v[k]) < tol.umbilic) {
      res.warnings.push_back("UmbilicGaugeWarning: |h| below tol_umbilic at some nodes");
      break;
    }

  if (opt.orientation == 1) {
    res.F.S = std::move(S);
    res.inv = std::move(ex.inv);
  } else {
    res.F.S = detail::unreflect_y(S, m_in.geom);
    res.inv = {detail::unreflect_y(ex.inv.t, m_in.geom), detail::unreflect_y(ex.inv.h, m_in.geom),
               detail::unreflect_y(ex.inv.p, m_in.geom)};
    res.data = {detail::unreflect_y(res.data.l1, m_in.geom), detail::unreflect_y(res.data.l2, m_in.geom),
                detail::unreflect_y(res.data.phi, m_in.geom), detail::unreflect_y(res.data.ell, m_in.geom)};
  }
  res.gauge = ex.report;
  for (const auto& v : res.F.S.v) res.F.max_defect = std::max(res.F.max_defect, frame_defect(v));
  return res;
}

// ---- congruence ----------------------------------------------------------------

struct CongruenceResult {
  double defect = 0;
  int sign = 1;  // which frame sign realized the minimum
  Mat5 motion = Mat5::Identity();
};

// Candidate motion D = S2 S1^-1, averaged over nodes at least `margin` from
// the edges (one-sided stencils make edge frames the least accurate), then
// projected to the group. The defect is sup |D f1 - f2|, minimized over the
// frame sign ambiguity.
inline CongruenceResult congruence_from_frames(const ImmersionGrid& m1, const Grid<Mat5>& S1, const ImmersionGrid& m2,
                                               const Grid<Mat5>& S2, int margin = 2) {
  require_same(m1.geom, m2.geom);
  require_same(m1.geom, S1.geom);
  require_same(m2.geom, S2.geom);
  const GridGeom& g = m1.geom;
  const int mi = std::min(margin, (g.nx - 1) / 2), mj = std::min(margin, (g.ny - 1) / 2);
  CongruenceResult best;
  best.defect = INFINITY;
  for (int sign : {1, -1}) {
    Mat4 L = Mat4::Zero();
    int n = 0;
    for (int i = mi; i < g.nx - mi; ++i)
      for (int j = mj; j < g.ny - mj; ++j, ++n) {
        const Mat4 X2 = sign * S2(i, j).block<4, 4>(1, 1);
        L += X2 * symplectic_inverse(S1(i, j).block<4, 4>(1, 1));
      }
    L /= n;
    for (int it = 0; it < 3; ++it) L = symplectic_newton_step(L);
    Vec4 c = Vec4::Zero();
    for (std::size_t k = 0; k < m1.v.size(); ++k) c += m2.v[k] - L * m1.v[k];
    c /= static_cast<double>(m1.v.size());
    double e = 0;
    for (std::size_t k = 0; k < m1.v.size(); ++k) e = std::max(e, (L * m1.v[k] + c - m2.v[k]).cwiseAbs().maxCoeff());
    if (e < best.defect) {
      best.defect = e;
      best.sign = sign;
      best.motion = Mat5::Identity();
      best.motion.block<4, 1>(1, 0) = c;
      best.motion.block<4, 4>(1, 1) = L;
    }
  }
  return best;
}

inline CongruenceResult congruence_defect_detail(const ImmersionGrid& m1, const ImmersionGrid& m2,
                                                 const ReductionOptions& opt = {}, const Tolerances& tol = {}) {
  require_same(m1.geom, m2.geom);
  const auto r1 = reduction_pipeline(m1, opt, tol), r2 = reduction_pipeline(m2, opt, tol);
  return congruence_from_frames(m1, r1.F.S, m2, r2.F.S);
}

inline double congruence_defect(const ImmersionGrid& m1, const ImmersionGrid& m2, const ReductionOptions& opt = {},
                                const Tolerances& tol = {}) {
  return congruence_defect_detail(m1, m2, opt, tol).defect;
}

inline ImmersionGrid apply_motion(const AffineSymplecticElement& g, const ImmersionGrid& m) {
  return map(m, [&](const Vec4& q) -> Vec4 { return act(g, q); });
}

}  // namespace symplag

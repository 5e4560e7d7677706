#pragma once
// Symplectic and affine symplectic groups on R^4, their Lie algebras, and
// oriented Lagrangian planes.
//
// Conventions: J = [[0, I], [-I, 0]], Omega(X, Y) = X^T J Y. An affine element
// (P, X) acts by q -> P + X q and is represented by the 5x5 matrix
// [[1, 0], [P, X]] so that composition is matrix multiplication.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>

#include "errors.hpp"

namespace symplag {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec4 = Eigen::Vector4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using CMat2 = Eigen::Matrix2cd;
using CVec2 = Eigen::Vector2cd;

inline const Mat4& J4() {
  static const Mat4 J = [] {
    Mat4 m = Mat4::Zero();
    m.block<2, 2>(0, 2) = Mat2::Identity();
    m.block<2, 2>(2, 0) = -Mat2::Identity();
    return m;
  }();
  return J;
}

inline double omega(const Vec4& a, const Vec4& b) { return a.dot(J4() * b); }

// Entrywise max norm of M^T J M - J.
inline double symplectic_defect(const Mat4& M) {
  return (M.transpose() * J4() * M - J4()).cwiseAbs().maxCoeff();
}

// Inverse of a symplectic matrix without a general solve.
inline Mat4 symplectic_inverse(const Mat4& X) { return -J4() * X.transpose() * J4(); }

// One Newton step towards Sp(4): X (I + J E / 2) with E = X^T J X - J.
// E is invariant under left multiplication by symplectic matrices, so the
// correction commutes with any change of symplectic basis.
inline Mat4 symplectic_newton_step(const Mat4& X) {
  const Mat4 E = X.transpose() * J4() * X - J4();
  return X * (Mat4::Identity() + 0.5 * J4() * E);
}

struct SymMat2 {
  double s11 = 0, s12 = 0, s22 = 0;

  static SymMat2 from_matrix(const Mat2& m) { return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)}; }
  Mat2 matrix() const {
    Mat2 m;
    m << s11, s12, s12, s22;
    return m;
  }
  double trace() const { return s11 + s22; }
  // Signature (2,1) quadratic form (b, b) = -det b.
  double quad() const { return -(s11 * s22 - s12 * s12); }
};

// x(a, b, c) = [[a, b], [c, -a^T]] with b, c symmetric.
struct SpAlgebra4 {
  Mat2 a = Mat2::Zero();
  SymMat2 b, c;

  Mat4 matrix() const {
    Mat4 m;
    m.block<2, 2>(0, 0) = a;
    m.block<2, 2>(0, 2) = b.matrix();
    m.block<2, 2>(2, 0) = c.matrix();
    m.block<2, 2>(2, 2) = -a.transpose();
    return m;
  }
  // Projects a general 4x4 matrix onto the block pattern.
  static SpAlgebra4 from_matrix(const Mat4& m) {
    SpAlgebra4 x;
    x.a = 0.5 * (m.block<2, 2>(0, 0) - m.block<2, 2>(2, 2).transpose());
    x.b = SymMat2::from_matrix(m.block<2, 2>(0, 2));
    x.c = SymMat2::from_matrix(m.block<2, 2>(2, 0));
    return x;
  }
};

// Distance of a 4x4 matrix from sp(4): ||M^T J + J M||.
inline double algebra_defect(const Mat4& m) {
  return (m.transpose() * J4() + J4() * m).cwiseAbs().maxCoeff();
}

class SymplMat4 {
 public:
  SymplMat4() : m_(Mat4::Identity()) {}
  explicit SymplMat4(const Mat4& m, double tol = Tolerances{}.group) : m_(m) {
    const double d = symplectic_defect(m);
    if (!(d <= tol)) throw NotSymplectic("symplectic defect " + std::to_string(d));
  }
  static SymplMat4 unchecked(const Mat4& m) {
    SymplMat4 s;
    s.m_ = m;
    return s;
  }
  const Mat4& matrix() const { return m_; }
  Vec4 column(int k) const { return m_.col(k); }
  SymplMat4 inverse() const { return unchecked(symplectic_inverse(m_)); }
  SymplMat4 operator*(const SymplMat4& o) const { return unchecked(m_ * o.m_); }

 private:
  Mat4 m_;
};

struct AffineAlgebra4 {
  Vec4 p = Vec4::Zero();
  SpAlgebra4 x;

  Mat5 matrix() const {
    Mat5 m = Mat5::Zero();
    m.block<4, 1>(1, 0) = p;
    m.block<4, 4>(1, 1) = x.matrix();
    return m;
  }
  static AffineAlgebra4 from_matrix(const Mat5& m) {
    return {m.block<4, 1>(1, 0), SpAlgebra4::from_matrix(m.block<4, 4>(1, 1))};
  }
};

struct AffineSymplecticElement {
  Vec4 P = Vec4::Zero();
  SymplMat4 X;

  static AffineSymplecticElement identity() { return {}; }
  static AffineSymplecticElement translation(const Vec4& v) { return {v, SymplMat4{}}; }

  Mat5 matrix() const {
    Mat5 m = Mat5::Zero();
    m(0, 0) = 1.0;
    m.block<4, 1>(1, 0) = P;
    m.block<4, 4>(1, 1) = X.matrix();
    return m;
  }
  static AffineSymplecticElement from_matrix(const Mat5& m, double tol = Tolerances{}.group) {
    return {m.block<4, 1>(1, 0), SymplMat4(m.block<4, 4>(1, 1), tol)};
  }
  AffineSymplecticElement operator*(const AffineSymplecticElement& o) const {
    return {P + X.matrix() * o.P, X * o.X};
  }
  AffineSymplecticElement inverse() const {
    const SymplMat4 Xi = X.inverse();
    return {-(Xi.matrix() * P), Xi};
  }
};

inline Vec4 act(const AffineSymplecticElement& g, const Vec4& q) { return g.P + g.X.matrix() * q; }

// Inverse of a 5x5 affine representative [[1,0],[P,X]] with symplectic X.
inline Mat5 affine_inverse(const Mat5& S) {
  const Mat4 Xi = symplectic_inverse(S.block<4, 4>(1, 1));
  Mat5 r = Mat5::Zero();
  r(0, 0) = 1.0;
  r.block<4, 4>(1, 1) = Xi;
  r.block<4, 1>(1, 0) = -Xi * S.block<4, 1>(1, 0);
  return r;
}

// Matrix exponential via Eigen's scaling and squaring with Pade approximants.
inline SymplMat4 exp_algebra(const SpAlgebra4& x, double s = 1.0) {
  const Mat4 m = (s * x.matrix()).exp();
  return SymplMat4::unchecked(m);
}

inline AffineSymplecticElement exp_algebra(const AffineAlgebra4& x, double s = 1.0) {
  const Mat5 m = (s * x.matrix()).exp();
  return {m.block<4, 1>(1, 0), SymplMat4::unchecked(m.block<4, 4>(1, 1))};
}

class LagrangianPlane {
 public:
  // Rejects rank-deficient or non-Lagrangian spans (A1^T A2 must be symmetric).
  explicit LagrangianPlane(const Mat42& span, double tol = Tolerances{}.group) : span_(span) {
    Eigen::JacobiSVD<Mat42> svd(span);
    const auto sv = svd.singularValues();
    if (sv(1) <= Tolerances{}.rank * std::max(1.0, sv(0))) throw NotLagrangian("span has rank < 2");
    const Mat2 top = span.topRows<2>(), bot = span.bottomRows<2>();
    const Mat2 m = top.transpose() * bot;
    const double asym = std::abs(m(0, 1) - m(1, 0));
    if (asym > tol * std::max(1.0, span.cwiseAbs().maxCoeff() * span.cwiseAbs().maxCoeff()))
      throw NotLagrangian("A1^T A2 not symmetric: " + std::to_string(asym));
  }
  // The plane {(u, S u)} through the graph of a symmetric S.
  static LagrangianPlane graph(const SymMat2& S) {
    Mat42 span;
    span.topRows<2>() = Mat2::Identity();
    span.bottomRows<2>() = S.matrix();
    return LagrangianPlane(span);
  }
  const Mat42& span() const { return span_; }

 private:
  Mat42 span_;
};

// Chart on U0: bottom block times inverse of the top block.
inline SymMat2 plane_chart(const LagrangianPlane& V, double tol_rank = Tolerances{}.rank) {
  const Mat2 top = V.span().topRows<2>(), bot = V.span().bottomRows<2>();
  const double d = top.determinant();
  if (!(d > tol_rank)) throw ChartDomainError("det(top block) = " + std::to_string(d));
  return SymMat2::from_matrix(bot * top.inverse());
}

// R^4 <-> C^2 identification x -> (x1 - i x2, x3 + i x4).
inline CVec2 to_c2(const Vec4& x) { return {cplx(x(0), -x(1)), cplx(x(2), x(3))}; }
inline Vec4 from_c2(const CVec2& v) { return {v(0).real(), -v(0).imag(), v(1).real(), v(1).imag()}; }

// Real 4x4 image of a complex 2x2 matrix A = V + iW under the identification.
inline Mat4 isl2c_matrix(const CMat2& A) {
  const double v11 = A(0, 0).real(), w11 = A(0, 0).imag(), v12 = A(0, 1).real(), w12 = A(0, 1).imag();
  const double v21 = A(1, 0).real(), w21 = A(1, 0).imag(), v22 = A(1, 1).real(), w22 = A(1, 1).imag();
  Mat4 m;
  m << v11, w11, v12, -w12,
      -w11, v11, -w12, -v12,
      v21, w21, v22, -w22,
      w21, -v21, w22, v22;
  return m;
}

inline AffineSymplecticElement isl2c_embed(const CMat2& A, const CVec2& v, double tol_group = Tolerances{}.group) {
  const double dd = std::abs(A.determinant() - 1.0);
  if (!(dd <= tol_group)) throw DeterminantError("|det A - 1| = " + std::to_string(dd));
  return {from_c2(v), SymplMat4::unchecked(isl2c_matrix(A))};
}

}  // namespace symplag

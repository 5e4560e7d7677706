#include <gtest/gtest.h>

#include <random>

#include "symplag/examples.hpp"

using namespace symplag;

namespace {

std::mt19937 rng(20240611);

double uni(double a = -1, double b = 1) { return std::uniform_real_distribution<double>(a, b)(rng); }

SpAlgebra4 random_algebra(double scale) {
  SpAlgebra4 x;
  x.a << uni(), uni(), uni(), uni();
  x.b = {uni(), uni(), uni()};
  x.c = {uni(), uni(), uni()};
  x.a *= scale;
  x.b = {x.b.s11 * scale, x.b.s12 * scale, x.b.s22 * scale};
  x.c = {x.c.s11 * scale, x.c.s12 * scale, x.c.s22 * scale};
  return x;
}

AffineSymplecticElement random_element(double scale = 0.8) {
  return {Vec4(uni(), uni(), uni(), uni()), exp_algebra(random_algebra(scale))};
}

// Truncated Taylor series in long double.
Mat4 series_exp(const Mat4& x, int terms) {
  using ML = Eigen::Matrix<long double, 4, 4>;
  const ML xl = x.cast<long double>();
  ML sum = ML::Identity(), term = ML::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * xl / static_cast<long double>(k);
    sum += term;
  }
  return sum.cast<double>();
}

}  // namespace

TEST(SymplecticDefect, IdentityIsZero) { EXPECT_EQ(symplectic_defect(Mat4::Identity()), 0.0); }

TEST(SymplecticDefect, BlockScalingIsSymplectic) {
  Mat4 m = Vec4(2, 2, 0.5, 0.5).asDiagonal();
  EXPECT_EQ(symplectic_defect(m), 0.0);
}

TEST(SymplecticDefect, DiagTwoOneOneOne) {
  Mat4 m = Vec4(2, 1, 1, 1).asDiagonal();
  // M^T J M - J has entries +-1 at (1,3) and (3,1); everything else vanishes.
  EXPECT_DOUBLE_EQ(symplectic_defect(m), 1.0);
}

TEST(SymplecticDefect, CheckedConstructorRejects) {
  EXPECT_THROW(SymplMat4(Mat4(Vec4(2, 1, 1, 1).asDiagonal())), NotSymplectic);
  EXPECT_NO_THROW(SymplMat4(Mat4::Identity()));
}

TEST(ExpAlgebra, ZeroGivesIdentity) {
  EXPECT_EQ(exp_algebra(SpAlgebra4{}).matrix(), Mat4::Identity());
  const auto g = exp_algebra(AffineAlgebra4{});
  EXPECT_EQ(g.P, Vec4::Zero());
  EXPECT_EQ(g.X.matrix(), Mat4::Identity());
}

TEST(ExpAlgebra, NilpotentLowerBlock) {
  SpAlgebra4 x;
  x.c = {1, 0, 1};
  const Mat4 e = exp_algebra(x).matrix();
  EXPECT_LE((e - series_exp(x.matrix(), 30)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((e - (Mat4::Identity() + x.matrix())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ExpAlgebra, MatchesSeriesOracle) {
  for (int k = 0; k < 10; ++k) {
    const SpAlgebra4 x = random_algebra(0.5);
    const Mat4 e = exp_algebra(x).matrix();
    EXPECT_LE((e - series_exp(x.matrix(), 30)).cwiseAbs().maxCoeff(), 1e-13 * e.cwiseAbs().maxCoeff());
  }
}

TEST(ExpAlgebra, MatchesFrozenReference) {
  SpAlgebra4 x;
  x.a << 0.7, -1.1, 0.4, 0.3;
  x.b = {1.2, 0.5, -0.8};
  x.c = {-0.6, 0.9, 1.4};
  Mat4 ref;
  ref << 1.6816928290098019, -0.5884853959180304, 1.3104558994838813, 0.63732690482958987,
      0.044104193557403783, 0.79478617951086972, 0.09760136937521216, -0.68005033977799612,
      -0.6805873153216363, 0.60041074981283249, 0.081236975958972391, -0.60182058019359441,
      0.83429181517639639, 1.2219438408798149, 1.2001743360996591, 0.24850957818540009;
  EXPECT_LE((exp_algebra(x).matrix() - ref).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ExpAlgebra, StaysInGroupUpToNormTen) {
  for (int k = 0; k < 50; ++k) {
    const SpAlgebra4 x0 = random_algebra(1.0);
    const SpAlgebra4 x = SpAlgebra4::from_matrix(x0.matrix() * (uni(0.1, 10.0) / x0.matrix().norm()));
    ASSERT_LE(x.matrix().norm(), 10.0 + 1e-12);
    const Mat4 e = exp_algebra(x).matrix();
    EXPECT_LE(symplectic_defect(e), Tolerances{}.group) << "norm " << x.matrix().norm() << " |e| " << e.norm();
  }
}

TEST(ExpAlgebra, Section5ColumnsAtSamplePoint) {
  const auto [A, B] = section5_AB(0.0);
  const Mat4 e = (0.1 * A.x.matrix() + 0.2 * B.x.matrix()).exp();
  const auto [X1, X2] = section5_columns(0.0, 0.1, 0.2);
  EXPECT_LE((e.col(0) - X1).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((e.col(1) - X2).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Act, IdentityAndTranslation) {
  const Vec4 q(1, 2, 3, 4);
  EXPECT_EQ(act(AffineSymplecticElement::identity(), q), q);
  EXPECT_EQ(act(AffineSymplecticElement::translation(Vec4::UnitX()), Vec4::Zero()), Vec4::UnitX());
}

TEST(Act, CompositionProperty) {
  for (int k = 0; k < 20; ++k) {
    const auto g1 = random_element(), g2 = random_element();
    const Vec4 q(uni(), uni(), uni(), uni());
    EXPECT_LE((act(g1, act(g2, q)) - act(g1 * g2, q)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Act, InverseUndoes) {
  const auto g = random_element();
  const Vec4 q(0.3, -0.2, 0.9, 1.1);
  EXPECT_LE((act(g.inverse(), act(g, q)) - q).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((affine_inverse(g.matrix()) * g.matrix() - Mat5::Identity()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Group, ClosureUnderComposition) {
  for (int k = 0; k < 20; ++k) {
    const auto g1 = random_element(), g2 = random_element();
    const double bound = 2 * (symplectic_defect(g1.X.matrix()) + symplectic_defect(g2.X.matrix())) + Tolerances{}.group;
    EXPECT_LE(symplectic_defect((g1 * g2).X.matrix()), bound);
  }
}

TEST(Group, NewtonStepRestoresGroup) {
  Mat4 X = exp_algebra(random_algebra(0.5)).matrix();
  X(0, 1) += 1e-6;
  const double before = symplectic_defect(X);
  const double after = symplectic_defect(symplectic_newton_step(X));
  EXPECT_LT(after, 1e-3 * before);
}

TEST(PlaneChart, HorizontalPlane) {
  Mat42 span = Mat42::Zero();
  span(0, 0) = span(1, 1) = 1;
  const SymMat2 s = plane_chart(LagrangianPlane(span));
  EXPECT_EQ(s.matrix(), Mat2::Zero());
}

TEST(PlaneChart, BottomTimesTopInverse) {
  Mat42 span;
  span << 1, 0, 0, 1, 1, 0, 0, -1;
  EXPECT_EQ(plane_chart(LagrangianPlane(span)).matrix(), Mat2(Eigen::Vector2d(1, -1).asDiagonal()));
}

TEST(PlaneChart, Section5Frame) {
  const auto [X1, X2] = section5_columns(0.0, 0.1, 0.2);
  Mat42 span;
  span << X1, X2;
  const SymMat2 s = plane_chart(LagrangianPlane(span));
  Mat2 ref;
  ref << 0.1259102669686688, 0.20057998524955634, 0.20057998524955628, -0.066905531486902536;
  EXPECT_LE((s.matrix() - ref).cwiseAbs().maxCoeff(), 1e-12);
  const Mat2 raw = span.bottomRows<2>() * span.topRows<2>().inverse();
  EXPECT_LE(std::abs(raw(0, 1) - raw(1, 0)), 1e-12);
}

TEST(PlaneChart, GraphRoundTrip) {
  for (int k = 0; k < 20; ++k) {
    const SymMat2 S{uni(-5, 5), uni(-5, 5), uni(-5, 5)};
    const SymMat2 back = plane_chart(LagrangianPlane::graph(S));
    EXPECT_EQ(back.s11, S.s11);
    EXPECT_EQ(back.s12, S.s12);
    EXPECT_EQ(back.s22, S.s22);
  }
}

TEST(PlaneChart, RejectsNegativeOrientation) {
  Mat42 span;
  span << 0, 1, 1, 0, 0, 0, 0, 0;
  EXPECT_THROW(plane_chart(LagrangianPlane(span)), ChartDomainError);
}

TEST(LagrangianPlaneType, RejectsBadSpans) {
  Mat42 rank1 = Mat42::Zero();
  rank1(0, 0) = rank1(0, 1) = 1;
  EXPECT_THROW(LagrangianPlane{rank1}, NotLagrangian);
  Mat42 sympl = Mat42::Zero();
  sympl(0, 0) = 1;  // e1
  sympl(2, 1) = 1;  // e3, Omega(e1, e3) = 1
  EXPECT_THROW(LagrangianPlane{sympl}, NotLagrangian);
}

TEST(Isl2c, IdentityEmbedsToIdentity) {
  const auto g = isl2c_embed(CMat2::Identity(), CVec2::Zero());
  EXPECT_EQ(g.X.matrix(), Mat4::Identity());
  EXPECT_EQ(g.P, Vec4::Zero());
}

TEST(Isl2c, OffDiagonalImaginaryPattern) {
  CMat2 A;
  A << 0, cplx(0, 1), cplx(0, 1), 0;
  const Mat4 m = isl2c_embed(A, CVec2::Zero()).X.matrix();
  EXPECT_LE(symplectic_defect(m), 1e-15);
  // The v-blocks vanish, w-blocks carry +-1.
  EXPECT_EQ((m.block<2, 2>(0, 0)), Mat2::Zero());
  EXPECT_EQ((m.block<2, 2>(2, 2)), Mat2::Zero());
  Mat2 swap;
  swap << 0, 1, 1, 0;
  EXPECT_EQ(Mat2(m.block<2, 2>(0, 2).cwiseAbs()), swap);
  EXPECT_EQ(Mat2(m.block<2, 2>(2, 0).cwiseAbs()), swap);
}

TEST(Isl2c, RejectsDeterminant) {
  EXPECT_THROW(isl2c_embed(CMat2(2.0 * CMat2::Identity()), CVec2::Zero()), DeterminantError);
}

TEST(Isl2c, ComplexLinearityAndAlgebraShape) {
  CMat2 M;
  M << cplx(0.3, -0.2), cplx(0.7, 0.4), cplx(-0.5, 0.1), cplx(-0.3, 0.2);  // trace zero
  const Mat4 m = isl2c_matrix(M);
  EXPECT_LE(algebra_defect(m), 1e-15);
  const SpAlgebra4 x = SpAlgebra4::from_matrix(m);
  EXPECT_NEAR(x.b.trace(), 0, 1e-15);
  EXPECT_NEAR(x.c.trace(), 0, 1e-15);
  EXPECT_NEAR(x.a(0, 0), x.a(1, 1), 1e-15);
  EXPECT_NEAR(x.a(1, 0), -x.a(0, 1), 1e-15);
  const CVec2 v(cplx(0.2, 0.9), cplx(-1.3, 0.4));
  EXPECT_LE((to_c2(m * from_c2(v)) - M * v).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Isl2c, Homomorphism) {
  for (int k = 0; k < 10; ++k) {
    CMat2 A1, A2;
    A1 << cplx(uni(), uni()), cplx(uni(), uni()), cplx(uni(), uni()), cplx(uni(), uni());
    A2 << cplx(uni(), uni()), cplx(uni(), uni()), cplx(uni(), uni()), cplx(uni(), uni());
    A1 /= std::sqrt(A1.determinant());
    A2 /= std::sqrt(A2.determinant());
    const CVec2 v1(cplx(uni(), uni()), cplx(uni(), uni())), v2(cplx(uni(), uni()), cplx(uni(), uni()));
    const auto lhs = isl2c_embed(A1 * A2, A1 * v2 + v1);
    const auto rhs = isl2c_embed(A1, v1) * isl2c_embed(A2, v2);
    EXPECT_LE((lhs.matrix() - rhs.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(symplectic_defect(lhs.X.matrix()), 1e-12);
  }
}

TEST(Conversions, C2RoundTrip) {
  const Vec4 x(1.5, -2.5, 0.25, 4);
  EXPECT_EQ(from_c2(to_c2(x)), x);
}

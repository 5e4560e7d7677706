#include <gtest/gtest.h>

#include "symplag/examples.hpp"

using namespace symplag;

namespace {

ComplexGrid constant_p(const GridGeom& g, cplx c = 0) { return ComplexGrid(g, c); }

double curve_gap(const C2Grid& a, const C2Grid& b) {
  double e = 0;
  for (std::size_t k = 0; k < a.v.size(); ++k) e = std::max(e, (a.v[k] - b.v[k]).cwiseAbs().maxCoeff());
  return e;
}

}  // namespace

TEST(Section5AB, EntriesAtZero) {
  const auto [A, B] = section5_AB(0.0);
  EXPECT_EQ(A.x.matrix()(0, 2), 1.0);
  EXPECT_EQ(B.x.matrix()(0, 3), 1.0);
  EXPECT_EQ(A.p, Vec4::Zero());
}

TEST(Section5AB, CommuteAndLieInAlgebra) {
  for (double p : {-1.0, 0.0, 1.0, 3.0}) {
    const auto [A, B] = section5_AB(p);
    const Mat4 a = A.x.matrix(), b = B.x.matrix();
    EXPECT_EQ(a * b - b * a, Mat4::Zero()) << p;
    EXPECT_EQ(algebra_defect(a), 0.0);
    EXPECT_EQ(algebra_defect(b), 0.0);
  }
}

TEST(Section5T, SingleExponential) {
  Section5Params q;
  q.c2 = 0;
  for (double x : {0.0, 0.3, 0.9}) {
    const cplx t = section5_t(q, x, 0.4);
    EXPECT_DOUBLE_EQ(t.real(), std::exp(2 * x));
    EXPECT_EQ(t.imag(), 0.0);
  }
}

TEST(Section5T, AllZeroWarnsAndIsRejected) {
  Section5Params q{0, 0, 0, 0, 0, 0, 0};
  EXPECT_FALSE(q.warnings().empty());
  EXPECT_THROW(section5_triple(q, GridGeom::square(11, 0, 1)).validate(), ConfigError);
}

TEST(Section5T, GeneralAnsatzWithA1Zero) {
  Section5Params q{0.5, 1.0, 0.5, 0.0, 0.7, 0.3, -0.2};
  EXPECT_TRUE(q.warnings().empty());
  const auto inv = section5_triple(q, GridGeom::square(61, 0, 1));
  EXPECT_LE(max_abs(inteq_residual(inv).r1), 1e-8);
}

TEST(Section5Columns, IdentityAtOrigin) {
  for (double p : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    const auto [X1, X2] = section5_columns(p, 0, 0);
    EXPECT_LE((X1 - Vec4::UnitX()).cwiseAbs().maxCoeff(), 1e-15) << p;
    EXPECT_LE((X2 - Vec4::UnitY()).cwiseAbs().maxCoeff(), 1e-15) << p;
  }
}

TEST(Section5Columns, MatchExponentialBothRegimes) {
  for (double p : {-3.0, -1.0, 0.0, 1.5, 3.0}) {
    const auto [A, B] = section5_AB(p);
    for (auto [x, y] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {0.7, -0.4}, {-0.3, 0.9}}) {
      const Mat4 e = (x * A.x.matrix() + y * B.x.matrix()).exp();
      const auto [X1, X2] = section5_columns(p, x, y);
      EXPECT_LE((e.col(0) - X1).cwiseAbs().maxCoeff(), 1e-10) << p;
      EXPECT_LE((e.col(1) - X2).cwiseAbs().maxCoeff(), 1e-10) << p;
    }
  }
}

TEST(Section5Columns, ExcludedParameters) {
  EXPECT_THROW(section5_columns(2.0, 0.1, 0.1), ParameterDomain);
  EXPECT_THROW(section5_columns(-2.0, 0.1, 0.1), ParameterDomain);
  Section5Params q;
  q.m1 = 1;
  EXPECT_THROW(section5_f(q, 0, 0), ParameterDomain);
}

TEST(Section5Columns, SolveLinearOdeAlongX) {
  const double p = 1.0;
  const auto A = section5_AB(p).A.x.matrix();
  const GridGeom g{81, 9, 0.0, 0.0, 1.0 / 80, 0.01};
  Grid<Vec4> X1 = sample(g, [&](double x, double) { return section5_columns(p, x, 0.0).first; });
  const auto d = d_x(X1);
  double e = 0;
  for (int i = 0; i < g.nx; ++i) e = std::max(e, (d(i, 0) - A * X1(i, 0)).cwiseAbs().maxCoeff());
  EXPECT_LE(e, 10 * std::pow(g.dx, 4));
}

TEST(Section5F, ClosedFormMatchesIntegration) {
  const Section5Params q;
  const auto g = GridGeom::square(101, 0, 1);
  const auto m = immersion_from_frame(integrate_frame(theta_from_invariants(section5_triple(q, g))));
  const auto c = section5_immersion_closed(q, g);
  const Vec4 shift = c(0, 0) - m(0, 0);
  double e = 0;
  for (std::size_t k = 0; k < m.v.size(); ++k) e = std::max(e, (c.v[k] - shift - m.v[k]).cwiseAbs().maxCoeff());
  EXPECT_LE(e, 1e-6);
}

TEST(Section5F, TangentsAreFrameColumnsTimesTau) {
  // f_x = t1 X1 - t2 X2 and f_y = -t2 X1 - t1 X2 for the adapted frame.
  const Section5Params q{1.0};
  const GridGeom g = GridGeom::square(101, 0, 1);
  const auto f = section5_immersion_closed(q, g);
  const auto fx = d_x(f), fy = d_y(f);
  double e = 0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const auto [X1, X2] = section5_columns(q.p, g.x(i), g.y(j));
      const cplx t = section5_t(q, g.x(i), g.y(j));
      e = std::max(e, (fx(i, j) - (t.real() * X1 - t.imag() * X2)).cwiseAbs().maxCoeff());
      e = std::max(e, (fy(i, j) - (-t.imag() * X1 - t.real() * X2)).cwiseAbs().maxCoeff());
    }
  EXPECT_LE(e, 1e-8);
}

TEST(Section5Family, SharedFubiniAndNonGeneric) {
  const auto g = GridGeom::square(41, 0, 1);
  const auto base = section5_triple({}, g);
  for (double lambda : {-1.0, 1.0}) {
    const auto inv = section5_triple({}, g, lambda);
    EXPECT_EQ(inv.t.v, base.t.v);
    const auto fa = form_coefficients(inv).fubini, fb = form_coefficients(base).fubini;
    EXPECT_EQ(fa.v, fb.v);
    EXPECT_LE(max_abs(inteq_residual(inv).r3), 1e-8);
  }
  for (int v : is_generic(base).v) EXPECT_EQ(v, 0);
}

TEST(Section5Family, ExtractedHIsOne) {
  const auto red = reduction_pipeline(section5_immersion_closed({}, GridGeom::square(101, 0, 1)));
  EXPECT_LE(max_abs(map(red.inv.h, [](cplx h) { return h - 1.0; }), red.gauge.margin), 1e-5);
}

// ---- umbilic curves ------------------------------------------------------------------

TEST(UmbilicCurve, NilpotentCase) {
  const GridGeom g = GridGeom::square(21, -1, 1);
  const auto uc = umbilic_curve({constant_p(g), 0.0});
  const cplx z0 = g.z(0, 0);
  double ef = 0, eX = 0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const cplx w = g.z(i, j) - z0;
      ef = std::max(ef, (uc.curve(i, j) - CVec2(w, 0.5 * w * w)).cwiseAbs().maxCoeff());
      CMat2 X;
      X << 1, 0, w, 1;
      eX = std::max(eX, (uc.frame(i, j) - X).cwiseAbs().maxCoeff());
    }
  EXPECT_LE(ef, 1e-13);
  EXPECT_LE(eX, 1e-13);
}

TEST(UmbilicCurve, DeterminantStaysOne) {
  const GridGeom g = GridGeom::square(41, -0.5, 0.5);
  const auto uc = umbilic_curve({sample(g, [](double x, double y) { return cplx(x, y); }), 0.3});
  for (const auto& X : uc.frame.v) EXPECT_LE(std::abs(X.determinant() - 1.0), 1e-10);
}

TEST(UmbilicCurve, RejectsNonHolomorphic) {
  const GridGeom g = GridGeom::square(21, -1, 1);
  EXPECT_THROW(umbilic_curve({sample(g, [](double x, double y) { return cplx(x, -y); }), 0.0}), NotHolomorphic);
}

TEST(UmbilicCurve, SelfConvergence) {
  // p_fn = z. Compare 21 and 41 node runs with a 161 node reference on shared nodes.
  auto run = [](int n) {
    const auto g = GridGeom::square(n, -0.5, 0.5);
    return umbilic_curve({sample(g, [](double x, double y) { return cplx(x, y); }), 0.0}).curve;
  };
  const auto ref = run(161);
  std::vector<double> err;
  for (int n : {21, 41}) {
    const auto c = run(n);
    const int stride = 160 / (n - 1);
    double e = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e = std::max(e, (c(i, j) - ref(i * stride, j * stride)).cwiseAbs().maxCoeff());
    err.push_back(e);
  }
  EXPECT_LE(err[1], 1e-8);
  EXPECT_GE(err[0] / err[1], 12.0);
}

TEST(UmbilicCurve, ReductionGivesZeroH) {
  const GridGeom g = GridGeom::square(81, -0.5, 0.5);
  const auto uc = umbilic_curve({sample(g, [](double x, double y) { return 0.5 * cplx(x, y); }), 0.0});
  for (double v : flex_defect(uc.curve).v) ASSERT_GT(v, 0.1);
  const auto red = reduction_pipeline(curve_immersion(uc.curve));
  EXPECT_LE(max_abs(red.inv.h), 1e-6);
}

TEST(UmbilicCurve, LambdaFamilyNoncongruentSharedFubini) {
  const GridGeom g = GridGeom::square(81, -0.5, 0.5);
  std::vector<ImmersionGrid> ms;
  std::vector<ReductionResult> reds;
  for (double lambda : {-1.0, 0.0, 1.0}) {
    ms.push_back(curve_immersion(umbilic_curve({constant_p(g), lambda}).curve));
    reds.push_back(reduction_pipeline(ms.back()));
  }
  for (std::size_t a = 0; a < ms.size(); ++a)
    for (std::size_t b = 0; b < ms.size(); ++b) {
      const double d = congruence_from_frames(ms[a], reds[a].F.S, ms[b], reds[b].F.S).defect;
      if (a == b) EXPECT_LE(d, Tolerances{}.congruent);
      else EXPECT_GT(d, Tolerances{}.congruent);
    }
  const auto t2 = [](const ReductionResult& r) { return map(r.inv.t, [](cplx t) { return t * t; }); };
  for (std::size_t a = 1; a < reds.size(); ++a)
    EXPECT_LE(max_abs(zip(t2(reds[a]), t2(reds[0]), [](cplx u, cplx v) { return u - v; }), 2), Tolerances{}.gauge);
}

TEST(FlexDefect, ParabolaIsOne) {
  const auto d = flex_defect(parabola_curve(GridGeom::square(21, -1, 1)));
  for (double v : d.v) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(FlexDefect, LineIsFlexEverywhere) {
  const auto g = GridGeom::square(21, -1, 1);
  const auto c = sample(g, [](double x, double y) { return CVec2(cplx(x, y), cplx(x, y)); });
  EXPECT_LE(max_abs(flex_defect(c)), 1e-12);
}

TEST(FlexDefect, CubicVanishesAtOrigin) {
  const auto g = GridGeom::square(21, -1, 1);
  const auto c = sample(g, [](double x, double y) {
    const cplx z(x, y);
    return CVec2(z, z * z * z);
  });
  const auto d = flex_defect(c);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) EXPECT_NEAR(d(i, j), 6 * std::abs(g.z(i, j)), 1e-9);
  EXPECT_LE(d(10, 10), 1e-12);
}

TEST(FlexDefect, UmbilicCurvesAreFlexFree) {
  // f_z and f_zz are the columns of an SL(2,C) frame, so the defect is det X = 1.
  const auto g = GridGeom::square(41, -0.5, 0.5);
  const auto uc = umbilic_curve({sample(g, [](double x, double y) { return cplx(1 + x, y); }), 0.5});
  for (double v : flex_defect(uc.curve).v) EXPECT_NEAR(v, 1.0, 1e-8);
  for (const auto& w : uc.warnings) EXPECT_EQ(w.find("FlexPoint"), std::string::npos);
}

#pragma once
// Fourth-order Magnus stepping for right-invariant linear ODEs S' = S a(s)
// along one grid line. Each step multiplies by the exponential of an algebra
// element, so group structure is preserved up to roundoff.

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

#include "fields.hpp"

namespace symplag {

// a(k) returns the algebra value at node k. after_step(S, k) may correct the
// freshly computed S_k in place (used for re-projection and blowup checks).
template <class Mat, class Get, class Post>
std::vector<Mat> magnus_line(const Mat& S0, int n, double h, Get&& a, Post&& after_step) {
  if (n < 4) throw GridTooSmall("Magnus integration needs at least 4 nodes per line");
  std::vector<Mat> S(n);
  S[0] = S0;
  const double c = std::sqrt(3.0) / 12.0 * h * h;
  for (int k = 0; k + 1 < n; ++k) {
    Mat A1 = Mat::Zero(S0.rows(), S0.cols()), A2 = A1;
    const auto w1 = cubic_at(k, kGauss1, n), w2 = cubic_at(k, kGauss2, n);
    for (int q = 0; q < 4; ++q) {
      A1 += w1.w[q] * a(w1.start + q);
      A2 += w2.w[q] * a(w2.start + q);
    }
    const Mat Om = (0.5 * h) * (A1 + A2) + c * (A1 * A2 - A2 * A1);
    S[k + 1] = S[k] * Om.exp();
    after_step(S[k + 1], k + 1);
  }
  return S;
}

template <class Mat, class Get>
std::vector<Mat> magnus_line(const Mat& S0, int n, double h, Get&& a) {
  return magnus_line(S0, n, h, a, [](Mat&, int) {});
}

// Integrates dS = S (ax dx + ay dy) over the grid from S(0,0) = S0.
// column_first: up the x = x0 column, then along every row; else transposed.
// Rows after the first line are independent and run in parallel.
template <class Mat, class AX, class AY, class Post>
Grid<Mat> sweep_grid(const Mat& S0, const GridGeom& g, AX&& ax, AY&& ay, bool column_first, Post&& post) {
  Grid<Mat> S(g, S0);
  if (column_first) {
    const auto col = magnus_line(S0, g.ny, g.dy, [&](int j) { return ay(0, j); }, [&](Mat& m, int j) { post(m, 0, j); });
    parallel_for(g.ny, [&](int j) {
      const auto row = magnus_line(col[j], g.nx, g.dx, [&](int i) { return ax(i, j); }, [&](Mat& m, int i) { post(m, i, j); });
      for (int i = 0; i < g.nx; ++i) S(i, j) = row[i];
    });
  } else {
    const auto row = magnus_line(S0, g.nx, g.dx, [&](int i) { return ax(i, 0); }, [&](Mat& m, int i) { post(m, i, 0); });
    parallel_for(g.nx, [&](int i) {
      const auto col = magnus_line(row[i], g.ny, g.dy, [&](int j) { return ay(i, j); }, [&](Mat& m, int j) { post(m, i, j); });
      for (int j = 0; j < g.ny; ++j) S(i, j) = col[j];
    });
  }
  return S;
}

}  // namespace symplag

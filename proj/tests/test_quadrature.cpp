#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ferro/quadrature.hpp"

using namespace ferro;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// exact integrals of monomials over the reference simplices
double tet_monomial(int a, int b, int c) {
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}
double triangle_monomial(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

}  // namespace

TEST_CASE("gauss-jacobi weights integrate the weight function") {
  for (int alpha = 0; alpha <= 2; ++alpha)
    for (int n = 1; n <= 6; ++n) {
      std::vector<double> x, w;
      gauss_jacobi(n, alpha, x, w);
      double s = 0.0;
      for (double wi : w) s += wi;
      CHECK(s == doctest::Approx(1.0 / (alpha + 1)).epsilon(1e-14));
      // exact for t^(2n-1) against (1 - t)^alpha
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += w[i] * std::pow(x[i], 2 * n - 1);
      const int p = 2 * n - 1;
      const double exact = factorial(p) * factorial(alpha) / factorial(p + alpha + 1);
      CHECK(q == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("tet rules are exact to their degree") {
  for (int degree = 0; degree <= 10; ++degree) {
    const QuadratureRule r = tet_rule(degree);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    for (const auto& p : r.points) {
      CHECK(p.minCoeff() > 0.0);
      CHECK(p.sum() < 1.0);
    }
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b)
        for (int c = 0; a + b + c <= degree; ++c) {
          double q = 0.0;
          for (int i = 0; i < r.size(); ++i)
            q += r.weights[i] * std::pow(r.points[i][0], a) * std::pow(r.points[i][1], b) *
                 std::pow(r.points[i][2], c);
          CHECK(q == doctest::Approx(tet_monomial(a, b, c)).epsilon(1e-12));
        }
  }
  CHECK(tet_rule(6).size() == 64);
  CHECK(tet_rule(8).size() == 125);
}

TEST_CASE("triangle rules are exact to their degree") {
  for (int degree = 0; degree <= 10; ++degree) {
    const QuadratureRule r = triangle_rule(degree);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        double q = 0.0;
        for (int i = 0; i < r.size(); ++i)
          q += r.weights[i] * std::pow(r.points[i][0], a) * std::pow(r.points[i][1], b);
        CHECK(q == doctest::Approx(triangle_monomial(a, b)).epsilon(1e-12));
      }
  }
}

TEST_CASE("bad arguments") {
  std::vector<double> x, w;
  CHECK_THROWS(gauss_jacobi(0, 0, x, w));
  CHECK_THROWS(tet_rule(-1));
}

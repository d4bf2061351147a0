#include <doctest.h>

#include <cmath>

#include "svfem/error.hpp"
#include "svfem/quadrature.hpp"

using namespace svfem;

namespace {

double integrate(const QuadRule& rule, int px, int py) {
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    s += rule.weights[q] * std::pow(rule.points[q].x(), px) * std::pow(rule.points[q].y(), py);
  }
  return s;
}

// Iterated 1D Gauss-Legendre over x in [0,1], y in [0,1-x].
double iterated(int px, int py) {
  const QuadRule line = edge_rule(30);
  double s = 0.0;
  for (int i = 0; i < line.size(); ++i) {
    const double x = line.points[i].x();
    double inner = 0.0;
    for (int j = 0; j < line.size(); ++j) {
      const double y = (1.0 - x) * line.points[j].x();
      inner += line.weights[j] * (1.0 - x) * std::pow(y, py);
    }
    s += line.weights[i] * std::pow(x, px) * inner;
  }
  return s;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("centroid rule") {
  const QuadRule r = triangle_rule(1);
  REQUIRE(r.size() == 1);
  CHECK(r.points[0].x() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.points[0].y() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("triangle rules are exact and positive") {
  for (int d = 0; d <= 20; ++d) {
    const QuadRule r = triangle_rule(d);
    CHECK(r.exact_degree >= d);
    double wsum = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(std::abs(wsum - 0.5) < 1e-14);
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        CHECK(std::abs(integrate(r, a, b) - exact) < 1e-14);
      }
    }
  }
  CHECK_THROWS_AS(triangle_rule(21), Error);
}

TEST_CASE("x^3 y^2 against iterated integration") {
  const double oracle = iterated(3, 2);
  CHECK(std::abs(oracle - 1.0 / 420.0) < 1e-15);
  for (int d = 5; d <= 12; ++d) CHECK(std::abs(integrate(triangle_rule(d), 3, 2) - oracle) < 1e-15);
  CHECK(std::abs(integrate(triangle_rule(1), 1, 0) - 1.0 / 6.0) < 1e-15);
}

TEST_CASE("edge rules") {
  const QuadRule mid = edge_rule(1);
  REQUIRE(mid.size() == 1);
  CHECK(mid.points[0].x() == doctest::Approx(0.5));
  CHECK(mid.weights[0] == doctest::Approx(1.0));
  const QuadRule two = edge_rule(3);
  CHECK(two.size() == 2);
  CHECK(std::abs(integrate(two, 2, 0) - 1.0 / 3.0) < 1e-15);
  const QuadRule four = edge_rule(7);
  CHECK(four.size() == 4);
  CHECK(std::abs(integrate(four, 7, 0) - 0.125) < 1e-15);
  for (int d = 0; d <= 40; ++d) {
    const QuadRule r = edge_rule(d);
    CHECK(std::abs(integrate(r, d, 0) - 1.0 / (d + 1)) < 1e-14);
  }
}

TEST_CASE("rules are deterministic") {
  const QuadRule a = triangle_rule(13), b = triangle_rule(13);
  REQUIRE(a.size() == b.size());
  for (int q = 0; q < a.size(); ++q) {
    CHECK(a.weights[q] == b.weights[q]);
    CHECK(a.points[q] == b.points[q]);
  }
}

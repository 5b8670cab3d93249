#include <doctest.h>

#include <cmath>

#include "definetti/errors.hpp"
#include "definetti/model.hpp"

using namespace definetti;

TEST_CASE("model parameters must be positive and finite") {
  CHECK_NOTHROW(ModelParams(1.0, 0.5, 0.1));
  CHECK_THROWS_AS(ModelParams(0.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(ModelParams(1.0, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(ModelParams(1.0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(ModelParams(1.0, 1.0, INFINITY), ConfigError);
}

TEST_CASE("closed-form bound families") {
  const auto c = BoundFn::constant(2.0);
  CHECK(c(5.0) == 2.0);
  CHECK(c.derivative(3.0) == 0.0);
  CHECK(c.is_constant());
  CHECK_FALSE(c.is_zero());
  CHECK(BoundFn::constant(0.0).is_zero());

  const auto a = BoundFn::affine(0.5, 1.0);
  CHECK(a(2.0) == doctest::Approx(2.0));
  CHECK(a.derivative(7.0) == 0.5);

  const auto cap = BoundFn::capped_linear(2.0, 3.0);
  CHECK(cap(1.0) == 2.0);
  CHECK(cap(10.0) == 3.0);
  REQUIRE(cap.kinks().size() == 1);
  CHECK(cap.kinks()[0] == doctest::Approx(1.5));
  // left derivative at the kink
  CHECK(cap.derivative(1.5) == 2.0);
  CHECK(cap.derivative(1.6) == 0.0);

  CHECK_THROWS_AS(BoundFn::linear(0.0), ConfigError);
  CHECK_THROWS_AS(BoundFn::affine(1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(BoundFn::capped_linear(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(BoundFn::constant(-1.0), ConfigError);
}

TEST_CASE("bounds extend linearly below zero") {
  const auto cap = BoundFn::capped_linear(2.0, 3.0);
  CHECK(cap(-1.0) == -2.0);
  CHECK(cap.derivative(-1.0) == 2.0);
  const auto a = BoundFn::affine(1.0, 0.5);
  CHECK(a(-2.0) == doctest::Approx(-1.5));
  CHECK(eval_bound(a, -2.0) == a(-2.0));
}

TEST_CASE("smoothed capped bound decreases to the capped bound") {
  const auto cap = BoundFn::capped_linear(1.0, 2.0);
  double prev_gap = INFINITY;
  for (double eps : {0.5, 0.1, 0.02}) {
    const auto s = BoundFn::smoothed_capped_linear(1.0, 2.0, eps);
    double gap = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double x = 0.01 * i;
      CHECK(s(x) >= cap(x) - 1e-12);
      gap = std::max(gap, s(x) - cap(x));
    }
    CHECK(gap <= eps + 1e-12);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("custom bounds are validated on a sampling grid") {
  auto convex = [](double x) { return x * x; };
  auto convex_d = [](double x) { return 2 * x; };
  CHECK_THROWS_AS(BoundFn::custom(convex, convex_d, 0.0), ConfigError);
  auto decreasing = [](double x) { return 1.0 - 0.1 * x; };
  auto decreasing_d = [](double) { return -0.1; };
  CHECK_THROWS_AS(BoundFn::custom(decreasing, decreasing_d, -0.1), ConfigError);
  auto sqrt_like = [](double x) { return std::sqrt(1.0 + x) - 1.0; };
  auto sqrt_d = [](double x) { return 0.5 / std::sqrt(1.0 + x); };
  const auto f = BoundFn::custom(sqrt_like, sqrt_d, 0.5);
  CHECK(f(3.0) == doctest::Approx(1.0));
  CHECK(f.kind() == BoundKind::Custom);
}

TEST_CASE("tabulated bound interpolates its knots monotonically") {
  const std::vector<double> xs{0.0, 1.0, 2.0, 4.0};
  const std::vector<double> fs{0.0, 1.0, 1.5, 2.0};
  const auto f = BoundFn::tabulated(xs, fs);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(f(xs[i]) == doctest::Approx(fs[i]).epsilon(1e-14));
  double prev = f(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double v = f(0.03 * i);
    CHECK(v >= prev - 1e-14);
    prev = v;
  }
  CHECK_THROWS_AS(BoundFn::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 3.0}), ConfigError);
  CHECK_THROWS_AS(BoundFn::tabulated({0.5, 1.0}, {0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(BoundFn::tabulated({0.0, 1.0}, {1.0, 0.0}), ConfigError);
}

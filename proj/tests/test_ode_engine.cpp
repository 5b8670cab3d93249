#include <doctest.h>

#include <cmath>

#include "definetti/closed_forms.hpp"
#include "definetti/errors.hpp"
#include "definetti/ode_engine.hpp"
#include "oracles.hpp"

using namespace definetti;

namespace {

SolveConfig query(double x) {
  SolveConfig c;
  c.x_query = x;
  return c;
}

}  // namespace

TEST_CASE("phi for F = 0 is the exponential decay") {
  for (double mu : {0.5, 2.0})
    for (double q : {0.1, 1.0}) {
      const ModelParams p(mu, 1.3, q);
      const double lambda = (mu + std::sqrt(mu * mu + 2 * q * p.variance())) / p.variance();
      const auto phi = solve_phi_F(p, BoundFn::constant(0.0), query(10.0));
      double err = 0.0;
      for (double x = 0.0; x <= 10.0; x += 0.125) err = std::max(err, std::abs(phi.value(x) - std::exp(-lambda * x)));
      CHECK(err < 1e-7);
      CHECK(phi.value(0.0) == 1.0);
    }
}

TEST_CASE("constant bound gives constant I_F and shifted exponential phi") {
  const ModelParams p(1.0, 1.0, 0.2);
  const double R = 0.6;
  const auto f = BoundFn::constant(R);
  const auto I = solve_I_F(p, f, query(8.0));
  for (double x : {0.0, 1.0, 7.5}) {
    CHECK(I.value(x) == doctest::Approx(R / p.q()).epsilon(1e-9));
    CHECK(std::abs(I.deriv(x)) < 1e-9);
  }
  const double m = p.mu() - R;
  const double lambda = (m + std::sqrt(m * m + 2 * p.q() * p.variance())) / p.variance();
  const auto phi = solve_phi_F(p, f, query(8.0));
  for (double x : {0.5, 3.0, 8.0}) CHECK(phi.value(x) == doctest::Approx(std::exp(-lambda * x)).epsilon(1e-6));
}

TEST_CASE("affine bound matches the closed forms") {
  for (double R : {0.0, 0.5}) {
    const ModelParams p(1.0, 1.0, 0.1);
    const auto f = BoundFn::affine(1.0, R);
    const auto phi = solve_phi_F(p, f, query(8.0));
    const auto I = solve_I_F(p, f, query(8.0));
    for (double x = 0.0; x <= 8.0; x += 0.25) {
      CHECK(std::abs(phi.value(x) - phi_affine(p, 1.0, R, x)) < 1e-7);
      CHECK(phi.deriv(x) == doctest::Approx(phi_affine_deriv(p, 1.0, R, x)).epsilon(1e-6));
      CHECK(I.value(x) == doctest::Approx(I_affine_closed(p, 1.0, R, x)).epsilon(1e-8));
    }
  }
}

TEST_CASE("capped bound matches the closed forms across the junction") {
  const ModelParams p(1.0, 1.0, 0.1);
  const double K = 1.0, R = 2.0;
  const CappedClosedForm cf(p, K, R);
  const auto f = BoundFn::capped_linear(K, R);
  const auto phi = solve_phi_F(p, f, query(8.0));
  const auto I = solve_I_F(p, f, query(8.0));
  for (double x = 0.0; x <= 8.0; x += 0.25) {
    CHECK(std::abs(phi.value(x) - cf.phi(x)) < 1e-7);
    CHECK(I.value(x) == doctest::Approx(cf.IF(x)).epsilon(1e-8));
  }
  CHECK(phi.value(cf.junction()) == doctest::Approx(cf.junction_values().phi_at_junction).epsilon(1e-7));
}

TEST_CASE("structural properties of phi_F and I_F across the family") {
  const ModelParams p(0.8, 1.1, 0.3);
  const std::vector<BoundFn> family{BoundFn::linear(0.7), BoundFn::affine(2.0, 0.3),
                                    BoundFn::capped_linear(1.5, 1.0),
                                    BoundFn::smoothed_capped_linear(1.5, 1.0, 0.1),
                                    BoundFn::tabulated({0.0, 1.0, 2.0, 4.0}, {0.0, 0.8, 1.2, 1.4})};
  for (const auto& f : family) {
    CAPTURE(f.describe());
    const auto phi = solve_phi_F(p, f, query(6.0));
    const auto I = solve_I_F(p, f, query(6.0));
    for (double x = 0.0; x <= 6.0; x += 0.1) {
      const auto j = I.eval(x);
      CHECK(j.d1 >= -1e-9);
      CHECK(j.d1 < 1.0);
      CHECK(j.d2 <= 1e-8);
      const auto ph = phi.eval(x);
      CHECK(ph.v > 0.0);
      CHECK(ph.d1 < 0.0);
    }
  }
}

TEST_CASE("profiles meet their residual target and are reproducible") {
  const ModelParams p(1.0, 1.0, 1.0);
  const auto f = BoundFn::linear(1.0);
  SolveConfig cfg = query(5.0);
  for (double tol : {1e-6, 1e-8}) {
    cfg.tol = tol;
    const auto phi = solve_phi_F(p, f, cfg);
    CHECK(phi.meta().residual <= tol);
    CHECK(gamma_residual(p, f, phi, false) <= tol);
    const auto I = solve_I_F(p, f, cfg);
    CHECK(I.meta().residual <= tol);
    CHECK(gamma_midpoint_residual(p, f, I, true) <= tol);
    CHECK(I.domain_left() < 0.0);
    CHECK(I.domain_right() >= 5.0);
  }
  const auto a = solve_phi_F(p, f, cfg);
  const auto b = solve_phi_F(p, f, cfg);
  CHECK(a.nodes() == b.nodes());
  CHECK(a.values() == b.values());
  CHECK(a.d2() == b.d2());
}

TEST_CASE("frozen decay rate solves its quadratic") {
  const ModelParams p(1.0, 0.7, 0.4);
  for (double F : {0.0, 0.5, 3.0}) {
    const double l = frozen_decay_rate(p, F);
    CHECK(l > 0.0);
    CHECK(0.5 * p.variance() * l * l - (p.mu() - F) * l - p.q() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("solver errors") {
  const ModelParams p(1.0, 1.0, 1.0);
  SolveConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(solve_phi_F(p, BoundFn::linear(1.0), bad), ConfigError);
  bad = SolveConfig{};
  bad.mesh_n = 2;
  CHECK_THROWS_AS(solve_I_F(p, BoundFn::linear(1.0), bad), ConfigError);

  SolveConfig hopeless;
  hopeless.tol = 1e-15;
  hopeless.refine_max = 1;
  try {
    (void)solve_phi_F(p, BoundFn::linear(1.0), hopeless);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK_FALSE(e.history().empty());
  }
}

TEST_CASE("quintic Hermite profile reproduces quintics") {
  auto f = [](double x) { return x * x * x * x * x - 2 * x * x * x + 0.5 * x - 1; };
  auto d1 = [](double x) { return 5 * x * x * x * x - 6 * x * x + 0.5; };
  auto d2 = [](double x) { return 20 * x * x * x - 12 * x; };
  const std::vector<double> xs{-1.0, -0.2, 0.5, 1.7};
  std::vector<double> v, a, b;
  for (double x : xs) {
    v.push_back(f(x));
    a.push_back(d1(x));
    b.push_back(d2(x));
  }
  const FnProfile prof(xs, v, a, b);
  for (double x : {-0.9, -0.6, 0.1, 0.49, 1.2, 1.7}) {
    const auto j = prof.eval(x);
    CHECK(j.v == doctest::Approx(f(x)).epsilon(1e-12));
    CHECK(j.d1 == doctest::Approx(d1(x)).epsilon(1e-11));
    CHECK(j.d2 == doctest::Approx(d2(x)).epsilon(1e-10));
  }
  CHECK(prof.eval(0.5).v == v[2]);
  CHECK_THROWS_AS(prof.eval(1.8), DomainError);
  CHECK_THROWS_AS(FnProfile({0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(FnProfile({0.0, 1.0}, {1.0}, {0.0, 0.0}, {0.0, 0.0}), DomainError);

  const auto c = FnProfile::constant(2.5, 0.0, 3.0);
  CHECK(c.value(1.7) == 2.5);
  CHECK(c.deriv(1.7) == 0.0);
}

TEST_CASE("kinked bound whose junction lands on a mesh node") {
  // The truncation guard regrids with the already aligned step; the kink must
  // stay a node without changing the step.
  const ModelParams p(2.0, 0.7, 0.5);
  const auto f = BoundFn::capped_linear(1.0, 0.5);
  const auto phi = solve_phi_F(p, f, query(10.0));
  CHECK(phi.meta().truncation_change < SolveConfig{}.tol);
  CHECK(phi.meta().residual <= SolveConfig{}.tol);
}

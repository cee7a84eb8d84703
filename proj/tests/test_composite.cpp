#include <doctest.h>

#include <cmath>

#include "fbe/composite.hpp"
#include "fbe/dc.hpp"
#include "fbe/prox.hpp"
#include "oracles.hpp"

using fbe::composite_problem;
using fbe::vector;

namespace {

// f = 0.5 ||x||^2 with the zero penalty
composite_problem identity_quadratic(Eigen::Index n) {
  composite_problem prob;
  prob.dim = n;
  prob.f.curvature_bound = 1.0;
  prob.f.value = [](const vector& x) { return 0.5 * x.squaredNorm(); };
  prob.f.gradient = [](const vector& x) -> vector { return x; };
  prob.f.hess_vec = [](const vector&, const vector& v) -> vector { return v; };
  prob.P = fbe::zero_penalty();
  return prob;
}

// 1-D f = 0.5 (x - 3)^2 with P = |.|
composite_problem shifted_lasso() {
  composite_problem prob;
  prob.dim = 1;
  prob.f.curvature_bound = 1.0;
  prob.f.value = [](const vector& x) { return 0.5 * (x[0] - 3.0) * (x[0] - 3.0); };
  prob.f.gradient = [](const vector& x) -> vector {
    vector g(1);
    g[0] = x[0] - 3.0;
    return g;
  };
  prob.f.hess_vec = [](const vector&, const vector& v) -> vector { return v; };
  prob.P = fbe::l1_penalty(1.0);
  return prob;
}

composite_problem random_lasso(fbe::rng_stream& rng, Eigen::Index n) {
  composite_problem prob;
  prob.dim = n;
  prob.f = oracles::random_quadratic(rng, n);
  prob.P = fbe::l1_penalty(1.0);
  return prob;
}

composite_problem small_lifted(uint64_t seed, double mu, double* gamma_out) {
  const fbe::instance inst = oracles::small_instance(4, 3, 2, seed);
  const fbe::dc_least_squares dc(inst.A, inst.b, mu, mu);
  Eigen::SelfAdjointEigenSolver<fbe::matrix> eig(inst.A.transpose() * inst.A);
  const composite_problem prob = fbe::lift(
      std::make_shared<const fbe::dc_least_squares>(dc), eig.eigenvalues().maxCoeff());
  *gamma_out = 0.95 / prob.f.curvature_bound;
  return prob;
}

vector random_vec(fbe::rng_stream& rng, Eigen::Index n, double scale = 1.0) {
  vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("prox-gradient map on pinned cases") {
  const composite_problem quad = identity_quadratic(1);
  vector x(1);
  x[0] = 2.0;
  CHECK(fbe::prox_grad_map(quad, x, 0.5)[0] == doctest::Approx(1.0));

  // stationary point is a fixed point
  CHECK(fbe::prox_grad_map(quad, vector::Zero(1), 0.5).norm() == 0.0);

  const composite_problem lasso = shifted_lasso();
  const fbe::fbe_point pt(lasso, vector::Zero(1), 0.5);
  CHECK(pt.forward()[0] == doctest::Approx(1.5));
  CHECK(pt.backward()[0] == doctest::Approx(1.0));
  // independent 1-D oracle for the backward step
  const double u = pt.forward()[0];
  const auto [p_grid, unused] = oracles::grid_min_1d(
      [&](double p) { return std::abs(p) + (p - u) * (p - u) / (2.0 * 0.5); }, -4.0, 4.0);
  CHECK(pt.backward()[0] == doctest::Approx(p_grid).epsilon(1e-7));
}

TEST_CASE("envelope value closed forms") {
  for (double gamma : {0.3, 0.5, 0.9}) {
    const composite_problem quad = identity_quadratic(3);
    fbe::rng_stream rng(3);
    const vector x = random_vec(rng, 3, 2.0);
    CHECK(fbe::fbe_value(quad, x, gamma) ==
          doctest::Approx(0.5 * (1.0 - gamma) * x.squaredNorm()).epsilon(1e-13));
  }

  // stationary point: envelope equals the composite objective
  const composite_problem lasso = shifted_lasso();
  vector opt(1);
  opt[0] = 2.0;  // argmin of 0.5 (x-3)^2 + |x|
  const double composite = 0.5 * 1.0 + 2.0;
  CHECK(fbe::fbe_value(lasso, opt, 0.5) == doctest::Approx(composite).epsilon(1e-13));
  CHECK(fbe::residual(lasso, opt, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("envelope value matches the coordinatewise inner solution") {
  fbe::rng_stream rng(7);
  const Eigen::Index n = 5;
  const composite_problem prob = random_lasso(rng, n);
  const double gamma = 0.9 / prob.f.curvature_bound;

  for (int trial = 0; trial < 20; ++trial) {
    const vector x = random_vec(rng, n, 1.5);
    const double fx = prob.f.value(x);
    const vector g = prob.f.gradient(x);
    // inner problem solved independently, coordinate by coordinate
    double inf_value = fx;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double target = x[i] - gamma * g[i];
      const double yi =
          std::copysign(std::max(std::abs(target) - gamma, 0.0), target);
      inf_value += g[i] * (yi - x[i]) + (yi - x[i]) * (yi - x[i]) / (2.0 * gamma) +
                   std::abs(yi);
    }
    CHECK(fbe::fbe_value(prob, x, gamma) == doctest::Approx(inf_value).epsilon(1e-12));
  }
}

TEST_CASE("envelope gradient pinned and against finite differences") {
  const composite_problem quad = identity_quadratic(1);
  vector x(1);
  x[0] = 2.0;
  CHECK(fbe::fbe_gradient(quad, x, 0.5)[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(fbe::fbe_gradient(quad, vector::Zero(1), 0.5).norm() == 0.0);

  double gamma = 0.0;
  const composite_problem lifted = small_lifted(21, 0.1, &gamma);
  fbe::rng_stream rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const vector w = random_vec(rng, lifted.dim);
    const vector analytic = fbe::fbe_gradient(lifted, w, gamma);
    const vector numeric = oracles::fd_gradient(
        [&](const vector& v) { return fbe::fbe_value(lifted, v, gamma); }, w, 1e-6);
    CHECK((analytic - numeric).norm() / std::max(1e-12, analytic.norm()) <= 1e-5);
  }
}

TEST_CASE("residual pinned cases and prox-map Lipschitz property") {
  const composite_problem quad = identity_quadratic(1);
  vector x(1);
  x[0] = 2.0;
  CHECK(fbe::residual(quad, x, 0.5) == doctest::Approx(1.0));
  CHECK(fbe::residual(quad, vector::Zero(1), 0.5) == 0.0);

  double gamma = 0.0;
  const composite_problem lifted = small_lifted(33, 0.2, &gamma);
  fbe::rng_stream rng(13);
  for (int pair = 0; pair < 1000; ++pair) {
    const vector a = random_vec(rng, lifted.dim, 2.0);
    const vector b = random_vec(rng, lifted.dim, 2.0);
    const double lhs =
        (fbe::prox_grad_map(lifted, a, gamma) - fbe::prox_grad_map(lifted, b, gamma))
            .norm();
    CHECK(lhs <= 2.0 * (a - b).norm() + 1e-12);
  }
}

TEST_CASE("bregman distance identities and envelope upper bound") {
  // f == 0: the Bregman distance of ||.||^2/(2 gamma) at gamma = 1/2
  composite_problem zero_f;
  zero_f.dim = 3;
  zero_f.f.curvature_bound = 0.0;
  zero_f.f.value = [](const vector&) { return 0.0; };
  zero_f.f.gradient = [](const vector& x) -> vector { return vector::Zero(x.size()); };
  zero_f.f.hess_vec = [](const vector&, const vector& v) -> vector {
    return vector::Zero(v.size());
  };
  zero_f.P = fbe::zero_penalty();

  fbe::rng_stream rng(41);
  const vector a = random_vec(rng, 3);
  const vector b = random_vec(rng, 3);
  CHECK(fbe::bregman_distance(zero_f, a, a, 0.5) == 0.0);
  CHECK(fbe::bregman_distance(zero_f, a, b, 0.5) ==
        doctest::Approx((a - b).squaredNorm()).epsilon(1e-13));

  const composite_problem lasso = random_lasso(rng, 4);
  const double L = lasso.f.curvature_bound;
  const double gamma = 0.8 / L;
  for (int trial = 0; trial < 200; ++trial) {
    const vector x = random_vec(rng, 4, 1.5);
    const vector y = random_vec(rng, 4, 1.5);
    const double d = fbe::bregman_distance(lasso, y, x, gamma);
    CHECK(d >= 0.5 * (1.0 / gamma - L) * (y - x).squaredNorm() - 1e-10);
    // generalized Moreau-envelope upper bound at sampled y
    const double upper = lasso.f.value(y) + lasso.P.value(y) + d;
    CHECK(fbe::fbe_value(lasso, x, gamma) <= upper + 1e-10);
  }
}

TEST_CASE("sandwich inequality on random lasso and lifted instances") {
  fbe::rng_stream rng(55);
  const composite_problem lasso = random_lasso(rng, 6);
  const double gamma = 0.9 / lasso.f.curvature_bound;
  for (int trial = 0; trial < 300; ++trial) {
    const vector x = random_vec(rng, 6, 2.0);
    const fbe::fbe_point pt(lasso, x, gamma);
    const double outer = lasso.f.value(x) + lasso.P.value(x);
    const double at_p = lasso.f.value(pt.backward()) + lasso.P.value(pt.backward());
    const double slack = 1e-10 * std::max(1.0, std::abs(outer));
    CHECK(pt.value() <= outer + slack);
    CHECK(at_p <= pt.value() + slack);
    CHECK(fbe::fbe_value(lasso, pt.backward(), gamma) <= at_p + slack);
    // descent of the prox-gradient step, strict away from stationarity
    const double next = fbe::fbe_value(lasso, pt.backward(), gamma);
    CHECK(next <= pt.value() + slack);
    if (pt.residual() > 1e-4) CHECK(next < pt.value());
  }
}

TEST_CASE("gradient consistency at 100 random points") {
  fbe::rng_stream rng(67);
  const composite_problem lasso = random_lasso(rng, 5);
  const double gamma = 0.9 / lasso.f.curvature_bound;
  for (int trial = 0; trial < 100; ++trial) {
    const vector x = random_vec(rng, 5, 1.5);
    const vector g = fbe::fbe_gradient(lasso, x, gamma);
    const vector fd = oracles::fd_gradient(
        [&](const vector& v) { return fbe::fbe_value(lasso, v, gamma); }, x, 1e-6);
    CHECK((g - fd).norm() / std::max(1e-12, g.norm()) <= 1e-5);
  }
}

TEST_CASE("stationarity equivalence bounds") {
  double gamma = 0.0;
  const composite_problem lifted = small_lifted(71, 0.15, &gamma);
  const double L = lifted.f.curvature_bound;
  fbe::rng_stream rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const vector x = random_vec(rng, lifted.dim, 1.5);
    const fbe::fbe_point pt(lifted, x, gamma);
    const double gn = pt.gradient().norm();
    const double res = pt.residual();
    CHECK(gn <= (1.0 + gamma * L) / gamma * res + 1e-9);
    CHECK(res <= gamma / (1.0 - gamma * L) * gn + 1e-9);
  }
}

TEST_CASE("smooth term contracts hold for the lifted problem") {
  double gamma = 0.0;
  const composite_problem lifted = small_lifted(77, 0.3, &gamma);
  const double L = lifted.f.curvature_bound;
  fbe::rng_stream rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const vector x = random_vec(rng, lifted.dim, 2.0);
    const vector y = random_vec(rng, lifted.dim, 2.0);
    // gradient is L-Lipschitz along sampled segments
    const double lhs = (lifted.f.gradient(x) - lifted.f.gradient(y)).norm();
    CHECK(lhs <= L * (x - y).norm() + 1e-10);
    // Hessian-vector product is symmetric and spectrally bounded
    const vector hx = lifted.f.hess_vec(x, y);
    const vector hy = lifted.f.hess_vec(x, x);
    CHECK(std::abs(hx.dot(x) - hy.dot(y)) <= 1e-10 * std::max(1.0, hx.norm() * x.norm()));
    CHECK(std::abs(y.dot(hx)) / y.squaredNorm() <= L + 1e-10);
  }
}

TEST_CASE("step and input validation") {
  const composite_problem quad = identity_quadratic(2);
  CHECK_THROWS_AS(fbe::fbe_value(quad, vector::Zero(2), 0.0), fbe::invalid_input);
  CHECK_THROWS_AS(fbe::fbe_value(quad, vector::Zero(2), -0.1), fbe::invalid_input);
  CHECK_THROWS_AS(fbe::fbe_value(quad, vector::Zero(2), 0.9999), fbe::invalid_input);
  CHECK_NOTHROW(fbe::fbe_value(quad, vector::Zero(2), 0.998));

  vector bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fbe::fbe_value(quad, bad, 0.5), fbe::invalid_input);
  CHECK_THROWS_AS(fbe::fbe_value(quad, vector::Zero(3), 0.5), fbe::invalid_input);

  // a smooth term that overflows produces a numeric error, not NaN
  composite_problem exploding = quad;
  exploding.f.value = [](const vector&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  exploding.f.value_and_gradient = nullptr;
  CHECK_THROWS_AS(fbe::fbe_value(exploding, vector::Zero(2), 0.5), fbe::numeric_error);
}

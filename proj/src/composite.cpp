#include "fbe/composite.hpp"

#include <cmath>

namespace fbe {

namespace {

bool all_finite(const vector& v) { return v.allFinite(); }

void check_step(double gamma, double curvature) {
  if (!(gamma > 0.0) || !(gamma * curvature < 0.999)) {
    throw invalid_input("step size must lie in (0, 0.999/L), got gamma*L = " +
                        std::to_string(gamma * curvature));
  }
}

}  // namespace

fbe_point::fbe_point(const composite_problem& prob, vector x, double gamma)
    : prob_(&prob), x_(std::move(x)), gamma_(gamma) {
  check_step(gamma_, prob.f.curvature_bound);
  if (x_.size() != prob.dim) {
    throw invalid_input("point dimension does not match problem dimension");
  }
  if (!all_finite(x_)) throw invalid_input("non-finite point");

  double f_x;
  if (prob.f.value_and_gradient) {
    auto [v, g] = prob.f.value_and_gradient(x_);
    f_x = v;
    grad_f_ = std::move(g);
  } else {
    f_x = prob.f.value(x_);
    grad_f_ = prob.f.gradient(x_);
  }
  if (!std::isfinite(f_x) || !all_finite(grad_f_)) {
    throw numeric_error("non-finite smooth term evaluation");
  }

  forward_ = x_ - gamma_ * grad_f_;
  backward_ = prob.P.prox(gamma_, forward_);
  if (!all_finite(backward_)) throw numeric_error("non-finite prox output");
  p_value_ = prob.P.value(backward_);

  const double moreau = p_value_ + (backward_ - forward_).squaredNorm() / (2.0 * gamma_);
  value_ = f_x - 0.5 * gamma_ * grad_f_.squaredNorm() + moreau;
  residual_ = (x_ - backward_).norm();
  if (!std::isfinite(value_) || !std::isfinite(residual_)) {
    throw numeric_error("non-finite envelope value");
  }
}

const vector& fbe_point::gradient() const {
  if (!gradient_) {
    const vector diff = x_ - backward_;
    vector g = (diff - gamma_ * prob_->f.hess_vec(x_, diff)) / gamma_;
    if (!all_finite(g)) throw numeric_error("non-finite envelope gradient");
    gradient_ = std::move(g);
  }
  return *gradient_;
}

vector prox_grad_map(const composite_problem& prob, const vector& x, double gamma) {
  return fbe_point(prob, x, gamma).backward();
}

double fbe_value(const composite_problem& prob, const vector& x, double gamma) {
  return fbe_point(prob, x, gamma).value();
}

vector fbe_gradient(const composite_problem& prob, const vector& x, double gamma) {
  return fbe_point(prob, x, gamma).gradient();
}

double residual(const composite_problem& prob, const vector& x, double gamma) {
  return fbe_point(prob, x, gamma).residual();
}

double bregman_distance(const composite_problem& prob, const vector& y,
                        const vector& x, double gamma) {
  check_step(gamma, prob.f.curvature_bound);
  if (!all_finite(x) || !all_finite(y)) throw invalid_input("non-finite point");
  const double phi_y = y.squaredNorm() / (2.0 * gamma) - prob.f.value(y);
  const double phi_x = x.squaredNorm() / (2.0 * gamma) - prob.f.value(x);
  const vector grad_phi_x = x / gamma - prob.f.gradient(x);
  const double d = phi_y - phi_x - grad_phi_x.dot(y - x);
  if (!std::isfinite(d)) throw numeric_error("non-finite Bregman distance");
  return d;
}

}  // namespace fbe

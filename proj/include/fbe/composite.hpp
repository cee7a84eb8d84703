#ifndef FBE_COMPOSITE_HPP
#define FBE_COMPOSITE_HPP

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <utility>

#include "fbe/errors.hpp"

namespace fbe {

using vector = Eigen::VectorXd;

/**
 * Smooth part of a composite objective: twice differentiable, with all
 * Hessian eigenvalues inside [-curvature_bound, curvature_bound]. Only
 * Hessian-vector products are ever requested, never the full Hessian.
 */
struct smooth_term {
  std::function<double(const vector&)> value;
  std::function<vector(const vector&)> gradient;
  std::function<vector(const vector&, const vector&)> hess_vec;
  double curvature_bound = 0.0;

  /// Optional fused value+gradient evaluation. When set it is preferred over
  /// separate calls, so terms whose value and gradient share an expensive
  /// intermediate (a matrix-vector product, typically) pay for it once.
  std::function<std::pair<double, vector>(const vector&)> value_and_gradient;
};

/**
 * Nonsmooth part: proper closed convex, possibly extended-valued, with an
 * exact proximal map prox(tau, u) = argmin_y { value(y) + ||y-u||^2/(2 tau) }.
 */
struct proxable_term {
  std::function<double(const vector&)> value;
  std::function<vector(double, const vector&)> prox;
};

struct composite_problem {
  smooth_term f;
  proxable_term P;
  Eigen::Index dim = 0;
};

/**
 * One evaluation of the forward-backward envelope at a point x.
 *
 * The constructor computes and caches grad f(x), the forward point
 * u = x - gamma * grad f(x), the backward point p = prox_{gamma P}(u),
 * P(p) and the envelope value, so that value, residual and gradient at the
 * same x share a single gradient and a single prox call. The envelope
 * gradient costs one extra Hessian-vector product and is evaluated on first
 * request only.
 *
 * Requires 0 < gamma < 0.999 / curvature_bound. The envelope's guarantees
 * degrade as gamma approaches 1/L, hence the deliberately strict margin.
 */
class fbe_point {
 public:
  fbe_point(const composite_problem& prob, vector x, double gamma);

  const composite_problem& problem() const { return *prob_; }
  const vector& x() const { return x_; }
  double step() const { return gamma_; }
  const vector& grad_f() const { return grad_f_; }
  const vector& forward() const { return forward_; }
  const vector& backward() const { return backward_; }
  /// P evaluated at the backward point.
  double penalty_at_backward() const { return p_value_; }
  /// Envelope value F_gamma(x).
  double value() const { return value_; }
  /// Prox-gradient residual ||x - p||; zero exactly at stationary points.
  double residual() const { return residual_; }
  /// Envelope gradient; computed lazily with one Hessian-vector product.
  const vector& gradient() const;

 private:
  const composite_problem* prob_;
  vector x_;
  double gamma_;
  vector grad_f_;
  vector forward_;
  vector backward_;
  double p_value_;
  double value_;
  double residual_;
  mutable std::optional<vector> gradient_;
};

/// p = prox_{gamma P}(x - gamma grad f(x)), the prox-gradient map.
vector prox_grad_map(const composite_problem& prob, const vector& x, double gamma);

/// Envelope value F_gamma(x).
double fbe_value(const composite_problem& prob, const vector& x, double gamma);

/// Analytic envelope gradient gamma^{-1}(I - gamma Hess f(x))(x - p).
vector fbe_gradient(const composite_problem& prob, const vector& x, double gamma);

/// ||x - prox_grad_map(x)||.
double residual(const composite_problem& prob, const vector& x, double gamma);

/**
 * Bregman distance D_phi(y, x) for phi(v) = ||v||^2/(2 gamma) - f(v).
 * Nonnegative for gamma < 1/L, and bounded below by
 * 0.5 (1/gamma - L) ||y - x||^2.
 */
double bregman_distance(const composite_problem& prob, const vector& y,
                        const vector& x, double gamma);

}  // namespace fbe

#endif

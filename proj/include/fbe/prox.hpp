#ifndef FBE_PROX_HPP
#define FBE_PROX_HPP

#include <Eigen/Core>

#include "fbe/composite.hpp"

namespace fbe {

/// Componentwise shrinkage sign(y_i) * max(|y_i| - tau, 0). Requires tau >= 0.
vector soft_threshold(const vector& y, double tau);

/// Euclidean projection onto the closed unit ball.
vector project_unit_ball(const vector& y);

/// Moreau envelope value P(p) + ||p - u||^2/(2 gamma) at p = prox(gamma, u).
double moreau_value(const proxable_term& term, double gamma, const vector& u);

/**
 * Minimizer of <v, x> over the nonnegative part of the unit sphere
 * { ||x|| = 1, x >= 0 }. When v has negative entries the solution is
 * supported there and proportional to -v; otherwise it is the coordinate
 * vector at the smallest entry of v (lowest index on ties).
 */
vector sphere_linear_min(const vector& v);

/// Weights of the shifted l1 minus l2 penalty; requires mu1 >= mu2 > 0.
struct l1l2_params {
  double mu1;
  double mu2;
  l1l2_params(double mu1_in, double mu2_in);
};

/**
 * Closed-form minimizer of 0.5 ||x - y||^2 + mu1 ||x||_1 - mu2 ||x||.
 *
 * With I = { i : mu1 < |y_i| } the solution is a rescaled soft threshold
 * supported on I when I is nonempty, and otherwise a single-coordinate
 * vector at the largest-magnitude entry of y (lowest index on ties) with
 * magnitude max(mu2 - (mu1 - |y_i|), 0).
 */
vector l1l2_prox(const vector& y, const l1l2_params& params);

inline vector l1l2_prox(const vector& y, double mu1, double mu2) {
  return l1l2_prox(y, l1l2_params(mu1, mu2));
}

// Ready-made penalty terms.
proxable_term zero_penalty();
proxable_term l1_penalty(double weight);
proxable_term unit_ball_indicator();

}  // namespace fbe

#endif

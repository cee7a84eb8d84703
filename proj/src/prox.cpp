#include "fbe/prox.hpp"

#include <cmath>
#include <limits>

namespace fbe {

namespace {

double sign(double t) { return static_cast<double>(t > 0.0) - static_cast<double>(t < 0.0); }

// Slack for membership tests on projected points: a freshly projected vector
// has norm 1 only up to roundoff.
constexpr double kBallSlack = 1e-10;

}  // namespace

vector soft_threshold(const vector& y, double tau) {
  if (!(tau >= 0.0)) throw invalid_input("soft_threshold: tau must be nonnegative");
  vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    out[i] = sign(y[i]) * std::max(std::abs(y[i]) - tau, 0.0);
  }
  return out;
}

vector project_unit_ball(const vector& y) {
  const double nrm = y.norm();
  if (nrm <= 1.0) return y;
  return y / nrm;
}

double moreau_value(const proxable_term& term, double gamma, const vector& u) {
  if (!(gamma > 0.0)) throw invalid_input("moreau_value: gamma must be positive");
  const vector p = term.prox(gamma, u);
  return term.value(p) + (p - u).squaredNorm() / (2.0 * gamma);
}

vector sphere_linear_min(const vector& v) {
  if (v.size() < 1) throw invalid_input("sphere_linear_min: empty input");
  if (!v.allFinite()) throw invalid_input("sphere_linear_min: non-finite input");

  double neg_norm_sq = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) neg_norm_sq += v[i] * v[i];
  }

  vector x = vector::Zero(v.size());
  if (neg_norm_sq > 0.0) {
    const double nrm = std::sqrt(neg_norm_sq);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] < 0.0) x[i] = -v[i] / nrm;
    }
  } else {
    // all entries nonnegative: a coordinate vector at the smallest entry,
    // lowest index on ties
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (v[i] < v[best]) best = i;
    }
    x[best] = 1.0;
  }
  return x;
}

l1l2_params::l1l2_params(double mu1_in, double mu2_in) : mu1(mu1_in), mu2(mu2_in) {
  if (!(mu2 > 0.0) || !(mu1 >= mu2)) {
    throw invalid_input("l1l2_params: requires mu1 >= mu2 > 0");
  }
}

vector l1l2_prox(const vector& y, const l1l2_params& params) {
  if (y.size() < 1) throw invalid_input("l1l2_prox: empty input");

  // I = { i : mu1 < |y_i| }; boundary entries |y_i| == mu1 stay outside.
  double excess_norm_sq = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double t = std::abs(y[i]) - params.mu1;
    if (t > 0.0) excess_norm_sq += t * t;
  }

  vector x = vector::Zero(y.size());
  if (excess_norm_sq > 0.0) {
    const double nrm = std::sqrt(excess_norm_sq);
    const double scale = (params.mu2 + nrm) / nrm;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double t = std::abs(y[i]) - params.mu1;
      if (t > 0.0) x[i] = sign(y[i]) * scale * t;
    }
  } else {
    // single-coordinate case: lowest index among argmin of mu1 - |y_i|
    Eigen::Index best = 0;
    double best_gap = params.mu1 - std::abs(y[0]);
    for (Eigen::Index i = 1; i < y.size(); ++i) {
      const double gap = params.mu1 - std::abs(y[i]);
      if (gap < best_gap) {
        best = i;
        best_gap = gap;
      }
    }
    x[best] = sign(y[best]) * std::max(params.mu2 - best_gap, 0.0);
  }
  return x;
}

proxable_term zero_penalty() {
  proxable_term t;
  t.value = [](const vector&) { return 0.0; };
  t.prox = [](double, const vector& u) { return u; };
  return t;
}

proxable_term l1_penalty(double weight) {
  if (!(weight >= 0.0)) throw invalid_input("l1_penalty: negative weight");
  proxable_term t;
  t.value = [weight](const vector& x) { return weight * x.lpNorm<1>(); };
  t.prox = [weight](double tau, const vector& u) { return soft_threshold(u, tau * weight); };
  return t;
}

proxable_term unit_ball_indicator() {
  proxable_term t;
  t.value = [](const vector& x) {
    return x.norm() <= 1.0 + kBallSlack ? 0.0 : std::numeric_limits<double>::infinity();
  };
  t.prox = [](double, const vector& u) { return project_unit_ball(u); };
  return t;
}

}  // namespace fbe

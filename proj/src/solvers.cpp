#include "fbe/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>

#include "fbe/prox.hpp"

namespace fbe {

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

constexpr int kMaxBacktracks = 60;
constexpr double kCurvatureSkip = 1e-12;

}  // namespace

void line_search_config::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw invalid_input("line search: sigma must be in (0,1)");
  if (!(eta > 0.0 && eta < 1.0)) throw invalid_input("line search: eta must be in (0,1)");
  if (!(c1 > 0.0 && c1 < 1.0 && c2 >= 1.0)) {
    throw invalid_input("line search: requires 0 < c1 < 1 <= c2");
  }
  if (!(tol > 0.0)) throw invalid_input("line search: tol must be positive");
  if (max_iter < 0) throw invalid_input("line search: negative max_iter");
  if (memory < 0) throw invalid_input("line search: negative memory");
}

lbfgs_memory::lbfgs_memory(int capacity) : capacity_(capacity) {
  if (capacity < 0) throw invalid_input("lbfgs_memory: negative capacity");
  pairs_.reserve(static_cast<size_t>(capacity));
}

void lbfgs_memory::push(vector s, vector y) {
  if (capacity_ == 0) return;
  const double sy = s.dot(y);
  if (!(sy > kCurvatureSkip * s.norm() * y.norm())) return;  // flat or negative curvature
  if (static_cast<int>(pairs_.size()) == capacity_) {
    pairs_.erase(pairs_.begin());
  }
  pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
}

vector lbfgs_memory::apply(const vector& g) const {
  vector q = g;
  if (pairs_.empty()) return q;

  const size_t k = pairs_.size();
  std::vector<double> alpha(k);
  for (size_t i = k; i-- > 0;) {
    alpha[i] = pairs_[i].rho * pairs_[i].s.dot(q);
    q -= alpha[i] * pairs_[i].y;
  }
  const correction& last = pairs_.back();
  const double scaling = 1.0 / (last.rho * last.y.squaredNorm());  // <s,y>/<y,y>
  q *= scaling;
  for (size_t i = 0; i < k; ++i) {
    const double beta = pairs_[i].rho * pairs_[i].y.dot(q);
    q += (alpha[i] - beta) * pairs_[i].s;
  }
  return q;
}

vector gate_direction(const vector& g, const vector& d_cand, double c1, double c2) {
  const double gn = g.norm();
  if (gn == 0.0) return vector::Zero(g.size());
  const double dn = d_cand.norm();
  const bool angle_ok = g.dot(d_cand) <= -c1 * gn * dn;
  const bool norm_ok = gn / c2 <= dn && dn <= c2 * gn;
  if (angle_ok && norm_ok) return d_cand;
  return -g;
}

line_search_result armijo_search(const fbe_point& current, const vector& d,
                                 const line_search_config& cfg) {
  if (d.isZero(0.0)) return {1.0, current, 0};

  const double f0 = current.value();
  const double slope = current.gradient().dot(d);
  if (!(slope < 0.0)) {
    throw invalid_input("armijo_search: not a descent direction");
  }

  double alpha = 1.0;
  for (int j = 0; j <= kMaxBacktracks; ++j) {
    try {
      fbe_point trial(current.problem(), current.x() + alpha * d, current.step());
      if (trial.value() <= f0 + cfg.sigma * alpha * slope) {
        return {alpha, std::move(trial), j};
      }
    } catch (const numeric_error&) {
      // overflow along the ray: treat as a rejected step and shrink
    }
    alpha *= cfg.eta;
  }
  throw numeric_error("armijo_search: no acceptable step after " +
                      std::to_string(kMaxBacktracks) + " backtracks");
}

const char* to_string(termination t) {
  switch (t) {
    case termination::converged: return "converged";
    case termination::max_iter: return "max_iter";
    case termination::numeric_error: return "numeric_error";
  }
  return "unknown";
}

run_report fbe_lbfgs_minimize(const composite_problem& prob, double gamma,
                              const line_search_config& cfg) {
  cfg.validate();
  const auto t0 = clock::now();

  run_report rep;
  fbe_point cur(prob, vector::Zero(prob.dim), gamma);
  lbfgs_memory memory(cfg.memory);
  rep.value_history.push_back(cur.value());

  try {
    for (long k = 0; k < cfg.max_iter; ++k) {
      const vector& g = cur.gradient();
      rep.final_residual = g.norm() / std::max(1.0, cur.value());
      if (rep.final_residual < cfg.tol) {
        rep.status = termination::converged;
        break;
      }

      const vector d = gate_direction(g, -memory.apply(g), cfg.c1, cfg.c2);
      line_search_result ls = armijo_search(cur, d, cfg);

      if (cfg.verify_descent) {
        const double drop = ls.point.value() - cur.value();
        const double coeff = cfg.c1 * cfg.sigma * ls.alpha;
        const double slack = 1e-10 * std::max(1.0, std::abs(cur.value()));
        const double bound_g = -(coeff / cfg.c2) * g.squaredNorm();
        const double bound_x =
            -(coeff / (cfg.c2 * cfg.c2 * cfg.c2)) * (ls.point.x() - cur.x()).squaredNorm();
        if (drop > bound_g + slack || drop > bound_x + slack) ++rep.descent_violations;
      }

      memory.push(ls.point.x() - cur.x(), ls.point.gradient() - g);
      rep.min_step_size = std::min(rep.min_step_size, ls.alpha);
      cur = std::move(ls.point);
      rep.value_history.push_back(cur.value());
      rep.iterations = k + 1;
    }
  } catch (const numeric_error& e) {
    rep.status = termination::numeric_error;
    rep.message = e.what();
  }

  rep.final_objective = cur.value();
  rep.final_point = cur.x();
  try {
    rep.final_residual = cur.gradient().norm() / std::max(1.0, cur.value());
  } catch (const numeric_error&) {
    rep.final_residual = std::numeric_limits<double>::quiet_NaN();
  }
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

run_report fbe_lbfgs_minimize(std::shared_ptr<const dc_least_squares> dc,
                              double lambda_max, double gamma_factor,
                              const line_search_config& cfg) {
  if (!dc) throw invalid_input("fbe_lbfgs_minimize: null problem");
  const coercivity_report pre = coercivity_precheck(*dc);
  if (!pre.pass) {
    throw invalid_input("fbe_lbfgs_minimize: coercivity precheck failed: " + pre.reason);
  }
  const composite_problem prob = lift(dc, lambda_max);
  const double gamma = gamma_factor / prob.f.curvature_bound;
  run_report rep = fbe_lbfgs_minimize(prob, gamma, cfg);
  rep.final_j = j_value(*dc, rep.final_point.tail(dc->A.cols()));
  return rep;
}

void npg_config::validate() const {
  if (!(tau > 1.0)) throw invalid_input("npg: tau must exceed 1");
  if (!(c > 0.0)) throw invalid_input("npg: c must be positive");
  if (history < 0) throw invalid_input("npg: negative history");
  if (!(l_min > 0.0 && l_max >= l_min)) throw invalid_input("npg: bad step clip range");
  if (!(tol > 0.0)) throw invalid_input("npg: tol must be positive");
  if (max_iter < 0) throw invalid_input("npg: negative max_iter");
}

double bb_from_products(const vector& d_az, const vector& dz, const npg_config& cfg) {
  const double den = dz.squaredNorm();
  if (den == 0.0) return 1.0;
  return std::min(std::max(d_az.squaredNorm() / den, cfg.l_min), cfg.l_max);
}

namespace {

// Shared outer loop of the two proximal-gradient baselines; `candidate`
// maps (z, grad, L) to the subproblem solution.
run_report npg_loop(const dc_least_squares& dc, const npg_config& cfg,
                    const std::function<vector(const vector&, const vector&, double)>& candidate) {
  cfg.validate();
  if (dc.mu1 != dc.mu2) {
    throw invalid_input("nonmonotone proximal gradient: requires mu1 == mu2");
  }
  const auto t0 = clock::now();
  const matrix& A = dc.A;
  const vector& b = dc.b;
  const double mu = dc.mu1;

  const auto objective = [&](const vector& z, const vector& az) {
    return 0.5 * (az - b).squaredNorm() + mu * (z.lpNorm<1>() - z.norm());
  };

  run_report rep;
  vector z = vector::Zero(A.cols());
  vector az = vector::Zero(A.rows());
  double hz = 0.5 * b.squaredNorm();
  rep.value_history.push_back(hz);

  std::deque<double> window{hz};  // h at the last history+1 iterates
  vector z_prev, az_prev;
  bool have_prev = false;

  for (long k = 0; k < cfg.max_iter; ++k) {
    const double step0 = have_prev ? bb_from_products(az - az_prev, z - z_prev, cfg) : 1.0;
    const vector grad = A.transpose() * (az - b);
    if (!grad.allFinite()) {
      rep.status = termination::numeric_error;
      rep.message = "non-finite gradient";
      break;
    }
    double href = *std::max_element(window.begin(), window.end());

    double L = step0;
    vector z_new, az_new;
    double h_new = 0.0;
    bool accepted = false;
    while (L <= cfg.l_max) {
      z_new = candidate(z, grad, L);
      az_new = A * z_new;
      h_new = objective(z_new, az_new);
      if (std::isfinite(h_new) &&
          h_new <= href - 0.5 * cfg.c * (z_new - z).squaredNorm()) {
        accepted = true;
        break;
      }
      L *= cfg.tau;
    }
    if (!accepted) {
      rep.status = termination::numeric_error;
      rep.message = "backtracking exceeded the step ceiling";
      break;
    }

    z_prev = std::move(z);
    az_prev = std::move(az);
    z = std::move(z_new);
    az = std::move(az_new);
    hz = h_new;
    have_prev = true;

    window.push_back(hz);
    if (static_cast<int>(window.size()) > cfg.history + 1) window.pop_front();
    rep.value_history.push_back(hz);
    rep.iterations = k + 1;

    rep.final_residual = (z - z_prev).norm() / std::max(1.0, hz);
    if (rep.final_residual < cfg.tol) {
      rep.status = termination::converged;
      break;
    }
  }

  rep.final_objective = hz;
  rep.final_j = hz;
  rep.final_point = z;
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

}  // namespace

run_report npg_minimize(const dc_least_squares& dc, const npg_config& cfg) {
  const double mu = dc.mu1;
  return npg_loop(dc, cfg, [mu](const vector& z, const vector& grad, double L) {
    return l1l2_prox(z - grad / L, mu / L, mu / L);
  });
}

run_report npg_major_minimize(const dc_least_squares& dc, const npg_config& cfg) {
  const double mu = dc.mu1;
  return npg_loop(dc, cfg, [mu](const vector& z, const vector& grad, double L) {
    const double zn = z.norm();
    if (zn > 0.0) {
      return soft_threshold(z - (grad - (mu / zn) * z) / L, mu / L);
    }
    return soft_threshold(z - grad / L, mu / L);
  });
}

}  // namespace fbe

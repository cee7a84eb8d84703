#include "fbe/dc.hpp"

#include <cmath>
#include <limits>

#include "fbe/prox.hpp"

namespace fbe {

dc_least_squares::dc_least_squares(matrix A_in, vector b_in, double mu1_in,
                                   double mu2_in, regularizer reg_in)
    : A(std::move(A_in)), b(std::move(b_in)), mu1(mu1_in), mu2(mu2_in), reg(reg_in) {
  if (A.rows() != b.size()) {
    throw invalid_input("dc_least_squares: A and b row counts differ");
  }
  if (A.rows() == 0 || A.cols() == 0) {
    throw invalid_input("dc_least_squares: empty matrix");
  }
  if (!(mu2 > 0.0) || !(mu1 >= mu2)) {
    throw invalid_input("dc_least_squares: requires mu1 >= mu2 > 0");
  }
}

vector product_var::stack(const vector& y, const vector& z) {
  if (y.size() != z.size()) throw invalid_input("product_var: block sizes differ");
  vector w(2 * y.size());
  w.head(y.size()) = y;
  w.tail(z.size()) = z;
  return w;
}

Eigen::Ref<const vector> product_var::y(const vector& w) {
  if (w.size() % 2 != 0) throw invalid_input("product_var: odd stacked dimension");
  return w.head(w.size() / 2);
}

Eigen::Ref<const vector> product_var::z(const vector& w) {
  if (w.size() % 2 != 0) throw invalid_input("product_var: odd stacked dimension");
  return w.tail(w.size() / 2);
}

composite_problem lift(std::shared_ptr<const dc_least_squares> dc, double lambda_max) {
  if (!dc) throw invalid_input("lift: null problem");
  if (dc->reg != regularizer::l1_minus_l2) {
    throw unsupported_feature("lift: only the l1-minus-l2 regularizer is implemented");
  }
  const Eigen::Index n = dc->A.cols();
  const double mu1 = dc->mu1;
  const double mu2 = dc->mu2;

  composite_problem prob;
  prob.dim = 2 * n;

  prob.f.curvature_bound = curvature_bound(lambda_max, mu2);
  prob.f.value = [dc, n](const vector& w) {
    const auto y = w.head(n);
    const auto z = w.tail(n);
    return 0.5 * (dc->A * z - dc->b).squaredNorm() - dc->mu2 * y.dot(z);
  };
  prob.f.gradient = [dc, n](const vector& w) {
    const auto y = w.head(n);
    const auto z = w.tail(n);
    vector g(2 * n);
    g.head(n) = -dc->mu2 * z;
    g.tail(n) = dc->A.transpose() * (dc->A * z - dc->b) - dc->mu2 * y;
    return g;
  };
  // value and gradient share the residual A z - b
  prob.f.value_and_gradient = [dc, n](const vector& w) {
    const auto y = w.head(n);
    const auto z = w.tail(n);
    const vector r = dc->A * z - dc->b;
    const double v = 0.5 * r.squaredNorm() - dc->mu2 * y.dot(z);
    vector g(2 * n);
    g.head(n) = -dc->mu2 * z;
    g.tail(n) = dc->A.transpose() * r - dc->mu2 * y;
    return std::make_pair(v, std::move(g));
  };
  // Hessian [[0, -mu2 I], [-mu2 I, A^T A]] applied to (u, v)
  prob.f.hess_vec = [dc, n](const vector&, const vector& d) {
    const auto u = d.head(n);
    const auto v = d.tail(n);
    vector out(2 * n);
    out.head(n) = -dc->mu2 * v;
    out.tail(n) = dc->A.transpose() * (dc->A * v) - dc->mu2 * u;
    return out;
  };

  const proxable_term ball = unit_ball_indicator();
  prob.P.value = [mu1, ball, n](const vector& w) {
    return mu1 * w.tail(n).template lpNorm<1>() + ball.value(w.head(n));
  };
  prob.P.prox = [mu1, n](double tau, const vector& w) {
    vector out(2 * n);
    out.head(n) = project_unit_ball(w.head(n));
    out.tail(n) = soft_threshold(w.tail(n), tau * mu1);
    return out;
  };
  return prob;
}

composite_problem lift(std::shared_ptr<const dc_least_squares> dc) {
  if (!dc) throw invalid_input("lift: null problem");
  return lift(dc, spectral_norm(dc->A));
}

composite_problem lift(const dc_least_squares& dc) {
  return lift(std::make_shared<const dc_least_squares>(dc));
}

double spectral_norm(const matrix& A, double tol, int max_iter) {
  if (A.size() == 0) throw invalid_input("spectral_norm: empty matrix");
  if (!(tol > 0.0)) throw invalid_input("spectral_norm: tol must be positive");
  if (A.norm() == 0.0) throw invalid_input("spectral_norm: zero matrix");

  const Eigen::Index n = A.cols();
  // deterministic start: all ones plus a tiny index-dependent tilt
  vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = 1.0 + 1e-6 * static_cast<double>(i + 1) / static_cast<double>(n);
  }
  v /= v.norm();

  double lambda = 0.0;
  int restarts = 0;
  for (int it = 0; it < max_iter; ++it) {
    const vector w = A.transpose() * (A * v);
    lambda = v.dot(w);
    const double res = (w - lambda * v).norm();
    if (lambda > 0.0 && res <= tol * lambda) return lambda;
    const double wn = w.norm();
    if (wn == 0.0) {
      // start vector fell in the null space; restart from a coordinate axis
      if (restarts >= n) throw numeric_error("spectral_norm: degenerate iteration");
      v = vector::Zero(n);
      v[restarts++] = 1.0;
      continue;
    }
    v = w / wn;
  }
  throw convergence_failure("spectral_norm: power iteration did not converge in " +
                                std::to_string(max_iter) + " iterations",
                            lambda);
}

double curvature_bound(double lambda_max, double mu2) {
  if (!(lambda_max >= 0.0)) throw invalid_input("curvature_bound: negative lambda_max");
  if (!(mu2 > 0.0)) throw invalid_input("curvature_bound: mu2 must be positive");
  return 0.5 * (lambda_max + std::sqrt(lambda_max * lambda_max + 4.0 * mu2 * mu2));
}

double j_value(const dc_least_squares& dc, const vector& z) {
  if (!z.allFinite()) throw invalid_input("j_value: non-finite point");
  return 0.5 * (dc.A * z - dc.b).squaredNorm() + dc.mu1 * z.lpNorm<1>() - dc.mu2 * z.norm();
}

coercivity_report coercivity_precheck(const dc_least_squares& dc) {
  if (dc.reg != regularizer::l1_minus_l2) {
    throw unsupported_feature("coercivity_precheck: unknown regularizer");
  }
  if (dc.mu1 > dc.mu2) {
    return {true, "mu1 > mu2: the l1 term dominates and the objective is coercive"};
  }
  // mu1 == mu2: need every column of A nonzero
  for (Eigen::Index j = 0; j < dc.A.cols(); ++j) {
    if (dc.A.col(j).norm() == 0.0) {
      return {false, "mu1 == mu2 and column " + std::to_string(j) +
                         " of A is identically zero; coercivity can fail"};
    }
  }
  return {true, "mu1 == mu2 and every column of A has positive norm"};
}

vector recover_dual(const vector& z) {
  const double nrm = z.norm();
  if (nrm > 0.0) return z / nrm;
  vector y = vector::Zero(z.size());
  if (y.size() > 0) y[0] = 1.0;
  return y;
}

}  // namespace fbe

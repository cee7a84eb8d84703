#ifndef FBE_DC_HPP
#define FBE_DC_HPP

#include <Eigen/Core>
#include <memory>
#include <string>

#include "fbe/composite.hpp"

namespace fbe {

using matrix = Eigen::MatrixXd;

enum class regularizer { l1_minus_l2 };

/**
 * Difference-of-convex regularized least squares
 *
 *   min_z 0.5 ||A z - b||^2 + mu1 ||z||_1 - mu2 ||z||,
 *
 * with mu1 >= mu2 > 0. The regularizer tag is an extension point; only the
 * l1-minus-l2 pair is implemented.
 */
struct dc_least_squares {
  matrix A;
  vector b;
  double mu1 = 0.0;
  double mu2 = 0.0;
  regularizer reg = regularizer::l1_minus_l2;

  dc_least_squares(matrix A_in, vector b_in, double mu1_in, double mu2_in,
                   regularizer reg_in = regularizer::l1_minus_l2);
};

/// Views into a stacked product-space variable w = [y; z], both blocks of
/// equal length.
struct product_var {
  static vector stack(const vector& y, const vector& z);
  static Eigen::Ref<const vector> y(const vector& w);
  static Eigen::Ref<const vector> z(const vector& w);
};

/**
 * Lift to a composite problem on the product space (y, z):
 *
 *   f(y, z) = 0.5 ||A z - b||^2 - mu2 <y, z>
 *   P(y, z) = mu1 ||z||_1 + indicator(||y|| <= 1),
 *
 * whose stationary points project onto those of the original problem. The
 * matrix is shared, not copied; concurrent solves may hold the same
 * instance. The overload without a curvature bound runs the power iteration
 * internally.
 */
composite_problem lift(std::shared_ptr<const dc_least_squares> dc, double lambda_max);
composite_problem lift(std::shared_ptr<const dc_least_squares> dc);
composite_problem lift(const dc_least_squares& dc);

/**
 * Largest eigenvalue of A^T A by power iteration with a deterministic start
 * vector. Returns lambda with |lambda - lambda_max| <= tol * lambda_max;
 * throws convergence_failure carrying the best estimate when max_iter is
 * exhausted.
 */
double spectral_norm(const matrix& A, double tol = 1e-6, int max_iter = 5000);

/// Curvature bound (lambda_max + sqrt(lambda_max^2 + 4 mu2^2)) / 2 of the
/// lifted smooth term.
double curvature_bound(double lambda_max, double mu2);

/// Original objective 0.5 ||A z - b||^2 + mu1 ||z||_1 - mu2 ||z||.
double j_value(const dc_least_squares& dc, const vector& z);

struct coercivity_report {
  bool pass = false;
  std::string reason;
};

/// Level-boundedness precondition: mu1 > mu2, or mu1 == mu2 with no zero
/// column in A. The failure reason names the violated condition.
coercivity_report coercivity_precheck(const dc_least_squares& dc);

/// Dual block read off a primal solution: z/||z|| when z != 0, else the
/// first coordinate vector.
vector recover_dual(const vector& z);

}  // namespace fbe

#endif

#ifndef FBE_BENCH_HPP
#define FBE_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fbe/instance.hpp"
#include "fbe/solvers.hpp"

namespace fbe {

enum class solver_kind { fbe_lbfgs, npg, npg_major };

std::string to_string(solver_kind kind);
solver_kind solver_from_string(const std::string& name);

/// One instance family entry of a benchmark: a spec template plus the seeds
/// to instantiate it with.
struct bench_instance_block {
  instance_spec spec;
  std::vector<uint64_t> seeds{1};
};

struct bench_config {
  int version = 1;
  std::vector<bench_instance_block> instances;
  std::vector<solver_kind> solvers;
  double mu1 = 0.0;
  double mu2 = 0.0;
  std::map<solver_kind, double> tol;  // per-solver stopping tolerance
  std::vector<double> gamma_factors{0.95};
  long max_iter = 1'000'000;
  int jobs = 0;  // 0 = hardware concurrency
  std::string out;

  double tol_for(solver_kind kind) const;
  void validate() const;
};

/// Parse the versioned JSON schema (see README for the field list).
bench_config parse_bench_config(const std::string& json_text);
bench_config load_bench_config(const std::string& path);

struct bench_row {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::Index s = 0;
  double t_lambda_max = 0.0;
  std::string solver;  // label; carries the gamma factor when swept
  uint64_t seed = 0;
  long iterations = 0;
  double time_s = 0.0;
  double fval = 0.0;
  double residual = 0.0;
  std::string termination;
};

/**
 * Run the full matrix: for every (instance block, seed) generate the
 * instance once, compute lambda_max once (timed separately), then run each
 * configured solver. Rows come back sorted by block, seed, solver. Solver
 * failures are recorded in their row, never fatal to the batch. Groups run
 * on `jobs` parallel workers; iteration counts and objective values do not
 * depend on the schedule.
 */
std::vector<bench_row> run_benchmark(const bench_config& config);

/// Per-run CSV with the fixed column order
/// m,n,s,t_lambda_max,solver,seed,iter,time_s,fval,residual,termination.
void write_rows_csv(const std::string& path, const std::vector<bench_row>& rows);

/**
 * Aggregated table (means and standard deviations over seeds, one line per
 * instance size) in the familiar iter/CPU/fval layout. The CSV and Markdown
 * outputs are rendered from the same formatted cells so they carry
 * identical numbers.
 */
void write_summary_csv(const std::string& path, const std::vector<bench_row>& rows);
void write_summary_markdown(const std::string& path, const std::vector<bench_row>& rows);

/// Solve one instance with one solver; computes lambda_max on demand for
/// envelope runs.
bench_row solve_one(const instance& inst, solver_kind kind, double mu1, double mu2,
                    double tol, double gamma_factor, long max_iter);

/// Lightweight invariant suite behind the `check` subcommand: prox
/// optimality, envelope sandwich, prox-map Lipschitz bound, gradient vs
/// finite differences, Hessian symmetry and curvature. Prints one line per
/// check; returns the number of failures.
int run_invariant_checks(uint64_t seed, std::ostream& out);

}  // namespace fbe

#endif

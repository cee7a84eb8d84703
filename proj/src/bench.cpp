#include "fbe/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fbe/prox.hpp"

namespace fbe {

namespace {

using clock = std::chrono::steady_clock;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string fmt_fval(double v) { return fmt("%.5e", v); }
std::string fmt_time(double v) { return fmt("%.2f", v); }

std::string gamma_label(double factor) {
  std::string s = fmt("%g", factor);
  return "fbe_lbfgs@" + s;
}

}  // namespace

std::string to_string(solver_kind kind) {
  switch (kind) {
    case solver_kind::fbe_lbfgs: return "fbe_lbfgs";
    case solver_kind::npg: return "npg";
    case solver_kind::npg_major: return "npg_major";
  }
  return "unknown";
}

solver_kind solver_from_string(const std::string& name) {
  if (name == "fbe_lbfgs") return solver_kind::fbe_lbfgs;
  if (name == "npg") return solver_kind::npg;
  if (name == "npg_major") return solver_kind::npg_major;
  throw invalid_input("unknown solver '" + name + "'");
}

double bench_config::tol_for(solver_kind kind) const {
  if (auto it = tol.find(kind); it != tol.end()) return it->second;
  return kind == solver_kind::fbe_lbfgs ? 1e-6 : 1e-4;
}

void bench_config::validate() const {
  if (instances.empty()) throw invalid_input("bench config: no instances");
  for (const auto& block : instances) {
    block.spec.validate();
    if (block.seeds.empty()) throw invalid_input("bench config: instance without seeds");
  }
  if (!(mu2 > 0.0) || !(mu1 >= mu2)) {
    throw invalid_input("bench config: requires mu1 >= mu2 > 0");
  }
  if (gamma_factors.empty()) throw invalid_input("bench config: no gamma factors");
  for (double g : gamma_factors) {
    if (!(g > 0.0 && g < 1.0)) {
      throw invalid_input("bench config: gamma factors must lie in (0, 1)");
    }
  }
  if (max_iter <= 0) throw invalid_input("bench config: max_iter must be positive");
}

bench_config parse_bench_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_input(std::string("bench config: ") + e.what());
  }

  bench_config cfg;
  cfg.version = j.value("version", 1);
  if (cfg.version != 1) {
    throw invalid_input("bench config: unsupported version " +
                        std::to_string(cfg.version));
  }

  if (j.contains("mu")) {
    cfg.mu1 = cfg.mu2 = j.at("mu").get<double>();
  }
  if (j.contains("mu1")) cfg.mu1 = j.at("mu1").get<double>();
  if (j.contains("mu2")) cfg.mu2 = j.at("mu2").get<double>();

  if (j.contains("gamma_factors")) {
    cfg.gamma_factors = j.at("gamma_factors").get<std::vector<double>>();
  } else if (j.contains("gamma_factor")) {
    cfg.gamma_factors = {j.at("gamma_factor").get<double>()};
  }

  cfg.max_iter = j.value("max_iter", cfg.max_iter);
  cfg.jobs = j.value("jobs", 0);
  cfg.out = j.value("out", std::string{});

  if (j.contains("solvers")) {
    for (const auto& name : j.at("solvers")) {
      cfg.solvers.push_back(solver_from_string(name.get<std::string>()));
    }
  }

  if (j.contains("tol")) {
    const auto& t = j.at("tol");
    if (t.is_number()) {
      for (auto kind : {solver_kind::fbe_lbfgs, solver_kind::npg, solver_kind::npg_major}) {
        cfg.tol[kind] = t.get<double>();
      }
    } else {
      for (const auto& [key, val] : t.items()) {
        cfg.tol[solver_from_string(key)] = val.get<double>();
      }
    }
  }

  if (!j.contains("instances")) throw invalid_input("bench config: missing 'instances'");
  for (const auto& ji : j.at("instances")) {
    bench_instance_block block;
    const std::string family = ji.value("family", std::string("gaussian_unit_columns"));
    if (family == "gaussian_unit_columns") {
      block.spec.family = instance_family::gaussian_unit_columns;
    } else if (family == "oversampled_dct") {
      block.spec.family = instance_family::oversampled_dct;
    } else {
      throw invalid_input("bench config: unknown family '" + family + "'");
    }
    block.spec.m = ji.at("m").get<Eigen::Index>();
    block.spec.n = ji.at("n").get<Eigen::Index>();
    block.spec.s = ji.at("s").get<Eigen::Index>();
    block.spec.sigma = ji.value("sigma", 0.01);
    if (ji.contains("F")) block.spec.oversampling = ji.at("F").get<long>();
    if (ji.contains("oversampling")) block.spec.oversampling = ji.at("oversampling").get<long>();
    if (ji.contains("seeds")) {
      block.seeds = ji.at("seeds").get<std::vector<uint64_t>>();
    } else if (ji.contains("repetitions")) {
      const auto reps = ji.at("repetitions").get<uint64_t>();
      if (reps < 1) throw invalid_input("bench config: repetitions must be >= 1");
      block.seeds.clear();
      for (uint64_t k = 1; k <= reps; ++k) block.seeds.push_back(k);
    }
    cfg.instances.push_back(std::move(block));
  }
  return cfg;
}

bench_config load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_bench_config(buf.str());
}

namespace {

struct solver_task {
  solver_kind kind;
  double gamma_factor;  // meaningful for envelope runs only
  std::string label;
};

std::vector<solver_task> expand_solvers(const bench_config& cfg) {
  std::vector<solver_task> tasks;
  for (solver_kind kind : cfg.solvers) {
    if (kind == solver_kind::fbe_lbfgs && cfg.gamma_factors.size() > 1) {
      for (double g : cfg.gamma_factors) tasks.push_back({kind, g, gamma_label(g)});
    } else {
      const double g = cfg.gamma_factors.front();
      tasks.push_back({kind, g, to_string(kind)});
    }
  }
  return tasks;
}

run_report dispatch(std::shared_ptr<const dc_least_squares> dc, solver_kind kind,
                    double tol, double gamma_factor, long max_iter, double lambda_max) {
  if (kind == solver_kind::fbe_lbfgs) {
    line_search_config ls;
    ls.tol = tol;
    ls.max_iter = max_iter;
    return fbe_lbfgs_minimize(dc, lambda_max, gamma_factor, ls);
  }
  npg_config cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  return kind == solver_kind::npg ? npg_minimize(*dc, cfg) : npg_major_minimize(*dc, cfg);
}

bench_row report_to_row(const instance_spec& spec, const std::string& label,
                        double t_lambda, const run_report& rep) {
  bench_row row;
  row.m = spec.m;
  row.n = spec.n;
  row.s = spec.s;
  row.t_lambda_max = t_lambda;
  row.solver = label;
  row.seed = spec.seed;
  row.iterations = rep.iterations;
  row.time_s = rep.wall_time_s;
  row.fval = rep.final_j;
  row.residual = rep.final_residual;
  row.termination = to_string(rep.status);
  return row;
}

}  // namespace

std::vector<bench_row> run_benchmark(const bench_config& config) {
  config.validate();
  const std::vector<solver_task> solver_tasks = expand_solvers(config);

  struct group {
    instance_spec spec;
  };
  std::vector<group> groups;
  for (const auto& block : config.instances) {
    for (uint64_t seed : block.seeds) {
      instance_spec spec = block.spec;
      spec.seed = seed;
      groups.push_back({spec});
    }
  }

  std::vector<std::vector<bench_row>> results(groups.size());
  std::atomic<size_t> next{0};

  const auto worker = [&]() {
    for (;;) {
      const size_t gi = next.fetch_add(1);
      if (gi >= groups.size()) return;
      const instance_spec& spec = groups[gi].spec;

      const instance inst = generate(spec);
      const auto dc = std::make_shared<const dc_least_squares>(
          as_dc_problem(inst, config.mu1, config.mu2));

      const auto t0 = clock::now();
      double lambda_max = 0.0;
      try {
        lambda_max = spectral_norm(dc->A);
      } catch (const convergence_failure& e) {
        lambda_max = e.best_estimate;
      }
      const double t_lambda = std::chrono::duration<double>(clock::now() - t0).count();

      for (const solver_task& task : solver_tasks) {
        bench_row row;
        try {
          const run_report rep =
              dispatch(dc, task.kind, config.tol_for(task.kind), task.gamma_factor,
                       config.max_iter, lambda_max);
          row = report_to_row(spec, task.label, t_lambda, rep);
        } catch (const error& e) {
          row.m = spec.m;
          row.n = spec.n;
          row.s = spec.s;
          row.t_lambda_max = t_lambda;
          row.solver = task.label;
          row.seed = spec.seed;
          row.fval = std::numeric_limits<double>::quiet_NaN();
          row.residual = std::numeric_limits<double>::quiet_NaN();
          row.termination = std::string("error: ") + e.what();
        }
        results[gi].push_back(std::move(row));
      }
    }
  };

  size_t jobs = config.jobs > 0 ? static_cast<size_t>(config.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, groups.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<bench_row> rows;
  for (auto& group_rows : results) {
    for (auto& row : group_rows) rows.push_back(std::move(row));
  }
  return rows;
}

void write_rows_csv(const std::string& path, const std::vector<bench_row>& rows) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open " + path + " for writing");
  out << "m,n,s,t_lambda_max,solver,seed,iter,time_s,fval,residual,termination\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.n << ',' << r.s << ',' << fmt_time(r.t_lambda_max) << ','
        << r.solver << ',' << r.seed << ',' << r.iterations << ',' << fmt_time(r.time_s)
        << ',' << fmt_fval(r.fval) << ',' << fmt("%.3e", r.residual) << ','
        << r.termination << '\n';
  }
}

namespace {

struct aggregate {
  std::vector<double> iters, times, fvals, lambdas;
};

struct summary_table {
  std::vector<std::string> solvers;                       // column groups, first-seen order
  std::vector<std::array<Eigen::Index, 3>> sizes;         // row keys, first-seen order
  // cells[row][solver] -> formatted (iter, time, fval, iter_sd, time_sd, fval_sd)
  std::vector<std::vector<std::array<std::string, 6>>> cells;
  std::vector<std::string> lambda_col;                    // mean t_lambda_max per row
};

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

summary_table build_summary(const std::vector<bench_row>& rows) {
  summary_table table;
  std::map<std::array<Eigen::Index, 3>, size_t> size_index;
  std::map<std::string, size_t> solver_index;
  std::map<std::pair<size_t, size_t>, aggregate> agg;

  for (const auto& r : rows) {
    const std::array<Eigen::Index, 3> key{r.m, r.n, r.s};
    if (!size_index.count(key)) {
      size_index[key] = table.sizes.size();
      table.sizes.push_back(key);
    }
    if (!solver_index.count(r.solver)) {
      solver_index[r.solver] = table.solvers.size();
      table.solvers.push_back(r.solver);
    }
    auto& a = agg[{size_index[key], solver_index[r.solver]}];
    a.iters.push_back(static_cast<double>(r.iterations));
    a.times.push_back(r.time_s);
    a.fvals.push_back(r.fval);
    a.lambdas.push_back(r.t_lambda_max);
  }

  table.cells.assign(table.sizes.size(),
                     std::vector<std::array<std::string, 6>>(
                         table.solvers.size(), {"-", "-", "-", "-", "-", "-"}));
  table.lambda_col.assign(table.sizes.size(), "-");

  for (const auto& [key, a] : agg) {
    const auto [row, col] = key;
    table.cells[row][col] = {fmt("%.1f", mean(a.iters)),   fmt_time(mean(a.times)),
                             fmt_fval(mean(a.fvals)),      fmt("%.1f", sample_sd(a.iters)),
                             fmt_time(sample_sd(a.times)), fmt("%.1e", sample_sd(a.fvals))};
    table.lambda_col[row] = fmt_time(mean(a.lambdas));
  }
  return table;
}

}  // namespace

void write_summary_csv(const std::string& path, const std::vector<bench_row>& rows) {
  const summary_table table = build_summary(rows);
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open " + path + " for writing");

  out << "m,n,s,t_lambda_max";
  for (const auto& s : table.solvers) {
    out << ',' << s << "_iter," << s << "_time_s," << s << "_fval," << s << "_iter_sd,"
        << s << "_time_sd," << s << "_fval_sd";
  }
  out << '\n';
  for (size_t r = 0; r < table.sizes.size(); ++r) {
    out << table.sizes[r][0] << ',' << table.sizes[r][1] << ',' << table.sizes[r][2] << ','
        << table.lambda_col[r];
    for (size_t c = 0; c < table.solvers.size(); ++c) {
      for (const auto& cell : table.cells[r][c]) out << ',' << cell;
    }
    out << '\n';
  }
}

void write_summary_markdown(const std::string& path, const std::vector<bench_row>& rows) {
  const summary_table table = build_summary(rows);
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open " + path + " for writing");

  // layout mirrors the iter/CPU/fval benchmark tables, with sd columns after
  out << "| m | n | s | t_lmax |";
  for (const char* metric : {"iter", "CPU", "fval"}) {
    for (const auto& s : table.solvers) out << ' ' << metric << ' ' << s << " |";
  }
  for (const char* metric : {"iter_sd", "CPU_sd", "fval_sd"}) {
    for (const auto& s : table.solvers) out << ' ' << metric << ' ' << s << " |";
  }
  out << '\n';
  const size_t columns = 4 + 6 * table.solvers.size();
  out << '|';
  for (size_t c = 0; c < columns; ++c) out << "---|";
  out << '\n';

  for (size_t r = 0; r < table.sizes.size(); ++r) {
    out << "| " << table.sizes[r][0] << " | " << table.sizes[r][1] << " | "
        << table.sizes[r][2] << " | " << table.lambda_col[r] << " |";
    for (size_t metric = 0; metric < 6; ++metric) {
      for (size_t c = 0; c < table.solvers.size(); ++c) {
        out << ' ' << table.cells[r][c][metric] << " |";
      }
    }
    out << '\n';
  }
}

bench_row solve_one(const instance& inst, solver_kind kind, double mu1, double mu2,
                    double tol, double gamma_factor, long max_iter) {
  const auto dc = std::make_shared<const dc_least_squares>(as_dc_problem(inst, mu1, mu2));
  double lambda_max = 0.0;
  double t_lambda = 0.0;
  if (kind == solver_kind::fbe_lbfgs) {
    const auto t0 = clock::now();
    try {
      lambda_max = spectral_norm(dc->A);
    } catch (const convergence_failure& e) {
      lambda_max = e.best_estimate;
    }
    t_lambda = std::chrono::duration<double>(clock::now() - t0).count();
  }
  const run_report rep = dispatch(dc, kind, tol, gamma_factor, max_iter, lambda_max);
  instance_spec spec = inst.spec;
  return report_to_row(spec, to_string(kind), t_lambda, rep);
}

namespace {

vector fd_gradient(const std::function<double(const vector&)>& f, const vector& x, double h) {
  vector g(x.size());
  vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double dn = f(probe);
    probe[i] = x[i];
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

}  // namespace

int run_invariant_checks(uint64_t seed, std::ostream& out) {
  int failures = 0;
  const auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "[pass] " : "[FAIL] ") << name << ": " << detail << "\n";
    if (!ok) ++failures;
  };

  instance_spec spec;
  spec.m = 40;
  spec.n = 120;
  spec.s = 10;
  spec.sigma = 0.01;
  spec.seed = seed;
  const instance inst = generate(spec);
  const auto dc =
      std::make_shared<const dc_least_squares>(as_dc_problem(inst, 1e-2, 1e-2));
  const double lambda_max = spectral_norm(dc->A, 1e-10, 50000);
  const composite_problem prob = lift(dc, lambda_max);
  const double L = prob.f.curvature_bound;
  const double gamma = 0.95 / L;
  rng_stream rng(seed + 1);

  const auto random_point = [&](double scale) {
    vector w(prob.dim);
    for (Eigen::Index i = 0; i < prob.dim; ++i) w[i] = scale * rng.normal();
    w.head(prob.dim / 2) = project_unit_ball(w.head(prob.dim / 2));
    return w;
  };

  {  // l1l2 prox beats random candidates and local perturbations
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.below(5));
      vector y(dim);
      for (Eigen::Index i = 0; i < dim; ++i) y[i] = 3.0 * rng.normal();
      const double mu2v = 0.1 + rng.uniform01();
      const double mu1v = mu2v + rng.uniform01();
      const vector x = l1l2_prox(y, mu1v, mu2v);
      const auto obj = [&](const vector& v) {
        return 0.5 * (v - y).squaredNorm() + mu1v * v.lpNorm<1>() - mu2v * v.norm();
      };
      const double fx = obj(x);
      for (int c = 0; c < 500; ++c) {
        vector cand(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
          cand[i] = (2.0 * rng.uniform01() - 1.0) * (y.lpNorm<Eigen::Infinity>() + 1.0);
        }
        worst = std::max(worst, fx - obj(cand));
      }
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (double delta : {1e-4, -1e-4}) {
          vector cand = x;
          cand[i] += delta;
          worst = std::max(worst, fx - obj(cand));
        }
      }
    }
    report("l1l2 prox optimality", worst <= 1e-10,
           "max improvement found " + fmt("%.2e", worst));
  }

  {  // envelope sandwich F(p) <= f(p)+P(p) <= F(x) <= f(x)+P(x)
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
      const vector x = random_point(1.0);
      fbe_point pt(prob, x, gamma);
      const double fx = prob.f.value(x) + prob.P.value(x);
      const vector& p = pt.backward();
      const double fp = prob.f.value(p) + prob.P.value(p);
      const double slack = 1e-9 * std::max(1.0, std::abs(fx));
      ok = fbe_value(prob, p, gamma) <= fp + slack && fp <= pt.value() + slack &&
           pt.value() <= fx + slack;
    }
    report("envelope sandwich", ok, ok ? "100 random points" : "violated");
  }

  {  // prox-gradient map is 2-Lipschitz
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const vector x = random_point(1.0);
      const vector y = random_point(1.0);
      const double lhs =
          (prox_grad_map(prob, x, gamma) - prox_grad_map(prob, y, gamma)).norm();
      worst = std::max(worst, lhs - 2.0 * (x - y).norm());
    }
    report("prox-gradient map Lipschitz bound", worst <= 1e-9,
           "max excess " + fmt("%.2e", worst));
  }

  {  // analytic envelope gradient vs central differences
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const vector x = random_point(1.0);
      const vector g = fbe_gradient(prob, x, gamma);
      const vector g_fd = fd_gradient(
          [&](const vector& v) { return fbe_value(prob, v, gamma); }, x, 1e-6);
      worst = std::max(worst, (g - g_fd).norm() / std::max(1e-12, g.norm()));
    }
    report("envelope gradient vs finite differences", worst <= 1e-5,
           "max relative error " + fmt("%.2e", worst));
  }

  {  // Hessian-vector product symmetry and curvature bound
    double asym = 0.0, excess = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const vector x = random_point(1.0);
      vector u(prob.dim), v(prob.dim);
      for (Eigen::Index i = 0; i < prob.dim; ++i) {
        u[i] = rng.normal();
        v[i] = rng.normal();
      }
      const vector hu = prob.f.hess_vec(x, u);
      const vector hv = prob.f.hess_vec(x, v);
      asym = std::max(asym, std::abs(hu.dot(v) - hv.dot(u)));
      excess = std::max(excess, std::abs(u.dot(hu)) / u.squaredNorm() - L);
    }
    const bool ok = asym <= 1e-8 && excess <= 1e-10;
    report("Hessian symmetry and curvature", ok,
           "max asymmetry " + fmt("%.2e", asym) + ", Rayleigh excess " + fmt("%.2e", excess));
  }

  return failures;
}

}  // namespace fbe

#include "ppsolve/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <thread>

#include "ppsolve/image.hpp"
#include "ppsolve/matrix_market.hpp"
#include "ppsolve/preconditioners.hpp"
#include "ppsolve/problems.hpp"

namespace ppsolve {

namespace {

const std::set<std::string> kProblems{"complex_shift", "skew_block", "image", "oseen_surrogate", "matrix_market"};
const std::set<std::string> kPreconditioners{"pps", "spps1", "spps2", "none"};
const std::set<std::string> kSplittings{"split1", "split2", "split3", "saddleA", "saddleB", "spps1", "spps2", "hss"};

std::string join(const std::set<std::string>& s) {
  std::string out;
  for (const auto& x : s) out += (out.empty() ? "" : ", ") + x;
  return out;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where + " (valid: " + join(allowed) + ")");
}

template <typename V>
V get(const Json& j, const std::string& key, V fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<V>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

double positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
  return v;
}

std::size_t count(const Json& j, const std::string& key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + "." + key + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  check_keys(j,
             {"problem", "splitting", "skew_shift", "Q", "epsilon", "alpha", "preconditioner", "solver", "outer",
              "inner", "stationary", "diagnose", "diagnose_cap", "seed", "output"},
             "config");
  ExperimentConfig c;
  if (!j.contains("problem") || !j.at("problem").is_object() || !j.at("problem").contains("name"))
    throw ConfigError("config.problem must be an object with a 'name'");
  c.params = j.at("problem");
  c.problem = get<std::string>(c.params, "name", "", "problem");
  if (!kProblems.count(c.problem))
    throw ConfigError("unknown problem '" + c.problem + "' (valid: " + join(kProblems) + ")");
  c.params.erase("name");

  c.preconditioner = get<std::string>(j, "preconditioner", "pps", "config");
  c.splitting = get<std::string>(j, "splitting", "", "config");
  // a splitting name as preconditioner means P_PPS built from that splitting
  if (kSplittings.count(c.preconditioner) && c.preconditioner != "spps1" && c.preconditioner != "spps2") {
    if (!c.splitting.empty() && c.splitting != c.preconditioner)
      throw ConfigError("preconditioner '" + c.preconditioner + "' conflicts with splitting '" + c.splitting + "'");
    c.splitting = c.preconditioner;
    c.preconditioner = "pps";
  }
  if (!kPreconditioners.count(c.preconditioner))
    throw ConfigError("unknown preconditioner '" + c.preconditioner + "' (valid: " + join(kPreconditioners) +
                      ", or a splitting name)");
  if (!c.splitting.empty() && !kSplittings.count(c.splitting))
    throw ConfigError("unknown splitting '" + c.splitting + "' (valid: " + join(kSplittings) + ")");
  if ((c.preconditioner == "spps1" || c.preconditioner == "spps2") && !c.splitting.empty() &&
      c.splitting != c.preconditioner)
    throw ConfigError("preconditioner '" + c.preconditioner + "' fixes the splitting; got '" + c.splitting + "'");
  c.skew_shift = get<bool>(j, "skew_shift", false, "config");

  try {
    c.q = q_variant_from_string(get<std::string>(j, "Q", "identity", "config"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.q == QVariant::custom) throw ConfigError("Q 'custom' is only available through the library API");
  c.epsilon = get<double>(j, "epsilon", 0.0, "config");
  if (c.epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");

  if (j.contains("alpha")) {
    const Json& a = j.at("alpha");
    if (a.is_string()) {
      if (a.get<std::string>() != "auto_star") throw ConfigError("alpha must be \"auto_star\" or a positive number");
    } else if (a.is_number()) {
      c.alpha = positive(a.get<double>(), "alpha");
    } else {
      throw ConfigError("alpha must be \"auto_star\" or a positive number");
    }
  }

  c.solver = get<std::string>(j, "solver", "fgmres", "config");
  if (c.solver != "fgmres" && c.solver != "stationary")
    throw ConfigError("unknown solver '" + c.solver + "' (valid: fgmres, stationary)");
  if (c.solver == "stationary" && c.preconditioner != "pps")
    throw ConfigError("the stationary solver uses the PPS splitting directly; set preconditioner to pps");

  if (j.contains("outer")) {
    const Json& o = j.at("outer");
    check_keys(o, {"restart", "tol", "max_iters"}, "outer");
    c.outer.restart = count(o, "restart", c.outer.restart, "outer");
    c.outer.rel_tol = positive(get<double>(o, "tol", c.outer.rel_tol, "outer"), "outer.tol");
    c.outer.max_iters = count(o, "max_iters", c.outer.max_iters, "outer");
    if (c.outer.restart == 0) throw ConfigError("outer.restart must be positive");
  }
  if (j.contains("inner")) {
    const Json& o = j.at("inner");
    check_keys(o, {"method", "restart", "reduction", "max_iters", "strict"}, "inner");
    try {
      c.inner.method = inner_method_from_string(get<std::string>(o, "method", "auto", "inner"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    c.inner.restart = count(o, "restart", c.inner.restart, "inner");
    c.inner.reduction_factor = positive(get<double>(o, "reduction", c.inner.reduction_factor, "inner"), "inner.reduction");
    c.inner.max_inner_iters = count(o, "max_iters", c.inner.max_inner_iters, "inner");
    c.inner.strict = get<bool>(o, "strict", false, "inner");
  }
  if (j.contains("stationary")) {
    const Json& o = j.at("stationary");
    check_keys(o, {"beta", "tol", "max_iters"}, "stationary");
    c.stationary.beta = get<double>(o, "beta", 1.0, "stationary");
    if (!(c.stationary.beta > 0.0 && c.stationary.beta <= 1.0)) throw ConfigError("stationary.beta must be in (0, 1]");
    c.stationary.rel_residual_tol = positive(get<double>(o, "tol", 1e-7, "stationary"), "stationary.tol");
    c.stationary.max_iters = count(o, "max_iters", c.stationary.max_iters, "stationary");
  }
  c.diagnose = get<bool>(j, "diagnose", false, "config");
  c.diagnose_cap = count(j, "diagnose_cap", 2000, "config");
  c.seed = get<std::uint64_t>(j, "seed", 0, "config");
  if (j.contains("output")) {
    const Json& o = j.at("output");
    check_keys(o, {"csv", "diagnostics"}, "output");
    c.csv_path = get<std::string>(o, "csv", "", "output");
    c.diagnostics_path = get<std::string>(o, "diagnostics", "", "output");
  }
  return c;
}

Json ExperimentConfig::to_json() const {
  Json j;
  Json pr = Json::object();
  pr["name"] = problem;
  for (const auto& [k, v] : params.items()) pr[k] = v;
  j["problem"] = pr;
  if (!splitting.empty()) j["splitting"] = splitting;
  j["skew_shift"] = skew_shift;
  j["Q"] = std::string(to_string(q));
  j["epsilon"] = epsilon;
  if (alpha)
    j["alpha"] = *alpha;
  else
    j["alpha"] = "auto_star";
  j["preconditioner"] = preconditioner;
  j["solver"] = solver;
  j["outer"] = {{"restart", outer.restart}, {"tol", outer.rel_tol}, {"max_iters", outer.max_iters}};
  j["inner"] = {{"method", std::string(to_string(inner.method))},
                {"restart", inner.restart},
                {"reduction", inner.reduction_factor},
                {"max_iters", inner.max_inner_iters},
                {"strict", inner.strict}};
  j["stationary"] = {{"beta", stationary.beta}, {"tol", stationary.rel_residual_tol},
                     {"max_iters", stationary.max_iters}};
  j["diagnose"] = diagnose;
  j["diagnose_cap"] = diagnose_cap;
  j["seed"] = seed;
  return j;
}

std::string csv_header() {
  return "problem,n,splitting,Q,alpha_star,outer_IT,total_inner_IT,wall_time_s,final_relres,converged,"
         "rho_if_diagnosed,status";
}

std::string to_csv(const ResultRow& r) {
  char buf[512];
  std::string rho;
  if (r.rho) {
    char b[64];
    std::snprintf(b, sizeof b, "%.10g", *r.rho);
    rho = b;
  }
  if (r.status == "error") {
    std::snprintf(buf, sizeof buf, "%s,%zu,%s,%s,,,,,,false,,error", r.problem.c_str(), r.n, r.splitting.c_str(),
                  r.q.c_str());
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%s,%zu,%s,%s,%.10g,%zu,%zu,%.4f,%.6e,%s,%s,%s", r.problem.c_str(), r.n,
                r.splitting.c_str(), r.q.c_str(), r.alpha, r.outer_iterations, r.inner_iterations, r.wall_time_s,
                r.final_relres, r.converged ? "true" : "false", rho.c_str(), r.status.c_str());
  return buf;
}

Json row_to_json(const ResultRow& r) {
  auto num = [](double v) -> Json { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json j;
  j["problem"] = r.problem;
  j["n"] = r.n;
  j["splitting"] = r.splitting;
  j["Q"] = r.q;
  j["alpha_star"] = num(r.alpha);
  j["outer_IT"] = r.outer_iterations;
  j["total_inner_IT"] = r.inner_iterations;
  j["wall_time_s"] = num(r.wall_time_s);
  j["final_relres"] = num(r.final_relres);
  j["converged"] = r.converged;
  j["rho_if_diagnosed"] = r.rho ? num(*r.rho) : Json(nullptr);
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  Json m = Json::object();
  for (const auto& [k, v] : r.metrics) m[k] = num(v);
  j["metrics"] = m;
  if (r.diagnostics) j["diagnostics"] = Json::parse(to_json(*r.diagnostics));
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

template <Scalar T>
struct BuiltProblem {
  SparseMatrix<T> A;
  Vector<T> b;
  std::optional<BlockSaddleSystem<T>> system;
  /// Block boundary used by the skew shift.
  std::optional<std::size_t> skew_q;
  /// Splitting that ships with the generator, the default for pps.
  std::optional<PPSplitting<T>> native;
};

std::string resolved_splitting(const ExperimentConfig& c, const std::string& native = "") {
  if (c.preconditioner == "spps1" || c.preconditioner == "spps2") return c.preconditioner;
  if (c.preconditioner == "none" && c.solver == "fgmres") return c.splitting.empty() ? "none" : c.splitting;
  if (c.splitting.empty()) return native.empty() ? "hss" : native;
  return c.splitting;
}

template <Scalar T>
PPSplitting<T> build_splitting(const ExperimentConfig& c, const BuiltProblem<T>& p, const std::string& name) {
  PPSplitting<T> sp = p.native && p.native->name() == name ? *p.native
                                                           : make_splitting(name, p.A, p.system ? &*p.system : nullptr);
  if (c.skew_shift) {
    const std::size_t q = p.skew_q ? *p.skew_q : (p.system ? p.system->n() : p.A.rows() / 2);
    const SparseMatrix<double> s = block_skew_identity(p.A.rows(), q);
    if constexpr (is_complex_v<T>)
      sp = skew_shift(sp, to_complex(s));
    else
      sp = skew_shift(sp, s);
  }
  return sp;
}

template <Scalar T>
void run_matrix(const ExperimentConfig& c, const BuiltProblem<T>& p, ResultRow& row, bool diagnose_only) {
  const std::size_t n = p.A.rows();
  row.n = n;
  row.splitting = resolved_splitting(c, p.native ? p.native->name() : "");
  row.q = std::string(to_string(c.q));
  const bool spps = c.preconditioner == "spps1" || c.preconditioner == "spps2";
  if (spps && !p.system) throw ConfigError("preconditioner '" + c.preconditioner + "' needs a 2x2 block problem");

  SparseMatrix<T> q;
  try {
    q = p.system ? build_Q(c.q, *p.system, c.epsilon) : build_Q(c.q, p.A);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  row.alpha = c.alpha ? *c.alpha : alpha_star(p.A, q);

  std::optional<PPSplitting<T>> sp;
  const bool want_diag = diagnose_only || c.diagnose;
  if (row.splitting != "none" && (!spps || want_diag || c.skew_shift)) {
    try {
      sp = build_splitting(c, p, row.splitting);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (spps && c.skew_shift) throw ConfigError("skew_shift applies to the pps preconditioner and stationary solver");

  if (want_diag) {
    if (!sp) throw ConfigError("diagnostics need a splitting; set 'splitting'");
    if (n > c.diagnose_cap) {
      if (diagnose_only)
        throw ConfigError("n = " + std::to_string(n) + " exceeds the dense diagnostics cap " +
                          std::to_string(c.diagnose_cap));
    } else {
      DiagnoseOptions opts;
      opts.cap = c.diagnose_cap;
      row.diagnostics = diagnose(*sp, ShiftMatrix<T>(q, row.alpha), opts);
      row.rho = row.diagnostics->rho;
    }
  }
  if (diagnose_only) {
    row.status = "diagnosed";
    return;
  }

  const auto t0 = Clock::now();
  const LinearOperator<T> aop = make_operator(p.A);
  if (c.solver == "stationary") {
    PpsIteration<T> it(*sp, ShiftMatrix<T>(q, row.alpha), c.stationary.inner);
    const Vector<T> u0(n, T(0));
    auto res = it.solve(p.b, u0, c.stationary);
    row.outer_iterations = res.report.iterations;
    row.inner_iterations = it.inner_iterations();
    row.final_relres = res.report.final_relative_residual;
    row.converged = res.report.converged;
    row.residual_history = std::move(res.report.residual_history);
  } else {
    KrylovResult<T> res;
    std::size_t inner = 0;
    if (c.preconditioner == "none") {
      res = fgmres<T>(aop, p.b, nullptr, c.outer);
    } else if (spps) {
      auto [s1, s2] = split_shift(q, row.alpha, p.system->n());
      SppsOperator<T> m(SppsBlocks<T>::from_system(*p.system), s1, s2,
                        c.preconditioner == "spps1" ? SppsVariant::spps1 : SppsVariant::spps2, c.inner);
      const LinearOperator<T> mop = m.as_operator();
      res = fgmres<T>(aop, p.b, &mop, c.outer);
      inner = m.inner_iterations();
    } else {
      PpsPreconditioner<T> m(*sp, ShiftMatrix<T>(q, row.alpha), c.inner);
      const LinearOperator<T> mop = m.as_operator();
      res = fgmres<T>(aop, p.b, &mop, c.outer);
      inner = m.inner_iterations();
    }
    row.outer_iterations = res.report.iterations;
    row.inner_iterations = inner;
    row.final_relres = res.report.final_relative_residual;
    row.converged = res.report.converged;
    row.residual_history = std::move(res.report.residual_history);
  }
  row.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  row.status = row.converged ? "converged" : "not_converged";
}

void run_image(const ExperimentConfig& c, ResultRow& row, bool diagnose_only) {
  const Json& pj = c.params;
  check_keys(pj, {"p", "q", "sigma", "mu", "snr_db", "eps", "pgm"}, "problem");
  DenseMatrix<double> img;
  std::size_t p = count(pj, "p", 32, "problem"), q = count(pj, "q", p, "problem");
  if (pj.contains("pgm")) {
    try {
      img = read_pgm(get<std::string>(pj, "pgm", "", "problem"));
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    p = static_cast<std::size_t>(img.rows());
    q = static_cast<std::size_t>(img.cols());
  } else {
    if (p == 0 || q == 0) throw ConfigError("problem.p and problem.q must be positive");
    img = synthetic_image(p, q);
  }
  ImageRestorationProblem pr;
  try {
    pr = gen_image_restoration(p, q, get<double>(pj, "sigma", 2.0, "problem"), get<double>(pj, "mu", 1e-6, "problem"),
                               get<double>(pj, "snr_db", 30.0, "problem"), img, c.seed,
                               get<double>(pj, "eps", 1e-4, "problem"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const bool spps = c.preconditioner == "spps1" || c.preconditioner == "spps2";
  if (!spps && c.preconditioner != "none")
    throw ConfigError("the image problem is matrix-free; preconditioner must be spps1, spps2 or none");
  if (c.solver != "fgmres") throw ConfigError("the image problem supports only the fgmres solver");
  if (c.skew_shift) throw ConfigError("skew_shift is not available for the image problem");

  row.n = pr.size();
  row.splitting = resolved_splitting(c);
  row.q = std::string(to_string(c.q));
  SparseMatrix<double> qm;
  try {
    qm = pr.q_matrix(c.q);
    row.alpha = c.alpha ? *c.alpha : pr.alpha_star(c.q);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  row.metrics["snr_observed_db"] = snr_psnr(pr.X_org, pr.F_observed).snr_db;
  row.metrics["psnr_observed_db"] = snr_psnr(pr.X_org, pr.F_observed).psnr_db;

  if (diagnose_only || c.diagnose) {
    if (!spps) throw ConfigError("diagnostics need a splitting; use spps1 or spps2");
    if (row.n > c.diagnose_cap) {
      if (diagnose_only)
        throw ConfigError("n = " + std::to_string(row.n) + " exceeds the dense diagnostics cap " +
                          std::to_string(c.diagnose_cap));
    } else {
      const BlockSaddleSystem<double> sys = pr.assemble();
      const PPSplitting<double> sp = c.preconditioner == "spps1" ? spps1_split(sys) : spps2_split(sys);
      DiagnoseOptions opts;
      opts.cap = c.diagnose_cap;
      row.diagnostics = diagnose(sp, ShiftMatrix<double>(qm, row.alpha), opts);
      row.rho = row.diagnostics->rho;
    }
  }
  if (diagnose_only) {
    row.status = "diagnosed";
    return;
  }

  const auto t0 = Clock::now();
  const LinearOperator<double> aop = pr.op();
  const Vector<double> b = pr.rhs();
  KrylovResult<double> res;
  if (spps) {
    auto [s1, s2] = split_shift(qm, row.alpha, pr.block_size());
    SppsOperator<double> m(pr.blocks(), s1, s2, c.preconditioner == "spps1" ? SppsVariant::spps1 : SppsVariant::spps2,
                           c.inner);
    const LinearOperator<double> mop = m.as_operator();
    res = fgmres<double>(aop, b, &mop, c.outer);
    row.inner_iterations = m.inner_iterations();
  } else {
    res = fgmres<double>(aop, b, nullptr, c.outer);
  }
  row.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  row.outer_iterations = res.report.iterations;
  row.final_relres = res.report.final_relative_residual;
  row.converged = res.report.converged;
  row.residual_history = std::move(res.report.residual_history);
  row.status = row.converged ? "converged" : "not_converged";
  const DenseMatrix<double> x = pr.unvec(std::span<const double>(res.x).subspan(pr.block_size()));
  const ImageQuality qual = snr_psnr(pr.X_org, x);
  row.metrics["snr_restored_db"] = qual.snr_db;
  row.metrics["psnr_restored_db"] = qual.psnr_db;
}

ResultRow run_impl(const ExperimentConfig& c, bool diagnose_only) {
  ResultRow row;
  row.problem = c.problem;
  const Json& pj = c.params;
  if (c.problem == "image") {
    run_image(c, row, diagnose_only);
    return row;
  }
  try {
    if (c.problem == "complex_shift") {
      check_keys(pj, {"m", "form"}, "problem");
      const std::size_t m = count(pj, "m", 16, "problem");
      const std::string form = get<std::string>(pj, "form", "real", "problem");
      if (form != "real" && form != "complex") throw ConfigError("problem.form must be 'real' or 'complex'");
      const ComplexShiftProblem pr = gen_complex_shift(m);
      if (form == "complex") {
        row.problem = "complex_shift_complex";
        BuiltProblem<complex_t> bp{pr.complex_matrix(), pr.b, std::nullopt, std::nullopt, std::nullopt};
        run_matrix(c, bp, row, diagnose_only);
      } else {
        BlockSaddleSystem<double> s = pr.real_form();
        BuiltProblem<double> bp{s.assemble(), s.rhs, s, std::nullopt, std::nullopt};
        run_matrix(c, bp, row, diagnose_only);
      }
    } else if (c.problem == "skew_block") {
      check_keys(pj, {"n"}, "problem");
      auto [pr, sp] = gen_skew_block(count(pj, "n", 800, "problem"));
      BlockSaddleSystem<double> s(pr.W, submatrix(pr.A, 0, pr.q, pr.q, pr.n - pr.q),
                                  submatrix(pr.A, pr.q, 0, pr.n - pr.q, pr.q), pr.N, pr.b);
      BuiltProblem<double> bp{pr.A, pr.b, s, pr.q, sp};
      run_matrix(c, bp, row, diagnose_only);
    } else if (c.problem == "oseen_surrogate") {
      check_keys(pj, {"n", "m", "convection", "delta"}, "problem");
      const std::size_t n = count(pj, "n", 64, "problem");
      BlockSaddleSystem<double> s = gen_oseen_surrogate(n, count(pj, "m", n / 2, "problem"), c.seed,
                                                        get<double>(pj, "convection", 0.5, "problem"),
                                                        get<double>(pj, "delta", 1e-2, "problem"));
      BuiltProblem<double> bp{s.assemble(), s.rhs, s, std::nullopt, std::nullopt};
      run_matrix(c, bp, row, diagnose_only);
    } else {
      check_keys(pj, {"path", "block_n", "rhs"}, "problem");
      if (!pj.contains("path")) throw ConfigError("problem.path is required for matrix_market");
      SparseMatrix<double> a = load_matrix_market<double>(get<std::string>(pj, "path", "", "problem"));
      if (!a.is_square()) throw ConfigError("matrix_market: matrix must be square");
      Vector<double> b;
      if (pj.contains("rhs")) {
        const SparseMatrix<double> r = load_matrix_market<double>(get<std::string>(pj, "rhs", "", "problem"));
        if (r.rows() != a.rows() || r.cols() != 1) throw ConfigError("matrix_market: rhs must be an n x 1 matrix");
        b.resize(a.rows());
        for (std::size_t i = 0; i < a.rows(); ++i) b[i] = r.at(i, 0);
      } else {
        b = a.multiply(Vector<double>(a.rows(), 1.0));
      }
      std::optional<BlockSaddleSystem<double>> s;
      if (pj.contains("block_n")) s = BlockSaddleSystem<double>::from_matrix(a, count(pj, "block_n", 0, "problem"), b);
      BuiltProblem<double> bp{std::move(a), std::move(b), std::move(s), std::nullopt, std::nullopt};
      run_matrix(c, bp, row, diagnose_only);
    }
  } catch (const MatrixMarketError& e) {
    throw ConfigError(e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return row;
}

}  // namespace

ResultRow run_experiment(const ExperimentConfig& cfg) { return run_impl(cfg, false); }

ResultRow diagnose_experiment(const ExperimentConfig& cfg) { return run_impl(cfg, true); }

void set_dotted(Json& j, const std::string& path, const Json& value) {
  Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("bad key path '" + path + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key)) (*cur)[key] = Json::object();
    cur = &(*cur)[key];
    if (!cur->is_object()) throw ConfigError("key path '" + path + "' crosses a non-object");
    start = dot + 1;
  }
}

std::vector<Json> expand_sweep(const Json& spec) {
  if (!spec.is_object()) throw ConfigError("sweep spec must be a JSON object");
  if (spec.contains("configs")) {
    check_keys(spec, {"configs", "threads"}, "sweep");
    const Json& list = spec.at("configs");
    if (!list.is_array() || list.empty()) throw ConfigError("sweep.configs must be a nonempty array");
    return std::vector<Json>(list.begin(), list.end());
  }
  check_keys(spec, {"base", "grid", "threads"}, "sweep");
  if (!spec.contains("base") || !spec.contains("grid")) throw ConfigError("sweep needs 'configs' or 'base' + 'grid'");
  const Json& grid = spec.at("grid");
  if (!grid.is_object()) throw ConfigError("sweep.grid must be an object of arrays");
  std::vector<std::pair<std::string, std::vector<Json>>> axes;
  for (const auto& [k, v] : grid.items()) {
    if (!v.is_array() || v.empty()) throw ConfigError("sweep.grid." + k + " must be a nonempty array");
    axes.emplace_back(k, std::vector<Json>(v.begin(), v.end()));
  }
  std::vector<Json> out{spec.at("base")};
  for (const auto& [key, values] : axes) {
    std::vector<Json> next;
    for (const Json& partial : out)
      for (const Json& v : values) {
        Json c = partial;
        set_dotted(c, key, v);
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<ResultRow> sweep(const std::vector<Json>& configs, std::size_t threads) {
  if (threads == 0) {
    threads = 1;
    if (const char* env = std::getenv("PPSOLVE_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) threads = static_cast<std::size_t>(v);
    }
  }
  threads = std::max<std::size_t>(1, std::min(threads, configs.size()));
  std::vector<ResultRow> rows(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      ResultRow& r = rows[i];
      try {
        r = run_experiment(ExperimentConfig::from_json(configs[i]));
      } catch (const std::exception& e) {
        r = ResultRow{};
        const Json& c = configs[i];
        if (c.contains("problem") && c["problem"].is_object() && c["problem"].contains("name") &&
            c["problem"]["name"].is_string())
          r.problem = c["problem"]["name"].get<std::string>();
        if (c.contains("splitting") && c["splitting"].is_string()) r.splitting = c["splitting"].get<std::string>();
        else if (c.contains("preconditioner") && c["preconditioner"].is_string())
          r.splitting = c["preconditioner"].get<std::string>();
        if (c.contains("Q") && c["Q"].is_string()) r.q = c["Q"].get<std::string>();
        r.status = "error";
        r.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace ppsolve

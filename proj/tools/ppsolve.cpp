// ppsolve run|sweep|diagnose <config.json>

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ppsolve/experiment.hpp"

using ppsolve::ConfigError;
using ppsolve::Json;

namespace {

struct Overrides {
  std::optional<double> beta, tol, alpha, inner_reduction;
  std::optional<std::size_t> max_iters, restart, inner_max_iters, seed;
  std::optional<std::string> preconditioner, splitting, q;
  bool diagnose = false;

  void apply(Json& c) const {
    if (beta) ppsolve::set_dotted(c, "stationary.beta", *beta);
    if (tol) {
      ppsolve::set_dotted(c, "outer.tol", *tol);
      ppsolve::set_dotted(c, "stationary.tol", *tol);
    }
    if (max_iters) {
      ppsolve::set_dotted(c, "outer.max_iters", *max_iters);
      ppsolve::set_dotted(c, "stationary.max_iters", *max_iters);
    }
    if (restart) ppsolve::set_dotted(c, "outer.restart", *restart);
    if (inner_reduction) ppsolve::set_dotted(c, "inner.reduction", *inner_reduction);
    if (inner_max_iters) ppsolve::set_dotted(c, "inner.max_iters", *inner_max_iters);
    if (alpha) c["alpha"] = *alpha;
    if (seed) c["seed"] = *seed;
    if (preconditioner) c["preconditioner"] = *preconditioner;
    if (splitting) c["splitting"] = *splitting;
    if (q) c["Q"] = *q;
    if (diagnose) c["diagnose"] = true;
  }
};

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

int fail(const std::string& kind, const std::string& message, int code) {
  Json e;
  e["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << e.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PPS splitting solvers: run one experiment, sweep a grid, or diagnose convergence"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_path, out_path, diag_path;
  std::size_t threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON config")->required();
    sub->add_option("--out", out_path, "CSV output path (default stdout)");
    sub->add_option("--diag-out", diag_path, "JSON diagnostics output path");
    sub->add_option("--beta", ov.beta, "stationary damping in (0, 1]");
    sub->add_option("--tol,--outer-tol", ov.tol, "outer relative residual tolerance");
    sub->add_option("--max-iters,--max-outer", ov.max_iters, "outer iteration cap");
    sub->add_option("--restart", ov.restart, "FGMRES restart length");
    sub->add_option("--inner-reduction", ov.inner_reduction, "inner residual reduction factor");
    sub->add_option("--inner-max-iters", ov.inner_max_iters, "inner iteration cap");
    sub->add_option("--alpha", ov.alpha, "fixed alpha instead of alpha*");
    sub->add_option("--seed", ov.seed, "random seed");
    sub->add_option("--preconditioner", ov.preconditioner, "pps, spps1, spps2, none or a splitting name");
    sub->add_option("--splitting", ov.splitting, "splitting name");
    sub->add_option("--Q", ov.q, "identity, D_A, D_N or D_N_mirror");
  };
  CLI::App* run = app.add_subcommand("run", "solve one configuration and print a CSV row");
  add_common(run);
  run->add_flag("--diagnose", ov.diagnose, "also compute dense diagnostics when n is small enough");
  CLI::App* sw = app.add_subcommand("sweep", "run every configuration of a grid");
  add_common(sw);
  sw->add_option("--threads", threads, "parallel rows (default PPSOLVE_THREADS or 1)");
  CLI::App* diag = app.add_subcommand("diagnose", "dense convergence diagnostics as JSON");
  add_common(diag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 1);
  }

  try {
    if (*sw) {
      Json spec = read_json(config_path);
      std::vector<Json> cfgs = ppsolve::expand_sweep(spec);
      for (Json& c : cfgs) ov.apply(c);
      if (threads == 0 && spec.contains("threads") && spec["threads"].is_number_unsigned())
        threads = spec["threads"].get<std::size_t>();
      const auto rows = ppsolve::sweep(cfgs, threads);
      std::string csv = ppsolve::csv_header() + "\n";
      Json all = Json::array();
      bool all_ok = true;
      for (const auto& r : rows) {
        csv += ppsolve::to_csv(r) + "\n";
        all.push_back(ppsolve::row_to_json(r));
        all_ok = all_ok && r.converged;
      }
      write_text(out_path, csv);
      if (!diag_path.empty()) write_text(diag_path, all.dump(2) + "\n");
      return all_ok ? 0 : 2;
    }

    Json cj = read_json(config_path);
    ov.apply(cj);
    const ppsolve::ExperimentConfig cfg = ppsolve::ExperimentConfig::from_json(cj);
    if (out_path.empty()) out_path = cfg.csv_path;
    if (diag_path.empty()) diag_path = cfg.diagnostics_path;

    if (*diag) {
      const ppsolve::ResultRow r = ppsolve::diagnose_experiment(cfg);
      write_text(diag_path, ppsolve::row_to_json(r).dump(2) + "\n");
      if (!out_path.empty()) write_text(out_path, ppsolve::csv_header() + "\n" + ppsolve::to_csv(r) + "\n");
      return 0;
    }

    const ppsolve::ResultRow r = ppsolve::run_experiment(cfg);
    write_text(out_path, ppsolve::csv_header() + "\n" + ppsolve::to_csv(r) + "\n");
    if (!diag_path.empty()) write_text(diag_path, ppsolve::row_to_json(r).dump(2) + "\n");
    return r.converged ? 0 : 2;
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
}

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppsolve/diagnostics.hpp"
#include "ppsolve/inner_solver.hpp"
#include "ppsolve/krylov.hpp"
#include "ppsolve/splitting.hpp"
#include "ppsolve/stationary.hpp"

namespace ppsolve {

using Json = nlohmann::ordered_json;

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment. Problem parameters stay as JSON because each generator
/// takes its own set:
///   complex_shift    m, form ("real" | "complex")
///   skew_block       n
///   image            p, q, sigma, mu, snr_db, eps, pgm (optional path)
///   oseen_surrogate  n, m, convection, delta
///   matrix_market    path, block_n (optional), rhs (optional path)
struct ExperimentConfig {
  std::string problem;
  Json params = Json::object();
  /// Empty selects the preconditioner's own splitting (spps1/spps2) or hss.
  std::string splitting;
  /// Add the block skew matrix [[0, J], [-J^T, 0]] to P1 and subtract it from P2.
  bool skew_shift = false;
  QVariant q = QVariant::identity;
  double epsilon = 0.0;
  /// nullopt means alpha = ||A||_F / (2 ||Q||_F).
  std::optional<double> alpha;
  /// pps | spps1 | spps2 | none
  std::string preconditioner = "pps";
  /// fgmres | stationary
  std::string solver = "fgmres";
  KrylovConfig outer;
  InnerSolveConfig inner;
  StationaryConfig stationary;
  bool diagnose = false;
  std::size_t diagnose_cap = 2000;
  std::uint64_t seed = 0;
  std::string csv_path, diagnostics_path;

  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;
};

/// A CSV row plus the extra data that goes to the diagnostics JSON.
struct ResultRow {
  std::string problem;
  std::size_t n = 0;
  std::string splitting, q;
  double alpha = 0.0;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  double wall_time_s = 0.0;
  double final_relres = 0.0;
  bool converged = false;
  std::optional<double> rho;
  /// converged | not_converged | error
  std::string status = "error";
  std::string error;
  std::vector<double> residual_history;
  std::map<std::string, double> metrics;
  std::optional<ConvergenceDiagnostics> diagnostics;
};

std::string csv_header();
std::string to_csv(const ResultRow& r);
Json row_to_json(const ResultRow& r);

/// Throws ConfigError for configuration problems; solver trouble is
/// reported in the row.
ResultRow run_experiment(const ExperimentConfig& cfg);

/// Builds the problem and the PPS data and runs the dense diagnostics only.
/// Throws ConfigError when n exceeds the dense cap.
ResultRow diagnose_experiment(const ExperimentConfig& cfg);

/// Either {"configs": [...]} or {"base": {...}, "grid": {"dotted.key": [...]}}.
/// Grid expansion is the cartesian product with the last key varying fastest.
std::vector<Json> expand_sweep(const Json& spec);

/// Sets a dotted path such as "problem.m" inside j.
void set_dotted(Json& j, const std::string& path, const Json& value);

/// Runs every config; failures become error rows. Rows keep input order.
/// threads == 0 reads PPSOLVE_THREADS, defaulting to 1.
std::vector<ResultRow> sweep(const std::vector<Json>& configs, std::size_t threads = 0);

}  // namespace ppsolve

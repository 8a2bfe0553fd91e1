#pragma once

#include <string>

#include "json.hpp"

#include "invariantkit/certify.hpp"
#include "invariantkit/control.hpp"

namespace invkit::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

struct RunOptions {
  std::string out_dir_override;  // --out
  unsigned long long seed = 0;   // --seed
  int threads = 1;               // --threads / INVARIANT_KIT_THREADS
};

struct RunResult {
  int exit_code = 3;
  std::string report_json;
  std::string report_path;
};

/// Executes the job list of a problem config and writes report.json plus
/// per-job CSVs. Exit code: 0 all pass, 1 any violated/not-minimal,
/// 2 inconclusive present, 3 execution error.
RunResult run(const std::string& config_path, const RunOptions& opts = {});

/// One-shot classifier for `invariant-kit check-mu "<expr>"`.
/// Returns the verdict JSON; exit code as in run().
std::pair<std::string, int> check_mu(const std::string& expr_text);

// Config-to-problem builders, shared with the test suites.
certify::BarrierProblem barrier_problem_from_config(const nlohmann::json& cfg,
                                                    const std::string& config_path);
control::ControlProblem control_problem_from_config(const nlohmann::json& cfg,
                                                    const std::string& config_path);

}  // namespace invkit::cli

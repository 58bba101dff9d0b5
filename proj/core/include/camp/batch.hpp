#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "camp/eval.hpp"
#include "camp/json_io.hpp"

namespace camp {

class EmptyBatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BatchRun {
  unsigned seed = 0;
  SimLog log;
  ManeuverRecord record;
};

// Repeated closed-loop runs with consecutive seeds, parallelized across
// runs (CAMP_THREADS caps the worker count); results are ordered by seed
// either way.
std::vector<BatchRun> run_batch(const Scenario& scenario, int reps, unsigned seed0);

// Per-run logs, per-run timing files, and a summary.csv under out_dir.
void write_batch(const Scenario& scenario, const std::vector<BatchRun>& runs,
                 const std::string& out_dir);

struct CategorySummary {
  std::string category;
  int count = 0;
  double t_goal_mean = 0.0;
  double t_goal_min = 0.0;
  double t_goal_max = 0.0;
  double spread = 0.0;
  double min_clearance = 0.0;
  double max_jerk = 0.0;
  double standstill_mean = 0.0;
};

// Aggregates one or more summary.csv files found under dir (recursively).
// Throws EmptyBatch when none contain rows.
std::vector<CategorySummary> summarize_directory(const std::string& dir);

std::string render_report(const std::vector<CategorySummary>& rows);

struct AcceptanceCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Scenario-driven acceptance checks (collisions, lane keeping, maneuver
// timing, comfort, fail-safe discipline, planner latency, determinism),
// driven by a suite file listing the scenario set.
std::vector<AcceptanceCheck> run_acceptance_suite(const std::string& suite_path);

}  // namespace camp

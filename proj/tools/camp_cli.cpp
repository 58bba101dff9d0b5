// Command line front end: batch simulation runs, report aggregation, and the
// scenario-level acceptance suite.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "camp/batch.hpp"

namespace {

int cmd_run(const std::string& scenario_path, int reps, unsigned seed, const std::string& out) {
  camp::Scenario sc = camp::load_scenario(scenario_path);
  std::printf("scenario %s: %d run(s), seeds %u..%u\n", sc.name.c_str(), reps, seed,
              seed + static_cast<unsigned>(reps) - 1);
  auto runs = camp::run_batch(sc, reps, seed);
  camp::write_batch(sc, runs, out);
  for (const auto& run : runs) {
    std::printf("  seed %-4u %-16s t_goal %7.2f  clearance %5.2f  jerk %5.2f\n", run.seed,
                to_string(run.record.category), run.record.t_goal, run.record.min_clearance,
                run.record.max_abs_jerk);
  }
  std::printf("artifacts written to %s\n", out.c_str());
  return 0;
}

int cmd_report(const std::string& dir) {
  auto rows = camp::summarize_directory(dir);
  std::fputs(camp::render_report(rows).c_str(), stdout);
  return 0;
}

int cmd_acceptance(const std::string& suite_path) {
  auto checks = camp::run_acceptance_suite(suite_path);
  int failures = 0;
  for (const auto& check : checks) {
    std::printf("[%s] %-18s %s\n", check.pass ? "PASS" : "FAIL", check.name.c_str(),
                check.detail.c_str());
    if (!check.pass) ++failures;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"merging planner simulation driver"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", report_dir, suite_path;
  int reps = 1;
  unsigned seed = 1;

  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write logs");
  run->add_option("scenario", scenario_path, "scenario json file")->required();
  run->add_option("--reps", reps, "number of seeded repetitions")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "first seed");
  run->add_option("--out", out_dir, "output directory");

  CLI::App* report = app.add_subcommand("report", "aggregate summary.csv files");
  report->add_option("dir", report_dir, "directory with batch outputs")->required();

  CLI::App* acceptance = app.add_subcommand("acceptance", "run the scenario acceptance suite");
  acceptance->add_option("suite", suite_path, "suite json file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_path, reps, seed, out_dir);
    if (report->parsed()) return cmd_report(report_dir);
    if (acceptance->parsed()) return cmd_acceptance(suite_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

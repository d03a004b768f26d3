#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dpkit::harness {

// Knobs shared by all registered experiments. Zero means "use the
// experiment's default"; negatives are rejected. The seed drives every
// random choice, so equal configs give equal reports modulo wall time.
struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 42;
  int trials = 0;
  int n = 0;            // size or level parameter
  int k = 0;            // depth or switch-count parameter
  int arity = 0;        // indiscernibility arity override
  int row_length = 0;
  std::uint64_t eta_budget = 0;
  std::uint64_t dnf_budget = 0;
  std::string out;      // file stem used by emit callers
};

struct CheckRecord {
  std::string claim_id;
  std::string claim;      // what was checked, in plain words
  bool pass = false;
  std::string measured;   // observed values backing the verdict
};

struct Report {
  std::string name;
  ExperimentConfig config;   // effective values after defaulting
  std::vector<CheckRecord> checks;
  // Named CSV tables in emission order; the first carries the experiment's
  // primary data.
  std::vector<std::pair<std::string, std::string>> tables;
  std::int64_t wall_ms = 0;

  bool pass() const;
};

std::vector<std::string> experiment_names();

// Runs one registered experiment. Unknown names and invalid configs raise
// input_error; budget overruns surface as resource_error.
Report run_experiment(const ExperimentConfig& config);

// Human-readable form: config echo, one line per check, VERDICT, wall time.
std::string report_text(const Report& report);

// Machine form: the tables concatenated, no wall clock, byte-stable.
std::string report_csv(const Report& report);

// Writes stem.txt and stem.csv, creating parent directories. io_error on
// failure.
void emit(const Report& report, const std::string& stem);

}  // namespace dpkit::harness

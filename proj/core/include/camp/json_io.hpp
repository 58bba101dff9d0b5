#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "camp/sim.hpp"

namespace camp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loads a scenario description. Unknown fields are rejected with the section
// and field named in the error. A scenario may name a base file in "extends";
// its sections are deep-merged under the derived file.
Scenario load_scenario(const std::string& path);

// Deterministic writers: same log in, identical bytes out. Wall-clock
// timings are deliberately left out; they go to write_timings_json.
void write_log_json(const SimLog& log, const std::string& path);
void write_frames_csv(const SimLog& log, const std::string& path);
void write_cycles_csv(const SimLog& log, const std::string& path);
void write_timings_json(const SimLog& log, const std::string& path);

// 64-bit FNV-1a over the deterministic JSON serialization, as hex.
std::string log_digest(const SimLog& log);

}  // namespace camp

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "parobs/config.hpp"

namespace parobs::runner {

struct RunResult {
    std::filesystem::path out_dir;
    bool all_pass = true;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, bool>> checks; // (label, pass)
};

// Resolve the output directory, honoring the PAROBS_OUTPUT_ROOT override.
std::filesystem::path resolve_output_dir(const std::string& configured);

// solve -> freeboundary -> blowup -> estimates, emitting reports and a manifest.
RunResult run(const config::Config& cfg, std::ostream& log);

// Consolidated human-readable summary of a finished run directory.
// Returns the markdown text; throws Error listing gaps when files are missing.
std::string report(const std::filesystem::path& run_dir);

// Per-seed boundary data of the Harnack family (shared with the acceptance suite).
struct HarnackSeedData {
    Real left_base, left_amp, left_freq, left_phase;
    Real right_base, right_amp, right_freq, right_phase;
};
HarnackSeedData harnack_seed_data(uint64_t seed);

solver::ProblemSpec harnack_seed_problem(const config::Config& cfg, uint64_t seed, Real h);

} // namespace parobs::runner

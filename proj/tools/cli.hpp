#pragma once

// Command-line front end: a resolved run configuration and the subcommands
// decompose, classify-drift, build-sawtooth, estimate-measure, verify-claims
// and constants.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ample::cli {

enum ExitCode { kOk = 0, kInputError = 2, kConstructionViolation = 3, kClaimViolated = 4 };

struct RunConfig {
    int dim = 2;
    int k_max = 6;
    /// zero | uniform:EPS_HAT | cone:K:I[,K:I...][@A] | grid:PATH
    std::string drift = "zero";
    double eps = 0.1;
    double eta = 0.1;
    double m_bound = 1.0;
    std::int64_t walkers = 20000;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
    std::string sawtooth;
    std::vector<double> pole;
    std::vector<std::string> checks{"bourgain", "claim1", "holder", "criterion", "bmo", "ainfty"};
    double step_factor = 0.1;
    double absorb_depth = 1e-4;
    int k_est = 3;
    double a0 = 0.01;
    double a = 0.01;
};

/// Throws InputError on the first out-of-range field.
void validate(const RunConfig& cfg);
/// Compact single-line JSON of every field, in a fixed key order.
std::string to_json(const RunConfig& cfg);
/// Reads a JSON object with the same keys as to_json; unknown keys are an input error.
RunConfig parse_config(const std::string& text, RunConfig base = {});

/// Runs the command line; returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ample::cli

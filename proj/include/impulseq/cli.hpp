#pragma once

// Config-file front end: parse a JSON run description, dispatch a command and
// render its result as CSV or JSON text.

#include <optional>
#include <string>
#include <vector>

#include "impulseq/core_model.hpp"
#include "impulseq/numeric_oracle.hpp"

namespace impulseq::cli {

/// Malformed or incomplete config. The message starts with "<source>:<line>:".
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    QueueParams params;
    double q0 = 0.0;
    std::optional<ImpulseSpec> impulse;
    std::optional<double> T;        // single-impulse horizon
    std::optional<double> horizon;  // simulation horizon, falls back to T
    Dynamics dynamics = Dynamics::ErlangA;
    int grid = 201;
    int n_cycles = 50;
    std::vector<double> taus;  // evaluation points for `average`
    OracleConfig oracle;
    std::string source = "config";  // labels error messages
};

inline const std::vector<std::string> kCommands = {"simulate", "bounds", "average", "optimize", "sweep"};

/// `source` only labels error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

/// Output text of one command; the CLI adds no numerics of its own.
std::string run(const std::string& command, const RunConfig& config);

/// 0 ok, 2 config or validation error, 3 numerical non-convergence.
int main(int argc, char** argv);

}  // namespace impulseq::cli

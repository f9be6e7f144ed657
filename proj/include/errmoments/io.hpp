#pragma once

#include "errmoments/mc.hpp"
#include "errmoments/model.hpp"
#include "errmoments/moments.hpp"

#include <optional>
#include <string>
#include <vector>

namespace errmoments {

/// A parsed configuration file. Either a full model (means, covariance,
/// prior) or one of the reduced scalar forms that drive the formulas
/// directly.
struct Config {
    enum class Kind { full, reduced_conditional, reduced_unconditional };
    Kind kind = Kind::full;
    FullModelSpec spec;           // kind == full
    ReducedConditional rc;        // kind == reduced_conditional
    ReducedUnconditional ru;      // kind == reduced_unconditional
    double alpha0 = 0.5;          // mixing weight for reduced forms
    std::optional<AsymptoticProfile> asymptotic;
};

/// Parses the JSON text of a configuration. Throws model_error with the
/// offending field named on any missing or ill-typed entry.
Config parse_config(const std::string& json_text);

/// Reads and parses a configuration file.
Config load_config(const std::string& path);

/// One row per moment entry: name, value.
void write_moment_csv(std::ostream& out, const MomentMatrix& mm);

/// Full JSON dump of a simulation result with the configuration echoed.
void write_mc_json(std::ostream& out, const McConfig& config,
                   const McEstimates& est);

/// Provenance record emitted next to every output.
struct RunManifest {
    std::string subcommand;
    std::string config_echo; // resolved configuration, JSON text
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string version;
    double wall_seconds = 0;
};

void write_manifest(std::ostream& out, const RunManifest& manifest);

} // namespace errmoments

#pragma once

// JSON experiment configuration.
//
//   {
//     "T": 5,                        // or "T_grid": [5, 10]
//     "regressor": {"kind": "linear", "a": [1, 0.5, ...] | "ones" | "geometric",
//                   "decay": 0.5, "beta": 0.1},
//     "input": {"family": "gaussian", "variance": 1},
//     "noise": {"family": "gaussian", "variance": 1} | null,   // null: noiseless
//     "N_grid": [100, 200, 400],     // or "N": 500
//     "trials": 2000,
//     "master_seed": 42,
//     "bound": {"delta": 0.1, "eta": 0.1, "C": 1, "L_x": .., "L_eps": ..,
//               "sigma_eps": .., "sigma_x": ..},
//     "quantities": ["sq_error", "multiplier_norm"],
//     "grid_points": 0,
//     "calibration": {"confidence": 0.95, "max_C": 1e6, "rel_precision": 0.01,
//                     "min_points": 3, "min_trials": 1000}
//   }
//
// Omitted input and noise default to unit-variance Gaussians. A run manifest (any object with a "resolved_config" member) is accepted in
// place of a config and replays that resolved configuration.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "firlab/errors.hpp"
#include "firlab/montecarlo.hpp"

namespace firlab {

/// Config problem carrying a "source:line:col: message" description.
class ConfigFileError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct RunConfig {
    /// One experiment per lag in the sweep, in T_grid order.
    std::vector<ExperimentConfig> sweep;
    CalibrationOptions calibration;
    /// Fully defaulted configuration; feeding it back reproduces the run.
    nlohmann::json resolved;
};

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       const ConfigOverrides& overrides = {});
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Adds q to every experiment (and to the resolved JSON) if missing.
void require_quantity(RunConfig& run, Quantity q);

}  // namespace firlab

/**
 * Command-line front end: planning, execution, trade-off sweeps, heatmaps,
 * the direct-mapping path, and the oracle cross-check, with reproducible
 * CSV/JSON emission.
 *
 * Exit codes: 0 success, 2 configuration error, 3 synthesis error,
 * 4 oracle violation.
 */

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dicke/protocol.hpp"

namespace dicke::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Everything a subcommand needs, collected from flags.
struct RunConfig {
    std::vector<cplx> target;
    double kappa = 0.5;
    double r = 1.0;  // defaults mirror the standard operating point
    std::vector<double> phi;
    std::optional<double> epsilon_override;
    bool presqueezed = false;
    bool use_complex_solver = false;
    std::string strategy = "advanced";
    bool feedback = false;
    bool feedback_real = false;
    bool no_rescale = false;
    std::vector<double> sweep;
    double grid_half_width = 9.0;
    std::optional<double> grid_spacing;  // default depends on grid dimension
    int oracle_dim = 128;
    std::vector<double> outcomes;
    int n_max = -1;
    std::string out_path;
    bool emit_json = false;
    unsigned long seed = 0;
};

/// Parses "re" or "re,im" components separated by ';' (e.g. "0;0;1" or
/// "0.7,0;0;0.7,0.1"). Throws dicke::error on malformed input.
std::vector<cplx> parse_complex_list(const std::string& text);

/// FNV-1a over the canonical serialized config; stamped into every emitted
/// file so outputs are traceable to their exact inputs.
unsigned long long config_hash(const RunConfig& config, const std::string& subcommand);

/// Full argv-level entry point; writes to the given streams instead of the
/// global ones so tests can capture output.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dicke::cli

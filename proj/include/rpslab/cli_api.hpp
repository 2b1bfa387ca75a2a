#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rpslab/linearflow.hpp"
#include "rpslab/system_spec.hpp"

namespace rpslab::cli {

/// Shared configuration of the command pipelines. Identical configs
/// reproduce every output file byte for byte.
struct RunConfig {
    std::string spec_path;
    std::string preset;
    std::uint64_t seed = 42;
    double dt = 0.0;    // 0: T/1000; otherwise snapped so T/dt is integral
    std::size_t paths = 0;  // 0: per-command default
    int nmin = 1;
    int nmax = 8;
    double mtrunc = 0.0;
    double tol = 1e-10;
    double alpha = 0.0;
    double tmax = 0.0;  // simulate horizon; 0: 2T
    std::string out_dir = "out";
    std::optional<double> lambda_override;
    bool lambda_search = false;
    Scheme scheme = Scheme::EulerMaruyama;
    std::vector<Vec> x0_list;
    int kmax = 50;  // Picard iteration cap
};

/// Loads the system from --preset or --spec and applies CLI-level
/// overrides. Throws Error / ParseError.
SystemSpec load_spec(const RunConfig& cfg);

/// Number of grid steps per period implied by cfg.dt (snapped).
std::int64_t steps_per_period(const SystemSpec& spec, const RunConfig& cfg);

// Exit codes: 0 success (check: verdict pass), 1 error, 2 check verdict fail.
int cmd_check(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_pullback(const RunConfig& cfg);
int cmd_fixpoint(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

}  // namespace rpslab::cli

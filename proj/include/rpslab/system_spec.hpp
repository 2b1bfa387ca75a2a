#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rpslab/feedback.hpp"
#include "rpslab/smallmat.hpp"

namespace rpslab {

/// Full description of one feedback system: linear part A, diagonal noise
/// matrices, periodic feedback map, period T.
struct SystemSpec {
    int d = 0;
    Mat A;
    /// sigma[k][i] is the i-th diagonal entry of the k-th noise matrix;
    /// exactly d noise matrices, absent ones all zero.
    std::vector<Vec> sigma;
    FeedbackSpec feedback;
    double T = 0.0;

    /// Optional decay-rate / envelope-bound overrides carried by the spec
    /// file ([envelope] section) or set programmatically.
    std::optional<double> lambda_override;
    std::optional<double> sup_er_override;

    /// sigma flattened as sig[k*d + i] for the kernels.
    std::vector<double> sigma_flat() const;

    /// Structural checks: cooperativity, shapes, T > 0. Throws Error.
    void validate() const;

    bool is_single_loop() const;
    bool is_diagonal_drift() const;
    /// -diag(A)
    Vec alphas() const;
    /// Per-component own-noise sigma (sigma[k][k]).
    Vec own_sigmas() const;
};

/// Parses the line-oriented spec-file format:
///
///   [system] d=<int> T=<real|2pi|pi>
///   [drift] row=<comma-separated reals>            (one line per row)
///   [noise k=<int>] diag=<comma-separated reals>
///   [feedback] kind=<goodwin|othmer_tyson|competitive|custom> ...
///   [envelope] lambda=<real> sup_er=<real>         (optional)
///
/// '#' starts a comment. Keys are case-sensitive, values contain no
/// whitespace except for exprN= keys, which take the rest of the line and
/// must therefore come last on theirs. [system] must come first.
SystemSpec parse_system(const std::string& text);

SystemSpec load_system_file(const std::string& path);

/// Embedded preset systems: goodwin, othmer_tyson, competitive, ex5_5.
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
std::string preset_text(const std::string& name);
SystemSpec preset_system(const std::string& name);

}  // namespace rpslab

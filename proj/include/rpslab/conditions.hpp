#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rpslab/linearflow.hpp"
#include "rpslab/system_spec.hpp"

namespace rpslab {

struct AssumptionStatus {
    bool pass = false;
    std::string detail;
};

/// Off-diagonal nonnegativity of the drift matrix.
AssumptionStatus check_cooperative(const Mat& A);

/// Monotonicity classification of h(t,.) on the nonnegative orthant.
/// Builtins are classified structurally; custom maps by sampling random
/// ordered pairs plus all lattice-adjacent pairs (5 points per axis up to
/// radius 10), with violations counted beyond 1e-12.
MonotoneDirection check_monotone_direction(const FeedbackSpec& fb, int random_pairs = 1000,
                                           std::uint64_t seed = 7);

struct LipschitzInfo {
    double value = 0.0;
    Provenance provenance = Provenance::ClosedFormBound;
    double bound_form = 0.0;                 // generic closed-form bound
    std::optional<double> exact_form;        // exact extremum when available
};
LipschitzInfo lipschitz_constant(const FeedbackSpec& fb);

/// Double sum over i >= j of lambda^{-(i-j)} prod_{k=j..i} (1 + sigma_k^2/(2 k lambda)).
double small_gain_sum(double lambda, const Vec& sigmas);

/// Gain constants of the three nonlinearity families on the single-loop /
/// diagonal drift shapes. lambda_opt == nullopt takes the shape default
/// (min alpha/(n+1), respectively min alpha/2).
double goodwin_bound(int n, double m, double V, double K, const Vec& alphas,
                     const Vec& sigmas, std::optional<double> lambda_opt = std::nullopt);
double othmer_tyson_bound(int n, double m, double k0, double K, const Vec& alphas,
                          const Vec& sigmas,
                          std::optional<double> lambda_opt = std::nullopt);
double competitive_bound(int n, double m, double K_min, const Vec& alphas,
                         const Vec& sigmas);

struct McBudget {
    std::size_t n_paths = 256;  // 0 disables the Monte Carlo cross-estimate
    double horizon = 0.0;       // 0 -> 10/lambda
    std::uint64_t seed = 42;
};

/// Everything the small-gain certificate needs, assembled: constants with
/// provenance, per-assumption statuses, the strict verdict kappa < 1, and
/// an advisory Monte Carlo cross-estimate of sup_t E R(t).
struct SmallGainReport {
    int d = 0;
    double T = 0.0;
    std::string system_kind;

    double lambda = 0.0;
    bool lambda_overridden = false;
    std::string envelope_kind;

    double L = 0.0;
    std::string L_provenance;
    Vec bound_N;
    std::string N_provenance;

    double sup_er_bound = 0.0;
    double sup_er_double_sum = 0.0;
    double kappa = 0.0;
    bool pass = false;

    AssumptionStatus cooperative;     // (A)
    AssumptionStatus monotone;        // (H) direction
    std::string monotone_direction;
    AssumptionStatus envelope;        // (L) closed-form envelope availability
    AssumptionStatus small_gain;      // (H1) strict kappa < 1
    std::string temperedness_note;    // (R): not checkable at finite horizon

    // Advisory Monte Carlo cross-estimate (0 paths = skipped).
    std::size_t mc_paths = 0;
    double mc_sup_er = 0.0;
    double mc_sup_er_se = 0.0;
    double mc_horizon = 0.0;
    long mc_envelope_violations = 0;
    long mc_envelope_checked = 0;

    std::string to_text() const;
    std::string to_json() const;  // serialized, machine-readable
};

SmallGainReport assemble_report(const SystemSpec& spec, const DecayEnvelope& env,
                                const McBudget& mc = {});

/// Optional lambda grid search minimizing kappa over the admissible range;
/// returns the minimizing lambda.
double grid_search_lambda(const SystemSpec& spec, int grid_points = 64);

}  // namespace rpslab

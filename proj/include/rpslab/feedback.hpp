#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpslab/expr.hpp"
#include "rpslab/smallmat.hpp"

namespace rpslab {

enum class FeedbackKind { Goodwin, OthmerTyson, Competitive, Custom };

/// How a reported constant was obtained.
enum class Provenance { ClosedFormBound, ClosedFormExact, SampledEstimate };

enum class MonotoneDirection { OrderPreserving, AntiOrderPreserving, Mixed };

std::string to_string(FeedbackKind k);
std::string to_string(Provenance p);
std::string to_string(MonotoneDirection m);

/// Sampling policy used to validate custom feedback maps and to estimate
/// their bound / Lipschitz constants.
struct FeedbackSampleConfig {
    int t_samples = 64;
    int x_samples = 64;
    double safety = 1.05;
    double periodicity_tol = 1e-12;
    double max_radius = 1e6;
    std::size_t max_lattice_points = 20000;
    std::uint64_t seed = 0x5eedf00dULL;
};

/// The feedback map h : R x R_+^d -> R_+^d of the system, with its
/// period, componentwise supremum N and Lipschitz constant L.
///
/// Evaluation expects a phase-reduced time argument (callers reduce grid
/// times modulo the period in index space), which makes h(t+T,x) == h(t,x)
/// hold exactly rather than up to libm rounding.
class FeedbackSpec {
public:
    static FeedbackSpec goodwin(int dim, double V, double K, double m);
    static FeedbackSpec othmer_tyson(int dim, double k0, double K, double m,
                                     bool exact_lipschitz = false);
    static FeedbackSpec competitive(int dim, std::vector<double> Ks, double m);
    /// Validates periodicity/finiteness/nonnegativity by sampling and
    /// estimates N and L; throws Error when validation fails.
    static FeedbackSpec custom(int dim, std::vector<FeedbackExpr> exprs, double period,
                               const FeedbackSampleConfig& cfg = {});

    FeedbackKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double period() const { return period_; }
    const Vec& bound_N() const { return bound_N_; }
    double lipschitz() const { return lipschitz_; }
    Provenance bound_provenance() const { return bound_prov_; }
    Provenance lipschitz_provenance() const { return lip_prov_; }

    /// h(t, |x|) componentwise into out[0..d).
    void eval(double t, const double* x, double* out) const;
    Vec eval(double t, const Vec& x) const;

    /// Batched evaluation over a structure-of-arrays block:
    /// x and out hold component c of path p at [c*n + p].
    /// Uses the SIMD kernel table for builtin kinds.
    void eval_batch(double t, const double* x, double* out, std::size_t n) const;

    /// Monotonicity of h(t,.) on the nonnegative orthant. Builtins are
    /// classified structurally; Mixed is returned only by the sampled
    /// classifier in the conditions module.
    MonotoneDirection structural_direction() const;

    bool is_single_loop_shape() const {
        return kind_ == FeedbackKind::Goodwin || kind_ == FeedbackKind::OthmerTyson;
    }

    // Builtin parameters (meaningful per kind).
    double param_V() const { return V_; }
    double param_K() const { return K_; }
    double param_m() const { return m_; }
    double param_k0() const { return k0_; }
    const std::vector<double>& param_Ks() const { return Ks_; }
    bool exact_lipschitz() const { return exact_lip_; }
    const std::vector<FeedbackExpr>& exprs() const { return exprs_; }

private:
    FeedbackSpec() = default;

    FeedbackKind kind_ = FeedbackKind::Custom;
    int dim_ = 0;
    double period_ = 0.0;
    double V_ = 0.0, K_ = 0.0, m_ = 0.0, k0_ = 0.0;
    std::vector<double> Ks_;
    bool exact_lip_ = false;
    std::vector<FeedbackExpr> exprs_;

    Vec bound_N_;
    double lipschitz_ = 0.0;
    Provenance bound_prov_ = Provenance::ClosedFormBound;
    Provenance lip_prov_ = Provenance::ClosedFormBound;
};

/// Exact supremum of |f'| for the Othmer-Tyson nonlinearity
/// f(t,x) = k0 (1+x^m) / (K + sin t + x^m); requires m > 1, K > 2.
double othmer_tyson_exact_lipschitz(double k0, double K, double m);

/// x^m by left-fold multiplication when m is a nonneg integer (matches the
/// SIMD kernels bit for bit), std::pow otherwise.
double pow_mono(double x, double m);

bool is_small_integer(double m);

}  // namespace rpslab

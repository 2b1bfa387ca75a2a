#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpslab/system_spec.hpp"
#include "rpslab/wiener.hpp"

namespace rpslab {

enum class Scheme { EulerMaruyama, Milstein };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// Ito -> Stratonovich correction: B = diag(sum_k (sigma_k^i)^2),
/// corrected drift = A - B/2.
struct StratonovichDrift {
    Mat corrected;
    Vec B_diag;
};
StratonovichDrift stratonovich_drift(const SystemSpec& spec);

/// Fundamental-matrix samples Psi(n) = Phi((n-t0)*dt, theta_{t0*dt} omega)
/// along one path, for view nodes n in [t0, t1]. Psi(t0) = I.
///
/// Small negative entries produced by the explicit scheme are counted,
/// never clamped: the samples feed linear operators that clamping would
/// bias.
class Propagator {
public:
    Propagator(std::int64_t t0, std::int64_t t1, int dim);

    std::int64_t t0() const { return t0_; }
    std::int64_t t1() const { return t1_; }
    int dim() const { return dim_; }

    const Mat& at(std::int64_t node) const;
    Mat& at(std::int64_t node);

    /// Phi(t-s, theta_s omega) x = Psi(t) Psi(s)^{-1} x for t0 <= s <= t.
    /// Triangular Psi(s) takes forward substitution, anything else LU.
    Vec factorized_apply(std::int64_t t, std::int64_t s, const Vec& x) const;

    long negative_entries = 0;
    long entries_checked = 0;

private:
    std::int64_t t0_, t1_;
    int dim_;
    std::vector<Mat> samples_;
};

/// Explicit integration of dPsi = A Psi dt + sum_k sigma_k Psi dW^k,
/// all columns advanced together through the batched step kernel.
Propagator integrate_propagator(const SystemSpec& spec, const WienerGrid& w,
                                std::int64_t t0, std::int64_t t1,
                                Scheme scheme = Scheme::EulerMaruyama);

/// Lower-triangular closed form for single-loop systems: exponential
/// diagonal entries evaluated on the stored path, strictly-lower entries
/// by left-endpoint quadrature of the nested convolutions.
Propagator closed_form_single_loop(const SystemSpec& spec, const WienerGrid& w,
                                   std::int64_t t0, std::int64_t t1);

/// Decay envelope ||Phi(t,omega)|| <= R(t,omega) e^{-lambda t} with the
/// analytic bounds on sup_t E R(t).
struct DecayEnvelope {
    enum class Kind { SingleLoop, Diagonal, UserSupplied };
    Kind kind = Kind::UserSupplied;
    double lambda = 0.0;
    bool lambda_overridden = false;
    Vec alphas;
    Vec sigmas;
    /// Per-component E sup_t R_kk(t) factors.
    Vec e_sup_Rkk;
    /// Bound used for the gain constant. Single loop: sum over the last
    /// row of E sup R_nj; diagonal: sum_i (1 + sigma_i^2/(2 lambda)).
    double sup_er_bound = 0.0;
    /// Conservative double-sum bound over all (i,j); equals sup_er_bound
    /// for diagonal and user-supplied envelopes.
    double sup_er_double_sum = 0.0;
    std::string note;
};

DecayEnvelope decay_envelope_single_loop(const SystemSpec& spec);
DecayEnvelope decay_envelope_diagonal(const SystemSpec& spec);

/// Dispatch on system shape; falls back to the user-supplied
/// (lambda, sup_er) pair and refuses general cooperative A without one.
DecayEnvelope make_envelope(const SystemSpec& spec);

/// E sup_{t>=0} exp((mu - sigma^2/2) t + sigma W_t) = 1 - sigma^2/(2 mu),
/// valid for mu < 0.
double max_inequality_gbm(double mu, double sigma);

/// R(t) samples at view nodes [t0, t1] for the closed-form envelopes.
std::vector<Mat> envelope_R_samples(const DecayEnvelope& env, const WienerGrid& w,
                                    std::int64_t t0, std::int64_t t1);

struct DecayCheck {
    long violations = 0;
    long checked = 0;
    double max_rel_violation = 0.0;
    double sup_er_mc = 0.0;
    double sup_er_mc_se = 0.0;
    double sup_er_mc_argmax_t = 0.0;
    std::size_t n_paths = 0;
    double horizon = 0.0;
};

/// Ensemble check of the pathwise envelope inequality on closed-form
/// samples, plus the Monte Carlo estimate of sup_t E R(t).
DecayCheck verify_decay(const SystemSpec& spec, const DecayEnvelope& env,
                        std::size_t n_paths, double horizon, std::uint64_t seed);

}  // namespace rpslab

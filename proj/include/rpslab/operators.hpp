#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rpslab/linearflow.hpp"
#include "rpslab/sdeflow.hpp"
#include "rpslab/system_spec.hpp"
#include "rpslab/wiener.hpp"

namespace rpslab {

/// Truncation policy for the input-to-state integral.
struct GainConfig {
    double m_trunc = 0.0;      // 0 -> max(10/lambda, 5T)
    double tail_tol = 1e-8;    // admissible truncation tail mass
    double window_pad = 0.0;   // extra warm-up time ahead of -m_trunc
    std::size_t n_paths = 512;
    std::uint64_t seed = 42;
    std::int64_t steps_per_period = 1000;
    Scheme scheme = Scheme::EulerMaruyama;
};

/// Shared shape and sample paths for everything the gain operator touches:
/// grid step, one period [0, N_T), full window [w_lo, N_T), ensemble.
class OperatorContext {
public:
    OperatorContext(const SystemSpec& spec, const DecayEnvelope& env, GainConfig cfg);

    const SystemSpec& spec() const { return *spec_; }
    const DecayEnvelope& envelope() const { return env_; }
    const GainConfig& config() const { return cfg_; }
    const EnsembleWiener& paths() const { return *paths_; }
    double dt() const { return dt_; }
    std::int64_t period_nodes() const { return n_period_; }
    std::int64_t window_lo() const { return w_lo_; }
    std::size_t n_paths() const { return cfg_.n_paths; }
    double m_trunc() const { return m_trunc_; }

    double phase(std::int64_t node) const { return phase_time(node, n_period_, dt_); }

private:
    const SystemSpec* spec_;
    DecayEnvelope env_;
    GainConfig cfg_;
    double dt_;
    double m_trunc_;
    std::int64_t n_period_;
    std::int64_t w_lo_;
    std::shared_ptr<const EnsembleWiener> paths_;
};

/// Grid-sampled, ensemble-indexed process on the window [w_lo, N_T).
/// One period [0, N_T) is the canonical block; values at t - k*T on a path
/// are, by the shift-consistency rule, the values at t on the k-fold
/// shifted path, and the window stores exactly those. Deterministic
/// elements (independent of the path) are stored once and broadcast.
class PeriodicProcess {
public:
    static PeriodicProcess constant(const OperatorContext& ctx, const Vec& value);
    /// Samples g(phase(t)) once per node; exactly shift-consistent because
    /// the phase argument repeats bit for bit period after period.
    static PeriodicProcess from_function(const OperatorContext& ctx,
                                         const std::function<double(double, int)>& g);
    /// Per-path storage filled by the operator sweeps.
    static PeriodicProcess zeros(const OperatorContext& ctx);

    /// Random element of the process space [0, N]: a trigonometric
    /// polynomial per component, deterministic in the path.
    static PeriodicProcess random_element(const OperatorContext& ctx, std::uint64_t seed);

    int dim() const { return dim_; }
    std::size_t n_paths() const { return uniform_ ? 1 : n_paths_; }
    std::size_t logical_paths() const { return n_paths_; }
    bool uniform() const { return uniform_; }
    std::int64_t t_lo() const { return t_lo_; }
    std::int64_t period_nodes() const { return n_period_; }
    std::uint64_t base_seed() const { return base_seed_; }

    double value(std::size_t path, int comp, std::int64_t node) const {
        const std::size_t stride = uniform_ ? 1 : n_paths_;
        const std::size_t p = uniform_ ? 0 : path;
        return data_[(static_cast<std::size_t>(node - t_lo_) * dim_ + comp) * stride + p];
    }

    /// f(t, theta_{-kT} omega) under the representation rule: the stored
    /// window value at t - k*T. k may be negative.
    double value_shifted(std::size_t path, int comp, std::int64_t node, int k_shifts) const {
        return value(path, comp, node - static_cast<std::int64_t>(k_shifts) * n_period_);
    }

    /// [comp][path-or-1] block at a node.
    const double* slice(std::int64_t node) const {
        const std::size_t stride = uniform_ ? 1 : n_paths_;
        return data_.data() + static_cast<std::size_t>(node - t_lo_) * dim_ * stride;
    }
    double* slice(std::int64_t node) {
        const std::size_t stride = uniform_ ? 1 : n_paths_;
        return data_.data() + static_cast<std::size_t>(node - t_lo_) * dim_ * stride;
    }

    bool compatible_with(const PeriodicProcess& other) const;

private:
    PeriodicProcess() = default;
    friend class OperatorContext;

    int dim_ = 0;
    std::size_t n_paths_ = 0;  // logical ensemble size
    bool uniform_ = false;
    std::int64_t t_lo_ = 0;
    std::int64_t n_period_ = 0;
    std::uint64_t base_seed_ = 0;
    std::vector<double> data_;
};

struct KStats {
    long clamped = 0;
    long checked = 0;
};

/// Input-to-state characteristic: left-endpoint quadrature of
/// Phi(t-s, theta_s omega) v(s, omega) over s in [t - M_trunc, t],
/// realized as the one-step recursion J <- M_n (J + v dt) per path, which
/// is the factorized quadrature evaluated without explicit inverses.
/// Output is componentwise >= 0: negative quadrature artifacts are
/// clamped in the stored values and counted.
PeriodicProcess apply_K(const OperatorContext& ctx, const PeriodicProcess& v,
                        KStats* stats = nullptr);

/// Gain operator: h evaluated pointwise at K(u); lands in [0, N].
PeriodicProcess apply_Kh(const OperatorContext& ctx, const PeriodicProcess& u,
                         KStats* stats = nullptr);

/// sup over one period of the ensemble mean of the max-norm difference.
struct RhoEstimate {
    double value = 0.0;
    double se = 0.0;  // standard error of the mean at the sup node
    std::int64_t argmax_node = 0;
    std::vector<double> per_t_mean;
    std::vector<double> per_t_se;
};
RhoEstimate metric_rho(const PeriodicProcess& f1, const PeriodicProcess& f2);

struct PicardResult {
    PeriodicProcess u_star;
    std::vector<double> residuals;  // rho(u_{k+1}, u_k)
    std::vector<double> ratios;     // successive residual ratios
    bool converged = false;
    bool contraction_warning = false;  // started without a kappa < 1 certificate
    int iterations = 0;
};

/// Picard iteration u <- K^h(u) to the fixed point; warns (does not fail)
/// when called with kappa >= 1.
PicardResult picard_fixed_point(const OperatorContext& ctx, const PeriodicProcess& u0,
                                int k_max, double tol, double kappa_hint = 0.0);

/// Y = K(u*), the realized random periodic state process.
PeriodicProcess realize_rps(const OperatorContext& ctx, const PeriodicProcess& u_star,
                            KStats* stats = nullptr);

/// Default Picard start: the midpoint N/2 of the order interval.
PeriodicProcess default_u0(const OperatorContext& ctx);

}  // namespace rpslab

#include "rpslab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rpslab/kernels/kernels.hpp"
#include "rpslab/rng.hpp"

namespace rpslab {

OperatorContext::OperatorContext(const SystemSpec& spec, const DecayEnvelope& env,
                                 GainConfig cfg)
    : spec_(&spec), env_(env), cfg_(cfg) {
    if (cfg_.steps_per_period < 2) throw Error("operator context needs steps_per_period >= 2");
    dt_ = spec.T / static_cast<double>(cfg_.steps_per_period);
    n_period_ = cfg_.steps_per_period;
    m_trunc_ = cfg_.m_trunc > 0.0 ? cfg_.m_trunc
                                  : std::max(10.0 / env_.lambda, 5.0 * spec.T);
    cfg_.m_trunc = m_trunc_;

    // Truncation tail of the gain integral: e^{-lambda M} sup E R max(N)/lambda
    // must stay within tail_tol.
    double max_n = 0.0;
    for (double v : spec.feedback.bound_N()) max_n = std::max(max_n, v);
    const double tail = std::exp(-env_.lambda * m_trunc_) * env_.sup_er_bound * max_n /
                        env_.lambda;
    if (tail > cfg_.tail_tol)
        throw Error("truncation horizon too short: tail bound " + format_double(tail) +
                    " exceeds tail_tol " + format_double(cfg_.tail_tol));

    const std::int64_t pad =
        static_cast<std::int64_t>(std::ceil(cfg_.window_pad / dt_));
    w_lo_ = -static_cast<std::int64_t>(std::ceil(m_trunc_ / dt_)) - pad;

    GridSpec gs;
    gs.dt = dt_;
    gs.i_min = w_lo_;
    gs.i_max = n_period_;
    gs.dim = spec.d;
    paths_ = std::make_shared<EnsembleWiener>(gs, cfg_.seed, cfg_.n_paths);
}

PeriodicProcess PeriodicProcess::zeros(const OperatorContext& ctx) {
    PeriodicProcess p;
    p.dim_ = ctx.spec().d;
    p.n_paths_ = ctx.n_paths();
    p.uniform_ = false;
    p.t_lo_ = ctx.window_lo();
    p.n_period_ = ctx.period_nodes();
    p.base_seed_ = ctx.config().seed;
    p.data_.assign(static_cast<std::size_t>(p.n_period_ - p.t_lo_) * p.dim_ * p.n_paths_,
                   0.0);
    return p;
}

PeriodicProcess PeriodicProcess::constant(const OperatorContext& ctx, const Vec& value) {
    if (static_cast<int>(value.size()) != ctx.spec().d)
        throw Error("constant process: dimension mismatch");
    PeriodicProcess p;
    p.dim_ = ctx.spec().d;
    p.n_paths_ = ctx.n_paths();
    p.uniform_ = true;
    p.t_lo_ = ctx.window_lo();
    p.n_period_ = ctx.period_nodes();
    p.base_seed_ = ctx.config().seed;
    const std::size_t nodes = static_cast<std::size_t>(p.n_period_ - p.t_lo_);
    p.data_.resize(nodes * p.dim_);
    for (std::size_t n = 0; n < nodes; ++n)
        for (int c = 0; c < p.dim_; ++c) p.data_[n * p.dim_ + c] = value[c];
    return p;
}

PeriodicProcess PeriodicProcess::from_function(
    const OperatorContext& ctx, const std::function<double(double, int)>& g) {
    PeriodicProcess p;
    p.dim_ = ctx.spec().d;
    p.n_paths_ = ctx.n_paths();
    p.uniform_ = true;
    p.t_lo_ = ctx.window_lo();
    p.n_period_ = ctx.period_nodes();
    p.base_seed_ = ctx.config().seed;
    const std::size_t nodes = static_cast<std::size_t>(p.n_period_ - p.t_lo_);
    p.data_.resize(nodes * p.dim_);
    for (std::size_t n = 0; n < nodes; ++n) {
        const double t = ctx.phase(p.t_lo_ + static_cast<std::int64_t>(n));
        for (int c = 0; c < p.dim_; ++c) p.data_[n * p.dim_ + c] = g(t, c);
    }
    return p;
}

PeriodicProcess PeriodicProcess::random_element(const OperatorContext& ctx,
                                                std::uint64_t seed) {
    const Vec& N = ctx.spec().feedback.bound_N();
    const int d = ctx.spec().d;
    const double T = ctx.spec().T;
    // Per component: N_i (b0 + sum_j a_j cos(2 pi j t / T + phi_j)) with
    // b0 in [0.25, 0.75] and sum |a_j| <= min(b0, 1 - b0), so the values
    // stay inside [0, N_i].
    struct Trig {
        double b0;
        double a[3];
        double phi[3];
    };
    std::vector<Trig> coef(d);
    CounterRng rng(seed, 23);
    for (int c = 0; c < d; ++c) {
        coef[c].b0 = 0.25 + 0.5 * rng.next_uniform();
        const double budget = std::min(coef[c].b0, 1.0 - coef[c].b0);
        double total = 0.0;
        double raw[3];
        for (int j = 0; j < 3; ++j) {
            raw[j] = rng.next_uniform();
            total += raw[j];
        }
        for (int j = 0; j < 3; ++j) {
            coef[c].a[j] = total > 0.0 ? budget * raw[j] / total : 0.0;
            coef[c].phi[j] = 2.0 * std::numbers::pi * rng.next_uniform();
        }
    }
    return from_function(ctx, [coef, N, T](double t, int c) {
        double v = coef[c].b0;
        for (int j = 0; j < 3; ++j)
            v += coef[c].a[j] *
                 std::cos(2.0 * std::numbers::pi * (j + 1) * t / T + coef[c].phi[j]);
        return N[c] * v;
    });
}

bool PeriodicProcess::compatible_with(const PeriodicProcess& other) const {
    return dim_ == other.dim_ && n_paths_ == other.n_paths_ && t_lo_ == other.t_lo_ &&
           n_period_ == other.n_period_ && base_seed_ == other.base_seed_;
}

PeriodicProcess apply_K(const OperatorContext& ctx, const PeriodicProcess& v,
                        KStats* stats) {
    const int d = ctx.spec().d;
    const std::size_t np = ctx.n_paths();
    if (v.t_lo() > ctx.window_lo() || v.period_nodes() != ctx.period_nodes())
        throw Error("apply_K: input window incompatible with context");
    if (!v.uniform() && v.logical_paths() != np)
        throw Error("apply_K: input ensemble mismatch");

    PeriodicProcess out = PeriodicProcess::zeros(ctx);
    const auto& kt = kernels::active_table();
    const std::vector<double> sig = ctx.spec().sigma_flat();
    const double dt = ctx.dt();
    const bool milstein = ctx.config().scheme == Scheme::Milstein;

    std::vector<double> J(static_cast<std::size_t>(d) * np, 0.0);
    std::vector<double> Jn(J.size()), g(J.size());
    std::vector<double> broadcast(v.uniform() ? J.size() : 0);
    long clamped = 0;
    long checked = 0;

    const std::int64_t w_lo = ctx.window_lo();
    const std::int64_t n_hi = ctx.period_nodes();
    for (std::int64_t n = w_lo; n < n_hi; ++n) {
        // output at node n is the integral up to n
        double* slot = out.slice(n);
        for (std::size_t i = 0; i < J.size(); ++i) {
            ++checked;
            if (J[i] < 0.0) {
                slot[i] = 0.0;
                ++clamped;
            } else {
                slot[i] = J[i];
            }
        }
        if (n + 1 == n_hi) break;
        const double* vslice = v.slice(n);
        if (v.uniform()) {
            for (int c = 0; c < d; ++c)
                std::fill(broadcast.begin() + static_cast<std::ptrdiff_t>(c) * np,
                          broadcast.begin() + static_cast<std::ptrdiff_t>(c + 1) * np,
                          vslice[c]);
            vslice = broadcast.data();
        }
        kt.noise_factors(sig.data(), d, dt, milstein, ctx.paths().cell(n), g.data(), np, np);
        kt.k_sweep_step(ctx.spec().A.data(), d, dt, g.data(), vslice, J.data(), Jn.data(),
                        np, np);
        std::swap(J, Jn);
    }
    if (stats) {
        stats->clamped += clamped;
        stats->checked += checked;
    }
    return out;
}

PeriodicProcess apply_Kh(const OperatorContext& ctx, const PeriodicProcess& u,
                         KStats* stats) {
    const PeriodicProcess Ku = apply_K(ctx, u, stats);
    PeriodicProcess out = PeriodicProcess::zeros(ctx);
    const std::size_t np = ctx.n_paths();
    const std::int64_t w_lo = ctx.window_lo();
    const std::int64_t n_hi = ctx.period_nodes();
    for (std::int64_t n = w_lo; n < n_hi; ++n)
        ctx.spec().feedback.eval_batch(ctx.phase(n), Ku.slice(n), out.slice(n), np);
    return out;
}

RhoEstimate metric_rho(const PeriodicProcess& f1, const PeriodicProcess& f2) {
    if (!f1.compatible_with(f2)) throw Error("metric_rho: mismatched ensembles");
    const int d = f1.dim();
    const std::size_t np = f1.logical_paths();
    const std::int64_t n_period = f1.period_nodes();
    RhoEstimate est;
    est.per_t_mean.resize(static_cast<std::size_t>(n_period));
    est.per_t_se.resize(static_cast<std::size_t>(n_period));
    for (std::int64_t n = 0; n < n_period; ++n) {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            double m = 0.0;
            for (int c = 0; c < d; ++c)
                m = std::max(m, std::fabs(f1.value(p, c, n) - f2.value(p, c, n)));
            sum += m;
            sumsq += m * m;
        }
        const double mean = sum / static_cast<double>(np);
        const double var = std::max(0.0, sumsq / static_cast<double>(np) - mean * mean);
        const double se = np > 1 ? std::sqrt(var / static_cast<double>(np)) : 0.0;
        est.per_t_mean[static_cast<std::size_t>(n)] = mean;
        est.per_t_se[static_cast<std::size_t>(n)] = se;
        if (mean > est.value) {
            est.value = mean;
            est.se = se;
            est.argmax_node = n;
        }
    }
    return est;
}

PicardResult picard_fixed_point(const OperatorContext& ctx, const PeriodicProcess& u0,
                                int k_max, double tol, double kappa_hint) {
    PicardResult res;
    res.contraction_warning = kappa_hint >= 1.0;
    PeriodicProcess u = u0;
    for (int k = 0; k < k_max; ++k) {
        PeriodicProcess next = apply_Kh(ctx, u);
        const RhoEstimate r = metric_rho(next, u);
        res.residuals.push_back(r.value);
        if (res.residuals.size() >= 2) {
            const double prev = res.residuals[res.residuals.size() - 2];
            if (prev > 0.0) res.ratios.push_back(r.value / prev);
        }
        u = std::move(next);
        res.iterations = k + 1;
        if (r.value <= tol) {
            res.converged = true;
            break;
        }
    }
    res.u_star = std::move(u);
    return res;
}

PeriodicProcess realize_rps(const OperatorContext& ctx, const PeriodicProcess& u_star,
                            KStats* stats) {
    return apply_K(ctx, u_star, stats);
}

PeriodicProcess default_u0(const OperatorContext& ctx) {
    Vec mid = ctx.spec().feedback.bound_N();
    for (double& v : mid) v *= 0.5;
    return PeriodicProcess::constant(ctx, mid);
}

}  // namespace rpslab

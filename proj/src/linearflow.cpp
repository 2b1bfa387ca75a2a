#include "rpslab/linearflow.hpp"

#include <cmath>

#include "rpslab/kernels/kernels.hpp"

namespace rpslab {

std::string to_string(Scheme s) {
    return s == Scheme::EulerMaruyama ? "em" : "milstein";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "em") return Scheme::EulerMaruyama;
    if (s == "milstein") return Scheme::Milstein;
    throw Error("unknown scheme '" + s + "' (use em or milstein)");
}

StratonovichDrift stratonovich_drift(const SystemSpec& spec) {
    StratonovichDrift out;
    out.B_diag = Vec(spec.d, 0.0);
    for (int i = 0; i < spec.d; ++i)
        for (int k = 0; k < spec.d; ++k) out.B_diag[i] += spec.sigma[k][i] * spec.sigma[k][i];
    out.corrected = spec.A;
    for (int i = 0; i < spec.d; ++i) out.corrected(i, i) -= 0.5 * out.B_diag[i];
    return out;
}

Propagator::Propagator(std::int64_t t0, std::int64_t t1, int dim)
    : t0_(t0), t1_(t1), dim_(dim) {
    if (t1 < t0) throw Error("propagator window reversed");
    samples_.assign(static_cast<std::size_t>(t1 - t0 + 1), Mat(dim));
}

const Mat& Propagator::at(std::int64_t node) const {
    if (node < t0_ || node > t1_) throw Error("propagator node out of range");
    return samples_[static_cast<std::size_t>(node - t0_)];
}

Mat& Propagator::at(std::int64_t node) {
    if (node < t0_ || node > t1_) throw Error("propagator node out of range");
    return samples_[static_cast<std::size_t>(node - t0_)];
}

Vec Propagator::factorized_apply(std::int64_t t, std::int64_t s, const Vec& x) const {
    if (!(t0_ <= s && s <= t && t <= t1_)) throw Error("factorized_apply window error");
    const Vec z = solve(at(s), x);
    return at(t).apply(z);
}

Propagator integrate_propagator(const SystemSpec& spec, const WienerGrid& w,
                                std::int64_t t0, std::int64_t t1, Scheme scheme) {
    if (t0 < w.first_node() || t1 > w.last_node())
        throw Error("propagator window missing from path grid");
    const int d = spec.d;
    Propagator prop(t0, t1, d);
    prop.at(t0) = Mat::identity(d);
    if (t1 == t0) return prop;

    const auto& kt = kernels::active_table();
    const std::vector<double> sig = spec.sigma_flat();
    const double dt = w.spec().dt;
    const bool milstein = scheme == Scheme::Milstein;

    std::vector<double> dW(d), g(d);
    std::vector<double> noise(static_cast<std::size_t>(d) * d);
    const std::vector<double> zero_drift(static_cast<std::size_t>(d) * d, 0.0);

    for (std::int64_t n = t0; n < t1; ++n) {
        for (int k = 0; k < d; ++k) dW[k] = w.increment(k, n);
        kt.noise_factors(sig.data(), d, dt, milstein, dW.data(), g.data(), 1, 1);
        // one batched call advances all d columns: lane p = column p
        for (int c = 0; c < d; ++c)
            for (int p = 0; p < d; ++p) noise[static_cast<std::size_t>(c) * d + p] = g[c];
        kt.em_state_step(spec.A.data(), d, dt, noise.data(), zero_drift.data(),
                         prop.at(n).data(), prop.at(n + 1).data(), d, d);
        for (int c = 0; c < d; ++c)
            for (int p = 0; p < d; ++p) {
                ++prop.entries_checked;
                if (prop.at(n + 1)(c, p) < 0.0) ++prop.negative_entries;
            }
    }
    return prop;
}

namespace {

void require_single_loop(const SystemSpec& spec) {
    if (!spec.is_single_loop())
        throw Error("system is not in single-loop form (diagonal -alpha_i, unit subdiagonal, own-component noise)");
}

}  // namespace

Propagator closed_form_single_loop(const SystemSpec& spec, const WienerGrid& w,
                                   std::int64_t t0, std::int64_t t1) {
    require_single_loop(spec);
    if (t0 < w.first_node() || t1 > w.last_node())
        throw Error("propagator window missing from path grid");
    const int d = spec.d;
    const double dt = w.spec().dt;
    const Vec alpha = spec.alphas();
    const Vec sig = spec.own_sigmas();

    Propagator prop(t0, t1, d);
    prop.at(t0) = Mat::identity(d);
    for (std::int64_t n = t0; n < t1; ++n) {
        const Mat& cur = prop.at(n);
        Mat& next = prop.at(n + 1);
        // per-cell diagonal factors e_i = exp(-(alpha_i + sigma_i^2/2) dt + sigma_i dW_i)
        Vec e(d);
        for (int i = 0; i < d; ++i)
            e[i] = std::exp(-(alpha[i] + 0.5 * sig[i] * sig[i]) * dt +
                            sig[i] * w.increment(i, n));
        for (int i = 0; i < d; ++i) {
            next(i, i) = cur(i, i) * e[i];
            // Phi_ij(t+dt) = e_i * (Phi_ij(t) + Phi_{i-1,j}(t) dt), left endpoint
            for (int j = 0; j < i; ++j)
                next(i, j) = e[i] * (cur(i, j) + cur(i - 1, j) * dt);
        }
    }
    return prop;
}

double max_inequality_gbm(double mu, double sigma) {
    if (!(mu < 0.0)) throw Error("max_inequality_gbm requires mu < 0");
    return 1.0 - sigma * sigma / (2.0 * mu);
}

namespace {

double lambda_with_override(const SystemSpec& spec, double formula_value,
                            const char* formula_name, bool* overridden) {
    *overridden = false;
    if (!spec.lambda_override) return formula_value;
    const double l = *spec.lambda_override;
    if (!(l > 0.0) || l > formula_value * (1.0 + 1e-12))
        throw Error("lambda override " + format_double(l) + " outside (0, " +
                    formula_name + " = " + format_double(formula_value) + "]");
    *overridden = true;
    return l;
}

}  // namespace

DecayEnvelope decay_envelope_single_loop(const SystemSpec& spec) {
    require_single_loop(spec);
    const int n = spec.d;
    DecayEnvelope env;
    env.kind = DecayEnvelope::Kind::SingleLoop;
    env.alphas = spec.alphas();
    env.sigmas = spec.own_sigmas();
    double amin = env.alphas[0];
    for (double a : env.alphas) amin = std::min(amin, a);
    env.lambda = lambda_with_override(spec, amin / (n + 1), "min(alpha)/(d+1)",
                                      &env.lambda_overridden);
    env.e_sup_Rkk = Vec(n);
    for (int k = 0; k < n; ++k)
        env.e_sup_Rkk[k] = max_inequality_gbm(-(k + 1) * env.lambda, env.sigmas[k]);

    // Bound used for the gain constant: last-row sum of E sup R_nj.
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
        double term = std::pow(env.lambda, -(n - 1 - j));
        for (int k = j; k < n; ++k) term *= env.e_sup_Rkk[k];
        row += term;
    }
    env.sup_er_bound = row;

    double dbl = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double term = std::pow(env.lambda, -(i - j));
            for (int k = j; k <= i; ++k) term *= env.e_sup_Rkk[k];
            dbl += term;
        }
    env.sup_er_double_sum = dbl;
    env.note = "single-loop envelope; gain bound uses the last-row chain";
    return env;
}

DecayEnvelope decay_envelope_diagonal(const SystemSpec& spec) {
    if (!spec.is_diagonal_drift())
        throw Error("system drift is not diagonal with negative entries");
    const int n = spec.d;
    DecayEnvelope env;
    env.kind = DecayEnvelope::Kind::Diagonal;
    env.alphas = spec.alphas();
    env.sigmas = spec.own_sigmas();
    double amin = env.alphas[0];
    for (double a : env.alphas) amin = std::min(amin, a);
    env.lambda =
        lambda_with_override(spec, amin / 2.0, "min(alpha)/2", &env.lambda_overridden);
    env.e_sup_Rkk = Vec(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        env.e_sup_Rkk[i] = 1.0 + env.sigmas[i] * env.sigmas[i] / (2.0 * env.lambda);
        total += env.e_sup_Rkk[i];
    }
    env.sup_er_bound = total;
    env.sup_er_double_sum = total;
    env.note = "diagonal envelope";
    return env;
}

DecayEnvelope make_envelope(const SystemSpec& spec) {
    if (spec.is_single_loop()) return decay_envelope_single_loop(spec);
    if (spec.is_diagonal_drift()) return decay_envelope_diagonal(spec);
    if (spec.lambda_override && spec.sup_er_override) {
        DecayEnvelope env;
        env.kind = DecayEnvelope::Kind::UserSupplied;
        env.lambda = *spec.lambda_override;
        env.lambda_overridden = true;
        env.sup_er_bound = *spec.sup_er_override;
        env.sup_er_double_sum = *spec.sup_er_override;
        env.note = "user-supplied (lambda, sup_er) pair";
        return env;
    }
    throw Error(
        "no closed-form decay envelope for this drift shape; supply "
        "[envelope] lambda= and sup_er=");
}

std::vector<Mat> envelope_R_samples(const DecayEnvelope& env, const WienerGrid& w,
                                    std::int64_t t0, std::int64_t t1) {
    if (env.kind == DecayEnvelope::Kind::UserSupplied)
        throw Error("no sampled R(t) for a user-supplied envelope");
    const int d = static_cast<int>(env.alphas.size());
    const double dt = w.spec().dt;
    std::vector<Mat> R(static_cast<std::size_t>(t1 - t0 + 1), Mat(d));
    for (int i = 0; i < d; ++i) R[0](i, i) = 1.0;

    if (env.kind == DecayEnvelope::Kind::Diagonal) {
        for (std::int64_t n = t0; n < t1; ++n) {
            const Mat& cur = R[static_cast<std::size_t>(n - t0)];
            Mat& next = R[static_cast<std::size_t>(n - t0 + 1)];
            for (int i = 0; i < d; ++i) {
                const double r = std::exp(-(env.lambda + 0.5 * env.sigmas[i] * env.sigmas[i]) * dt +
                                          env.sigmas[i] * w.increment(i, n));
                next(i, i) = cur(i, i) * r;
            }
        }
        return R;
    }

    // Single loop: R_kk by exponentials, R_ij by the weighted convolution
    // R_ij(t+dt) = r_i (R_ij(t) + e^{-lambda t} R_{i-1,j}(t) dt).
    for (std::int64_t n = t0; n < t1; ++n) {
        const Mat& cur = R[static_cast<std::size_t>(n - t0)];
        Mat& next = R[static_cast<std::size_t>(n - t0 + 1)];
        const double t_rel = static_cast<double>(n - t0) * dt;
        const double decay = std::exp(-env.lambda * t_rel);
        for (int i = 0; i < d; ++i) {
            const double r =
                std::exp(-((i + 1) * env.lambda + 0.5 * env.sigmas[i] * env.sigmas[i]) * dt +
                         env.sigmas[i] * w.increment(i, n));
            next(i, i) = cur(i, i) * r;
            for (int j = 0; j < i; ++j)
                next(i, j) = r * (cur(i, j) + decay * cur(i - 1, j) * dt);
        }
    }
    return R;
}

DecayCheck verify_decay(const SystemSpec& spec, const DecayEnvelope& env,
                        std::size_t n_paths, double horizon, std::uint64_t seed) {
    if (env.kind == DecayEnvelope::Kind::UserSupplied)
        throw Error("verify_decay needs a closed-form envelope");
    const double dt = spec.T / 1000.0;
    GridSpec gs;
    gs.dt = dt;
    gs.i_min = -1;
    gs.i_max = static_cast<std::int64_t>(std::ceil(horizon / dt));
    gs.dim = spec.d;

    DecayCheck out;
    out.n_paths = n_paths;
    out.horizon = horizon;
    const std::size_t nodes = static_cast<std::size_t>(gs.i_max) + 1;
    std::vector<double> sum(nodes, 0.0), sumsq(nodes, 0.0);
    std::vector<long> viol(n_paths, 0), checked(n_paths, 0);
    std::vector<double> maxrel(n_paths, 0.0);
    std::vector<std::vector<double>> rmax_per_path(n_paths);

    parallel_for(n_paths, [&](std::size_t p) {
        const WienerGrid w = WienerGrid::sample(gs, seed + p);
        const Propagator phi = spec.is_single_loop()
                                   ? closed_form_single_loop(spec, w, 0, gs.i_max)
                                   : integrate_propagator(spec, w, 0, gs.i_max);
        const std::vector<Mat> R = envelope_R_samples(env, w, 0, gs.i_max);
        rmax_per_path[p].resize(nodes);
        for (std::size_t n = 0; n < nodes; ++n) {
            const double t = static_cast<double>(n) * dt;
            const double lhs = phi.at(static_cast<std::int64_t>(n)).max_abs();
            const double rmax = R[n].max_abs();
            rmax_per_path[p][n] = rmax;
            const double rhs = rmax * std::exp(-env.lambda * t);
            ++checked[p];
            if (lhs > rhs * (1.0 + 1e-9) + 1e-297) {
                ++viol[p];
                if (rhs > 0.0)
                    maxrel[p] = std::max(maxrel[p], (lhs - rhs) / rhs);
            }
        }
    });

    for (std::size_t p = 0; p < n_paths; ++p) {
        out.violations += viol[p];
        out.checked += checked[p];
        out.max_rel_violation = std::max(out.max_rel_violation, maxrel[p]);
        for (std::size_t n = 0; n < nodes; ++n) {
            sum[n] += rmax_per_path[p][n];
            sumsq[n] += rmax_per_path[p][n] * rmax_per_path[p][n];
        }
    }

    double best = -1.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        const double mean = sum[n] / static_cast<double>(n_paths);
        if (mean > best) {
            best = mean;
            const double var =
                std::max(0.0, sumsq[n] / static_cast<double>(n_paths) - mean * mean);
            out.sup_er_mc = mean;
            out.sup_er_mc_se = std::sqrt(var / static_cast<double>(n_paths));
            out.sup_er_mc_argmax_t = static_cast<double>(n) * dt;
        }
    }
    return out;
}

}  // namespace rpslab

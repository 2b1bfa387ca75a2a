#include "rpslab/pullback.hpp"

#include <algorithm>
#include <cmath>

namespace rpslab {

std::string to_string(DecayFit f) {
    switch (f) {
        case DecayFit::InBand: return "in-band";
        case DecayFit::Steeper: return "steeper";
        case DecayFit::Shallower: return "shallower";
        case DecayFit::Saturated: return "saturated";
    }
    return "?";
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct MeanSe {
    double mean, se;
};

MeanSe mean_se(const std::vector<double>& v) {
    double sum = 0.0, sumsq = 0.0;
    for (double x : v) {
        sum += x;
        sumsq += x * x;
    }
    const double n = static_cast<double>(v.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return {mean, v.size() > 1 ? std::sqrt(var / n) : 0.0};
}

}  // namespace

PullbackFan run_pullback(const SystemSpec& spec, const DecayEnvelope& env,
                         const PullbackConfig& cfg) {
    if (cfg.x0.empty()) throw Error("run_pullback: empty initial set");
    if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) throw Error("run_pullback: bad n range");
    const double dt = spec.T / static_cast<double>(cfg.steps_per_period);
    const std::int64_t n_period = cfg.steps_per_period;
    const std::int64_t alpha_cells = static_cast<std::int64_t>(std::llround(cfg.alpha / dt));
    if (std::fabs(static_cast<double>(alpha_cells) * dt - cfg.alpha) >
        1e-9 * std::max(1.0, cfg.alpha))
        throw Error("run_pullback: alpha is not a grid multiple");
    if (cfg.t_obs < 0 || cfg.t_obs >= n_period)
        throw Error("run_pullback: observation node outside one period");

    const std::int64_t deepest = cfg.t_obs - alpha_cells -
                                 static_cast<std::int64_t>(cfg.n_max) * n_period;
    GridSpec gs;
    gs.dt = dt;
    gs.i_min = deepest - 1;
    gs.i_max = std::max<std::int64_t>(cfg.t_obs, 1);
    gs.dim = spec.d;
    EnsembleWiener paths(gs, cfg.seed, cfg.n_paths);

    PullbackFan fan;
    fan.cfg = cfg;
    fan.dt = dt;
    fan.n_period = n_period;
    fan.base_seed = cfg.seed;
    const std::size_t np = cfg.n_paths;
    const int n_levels = cfg.n_max - cfg.n_min + 1;
    fan.terminal.assign(n_levels, {});

    double x0_scale = 1.0;
    for (const Vec& x : cfg.x0)
        for (double v : x) x0_scale = std::max(x0_scale, std::fabs(v));
    fan.saturation_floor = 1e2 * 2.220446049250313e-16 * x0_scale;

    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        const std::int64_t start =
            cfg.t_obs - alpha_cells - static_cast<std::int64_t>(n) * n_period;
        auto& level = fan.terminal[static_cast<std::size_t>(n - cfg.n_min)];
        level.reserve(cfg.x0.size());
        for (const Vec& x0 : cfg.x0) {
            std::vector<double> block(static_cast<std::size_t>(spec.d) * np);
            for (int c = 0; c < spec.d; ++c)
                std::fill(block.begin() + static_cast<std::ptrdiff_t>(c) * np,
                          block.begin() + static_cast<std::ptrdiff_t>(c + 1) * np, x0[c]);
            BatchTerminal term = evolve_batch(spec, paths, start, cfg.t_obs, block,
                                              cfg.scheme);
            fan.projection_events += term.projection_events;
            level.push_back(std::move(term.state));
        }
    }

    // Per-n diameter across the initial set: per path, max over components
    // of (max over x0 - min over x0).
    for (int li = 0; li < n_levels; ++li) {
        std::vector<double> diam(np, 0.0);
        for (std::size_t p = 0; p < np; ++p) {
            double dmax = 0.0;
            for (int c = 0; c < spec.d; ++c) {
                double lo = fan.terminal[li][0][static_cast<std::size_t>(c) * np + p];
                double hi = lo;
                for (std::size_t x = 1; x < cfg.x0.size(); ++x) {
                    const double v = fan.terminal[li][x][static_cast<std::size_t>(c) * np + p];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                dmax = std::max(dmax, hi - lo);
            }
            diam[p] = dmax;
        }
        const MeanSe ms = mean_se(diam);
        fan.diam_mean.push_back(ms.mean);
        fan.diam_se.push_back(ms.se);
        fan.diam_median.push_back(median_of(diam));
    }

    // Cauchy increments between consecutive depths, max over x0.
    for (int li = 0; li + 1 < n_levels; ++li) {
        std::vector<double> inc(np, 0.0);
        for (std::size_t p = 0; p < np; ++p) {
            double m = 0.0;
            for (std::size_t x = 0; x < cfg.x0.size(); ++x)
                for (int c = 0; c < spec.d; ++c)
                    m = std::max(m, std::fabs(
                                        fan.terminal[li + 1][x][static_cast<std::size_t>(c) * np + p] -
                                        fan.terminal[li][x][static_cast<std::size_t>(c) * np + p]));
            inc[p] = m;
        }
        const MeanSe ms = mean_se(inc);
        fan.cauchy_mean.push_back(ms.mean);
        fan.cauchy_se.push_back(ms.se);
    }

    // Log-linear fit of the mean diameter over the resolvable levels.
    {
        std::vector<double> xs, ys;
        for (int li = 0; li < n_levels; ++li) {
            if (fan.diam_mean[li] > fan.saturation_floor) {
                xs.push_back(static_cast<double>(cfg.n_min + li));
                ys.push_back(std::log(fan.diam_mean[li]));
            }
        }
        if (xs.size() < 2) {
            fan.fit_class = DecayFit::Saturated;
        } else {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sx += xs[i];
                sy += ys[i];
                sxx += xs[i] * xs[i];
                sxy += xs[i] * ys[i];
            }
            const double n = static_cast<double>(xs.size());
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            fan.fit_slope_per_period = slope;
            const double anchor = env.lambda * spec.T;
            if (slope <= -1.5 * anchor)
                fan.fit_class = DecayFit::Steeper;
            else if (slope >= -0.5 * anchor)
                fan.fit_class = DecayFit::Shallower;
            else
                fan.fit_class = DecayFit::InBand;
        }
    }
    return fan;
}

EnvelopeDiagnostics envelope_diagnostics(const SystemSpec& spec, const PullbackFan& fan,
                                         std::size_t x0_index) {
    if (x0_index >= fan.cfg.x0.size()) throw Error("envelope_diagnostics: bad x0 index");
    const int n_levels = fan.cfg.n_max - fan.cfg.n_min + 1;
    const std::size_t np = fan.cfg.n_paths;
    const int d = spec.d;
    const double t_obs_phase = phase_time(fan.cfg.t_obs, fan.n_period, fan.dt);

    // h at every terminal state first.
    std::vector<std::vector<double>> h_vals(n_levels,
                                            std::vector<double>(static_cast<std::size_t>(d) * np));
    for (int li = 0; li < n_levels; ++li)
        spec.feedback.eval_batch(t_obs_phase, fan.terminal[li][x0_index].data(),
                                 h_vals[li].data(), np);

    EnvelopeDiagnostics diag;
    diag.n_min = fan.cfg.n_min;
    diag.n_max = fan.cfg.n_max;
    diag.dim = d;
    diag.n_paths = np;
    diag.a.assign(n_levels, std::vector<double>(static_cast<std::size_t>(d) * np));
    diag.b.assign(n_levels, std::vector<double>(static_cast<std::size_t>(d) * np));

    // Suffix inf/sup over m in [n, n_max].
    for (std::size_t i = 0; i < static_cast<std::size_t>(d) * np; ++i) {
        diag.a[n_levels - 1][i] = h_vals[n_levels - 1][i];
        diag.b[n_levels - 1][i] = h_vals[n_levels - 1][i];
    }
    for (int li = n_levels - 2; li >= 0; --li)
        for (std::size_t i = 0; i < static_cast<std::size_t>(d) * np; ++i) {
            diag.a[li][i] = std::min(h_vals[li][i], diag.a[li + 1][i]);
            diag.b[li][i] = std::max(h_vals[li][i], diag.b[li + 1][i]);
        }

    for (int li = 0; li < n_levels; ++li) {
        double sum = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            double gap = 0.0;
            for (int c = 0; c < d; ++c)
                gap = std::max(gap, diag.b[li][static_cast<std::size_t>(c) * np + p] -
                                        diag.a[li][static_cast<std::size_t>(c) * np + p]);
            sum += gap;
        }
        diag.gap_mean.push_back(sum / static_cast<double>(np));
    }
    return diag;
}

RpsInvarianceResult verify_rps_invariance(
    const OperatorContext& ctx, const PeriodicProcess& Y,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& windows) {
    const int d = ctx.spec().d;
    const std::size_t np = ctx.n_paths();
    RpsInvarianceResult out;
    out.windows = windows.size();

    std::vector<double> residuals;
    residuals.reserve(windows.size() * np);
    for (const auto& [s, t] : windows) {
        if (s < ctx.window_lo() || t >= ctx.period_nodes() || s > t)
            throw Error("verify_rps_invariance: window outside process support");
        std::vector<double> x0(static_cast<std::size_t>(d) * np);
        for (int c = 0; c < d; ++c)
            for (std::size_t p = 0; p < np; ++p)
                x0[static_cast<std::size_t>(c) * np + p] = Y.value(p, c, s);
        const BatchTerminal term =
            evolve_batch(ctx.spec(), ctx.paths(), s, t, x0, ctx.config().scheme);
        for (std::size_t p = 0; p < np; ++p) {
            double r = 0.0;
            for (int c = 0; c < d; ++c)
                r = std::max(r, std::fabs(term.state[static_cast<std::size_t>(c) * np + p] -
                                          Y.value(p, c, t)));
            residuals.push_back(r);
            out.residual1_max = std::max(out.residual1_max, r);
        }
    }
    out.residual1_median = median_of(residuals);

    // Shift identity of the representation: Y(r + T, omega) against
    // Y(r, theta_T omega), the latter answered through the stored window.
    for (std::int64_t r = ctx.window_lo(); r < 0; ++r) {
        for (std::size_t p = 0; p < np; ++p)
            for (int c = 0; c < d; ++c) {
                const double lhs = Y.value(p, c, r + ctx.period_nodes());
                const double rhs = Y.value_shifted(p, c, r, -1);
                out.residual2_max = std::max(out.residual2_max, std::fabs(lhs - rhs));
            }
    }
    return out;
}

CrosscheckResult crosscheck_pullback_vs_fixpoint(const OperatorContext& ctx,
                                                 const PullbackFan& fan,
                                                 const PeriodicProcess& Y,
                                                 std::size_t x0_index) {
    if (fan.base_seed != ctx.config().seed || fan.cfg.n_paths != ctx.n_paths())
        throw Error("crosscheck: fan and fixed point use different path sets");
    if (fan.n_period != ctx.period_nodes())
        throw Error("crosscheck: fan and fixed point use different grids");
    const int d = ctx.spec().d;
    const std::size_t np = ctx.n_paths();
    const int n_levels = fan.cfg.n_max - fan.cfg.n_min + 1;
    const int ref_level = std::max(0, (fan.cfg.n_max / 2) - fan.cfg.n_min);

    auto distances = [&](int level) {
        std::vector<double> out(np);
        for (std::size_t p = 0; p < np; ++p) {
            double m = 0.0;
            for (int c = 0; c < d; ++c)
                m = std::max(m, std::fabs(
                                    fan.terminal[level][x0_index][static_cast<std::size_t>(c) * np + p] -
                                    Y.value(p, c, fan.cfg.t_obs)));
            out[p] = m;
        }
        return out;
    };

    CrosscheckResult res;
    res.n_ref = fan.cfg.n_min + ref_level;
    res.median_at_nmax = median_of(distances(n_levels - 1));
    res.median_at_nref = median_of(distances(ref_level));
    res.saturation_floor = fan.saturation_floor;
    res.improved_or_saturated =
        res.median_at_nmax < res.median_at_nref ||
        (res.median_at_nmax <= res.saturation_floor &&
         res.median_at_nref <= res.saturation_floor);
    return res;
}

}  // namespace rpslab

#include "rpslab/cli_api.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "rpslab/conditions.hpp"
#include "rpslab/io.hpp"
#include "rpslab/kernels/kernels.hpp"
#include "rpslab/operators.hpp"
#include "rpslab/pullback.hpp"
#include "rpslab/sdeflow.hpp"

namespace rpslab::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

nlohmann::json provenance(const RunConfig& cfg, const SystemSpec& spec, double dt,
                          std::size_t paths) {
    nlohmann::json j;
    j["tool"] = "rpslab";
    j["version"] = kVersion;
    j["seed"] = cfg.seed;
    j["dt"] = dt;
    j["paths"] = paths;
    j["scheme"] = to_string(cfg.scheme);
    j["kernels"] = kernels::active_name();
    j["system"] = cfg.preset.empty() ? cfg.spec_path : ("preset:" + cfg.preset);
    j["T"] = spec.T;
    j["d"] = spec.d;
    return j;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

double quantile_sorted(std::vector<double>& v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

SystemSpec load_spec(const RunConfig& cfg) {
    if (!cfg.preset.empty() && !cfg.spec_path.empty())
        throw Error("give either --preset or --spec, not both");
    SystemSpec spec;
    if (!cfg.preset.empty())
        spec = preset_system(cfg.preset);
    else if (!cfg.spec_path.empty())
        spec = load_system_file(cfg.spec_path);
    else
        throw Error("missing system: use --preset <name> or --spec <file>");
    if (cfg.lambda_override) spec.lambda_override = cfg.lambda_override;
    if (cfg.lambda_search) spec.lambda_override = grid_search_lambda(spec);
    return spec;
}

std::int64_t steps_per_period(const SystemSpec& spec, const RunConfig& cfg) {
    if (cfg.dt <= 0.0) return 1000;
    const double raw = spec.T / cfg.dt;
    const std::int64_t n = std::max<std::int64_t>(2, std::llround(raw));
    if (std::fabs(static_cast<double>(n) - raw) > 1e-9 * raw)
        std::cerr << "note: dt snapped to T/" << n << " = "
                  << format_double(spec.T / static_cast<double>(n))
                  << " so that T/dt is integral\n";
    return n;
}

int cmd_check(const RunConfig& cfg) {
    return guarded([&]() -> int {
        const SystemSpec spec = load_spec(cfg);
        ensure_directory(cfg.out_dir);
        const DecayEnvelope env = make_envelope(spec);
        McBudget mc;
        mc.n_paths = cfg.paths == 0 ? 256 : cfg.paths;
        mc.seed = cfg.seed;
        SmallGainReport rep = assemble_report(spec, env, mc);

        nlohmann::json j = nlohmann::json::parse(rep.to_json());
        j["provenance"] = provenance(cfg, spec, spec.T / 1000.0, mc.n_paths);
        write_text_file(cfg.out_dir + "/report.json", j.dump(2) + "\n");
        write_text_file(cfg.out_dir + "/report.txt", rep.to_text());
        std::cout << rep.to_text();
        return rep.pass ? 0 : 2;
    });
}

int cmd_simulate(const RunConfig& cfg) {
    return guarded([&]() -> int {
        const SystemSpec spec = load_spec(cfg);
        ensure_directory(cfg.out_dir);
        const std::int64_t spp = steps_per_period(spec, cfg);
        const double dt = spec.T / static_cast<double>(spp);
        const double tmax = cfg.tmax > 0.0 ? cfg.tmax : 2.0 * spec.T;
        const std::int64_t t_end = static_cast<std::int64_t>(std::ceil(tmax / dt));
        const std::size_t n_paths = cfg.paths == 0 ? 10 : cfg.paths;
        std::vector<Vec> x0s = cfg.x0_list;
        if (x0s.empty()) x0s.push_back(Vec(spec.d, 1.0));
        for (const Vec& x : x0s)
            if (static_cast<int>(x.size()) != spec.d)
                throw Error("--x0 must have d = " + std::to_string(spec.d) + " entries");

        GridSpec gs;
        gs.dt = dt;
        gs.i_min = -1;
        gs.i_max = t_end;
        gs.dim = spec.d;

        long projections = 0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            const std::uint64_t seed = cfg.seed + p;
            const WienerGrid w = WienerGrid::sample(gs, seed);
            for (std::size_t xi = 0; xi < x0s.size(); ++xi) {
                const Trajectory traj = evolve(spec, w, 0, t_end, x0s[xi], cfg.scheme);
                projections += traj.projection_events;
                std::vector<std::string> header{"t"};
                for (int c = 0; c < spec.d; ++c)
                    header.push_back("x" + std::to_string(c + 1));
                CsvWriter csv(cfg.out_dir + "/traj_seed" + std::to_string(seed) + "_x0" +
                                  std::to_string(xi) + ".csv",
                              header);
                for (std::int64_t n = 0; n <= t_end; ++n) {
                    std::vector<double> row{static_cast<double>(n) * dt};
                    for (int c = 0; c < spec.d; ++c) row.push_back(traj.value(n, c));
                    csv.row(row);
                }
                csv.close();
            }
        }
        nlohmann::json j;
        j["provenance"] = provenance(cfg, spec, dt, n_paths);
        j["projection_events"] = projections;
        j["steps"] = t_end;
        j["x0_count"] = x0s.size();
        write_text_file(cfg.out_dir + "/simulate.json", j.dump(2) + "\n");
        std::cout << "simulate: " << n_paths << " paths, " << x0s.size()
                  << " initial states, " << projections << " projection events\n";
        return 0;
    });
}

int cmd_pullback(const RunConfig& cfg) {
    return guarded([&]() -> int {
        const SystemSpec spec = load_spec(cfg);
        ensure_directory(cfg.out_dir);
        const DecayEnvelope env = make_envelope(spec);

        PullbackConfig pc;
        pc.t_obs = 0;
        pc.alpha = cfg.alpha;
        pc.n_min = cfg.nmin;
        pc.n_max = cfg.nmax;
        pc.n_paths = cfg.paths == 0 ? 256 : cfg.paths;
        pc.seed = cfg.seed;
        pc.steps_per_period = steps_per_period(spec, cfg);
        pc.scheme = cfg.scheme;
        pc.x0 = cfg.x0_list;
        if (pc.x0.empty()) {
            pc.x0.push_back(Vec(spec.d, 0.0));
            pc.x0.push_back(Vec(spec.d, 1.0));
            pc.x0.push_back(Vec(spec.d, 5.0));
        }
        const PullbackFan fan = run_pullback(spec, env, pc);
        const EnvelopeDiagnostics diag = envelope_diagnostics(spec, fan, 0);

        {
            CsvWriter csv(cfg.out_dir + "/pullback_diameters.csv",
                          {"n", "diam_mean", "diam_se", "diam_median", "cauchy_mean",
                           "cauchy_se"});
            for (int li = 0; li <= pc.n_max - pc.n_min; ++li) {
                std::vector<double> row{static_cast<double>(pc.n_min + li),
                                        fan.diam_mean[li], fan.diam_se[li],
                                        fan.diam_median[li]};
                if (li < static_cast<int>(fan.cauchy_mean.size())) {
                    row.push_back(fan.cauchy_mean[li]);
                    row.push_back(fan.cauchy_se[li]);
                } else {
                    row.push_back(0.0);
                    row.push_back(0.0);
                }
                csv.row(row);
            }
            csv.close();
        }
        {
            CsvWriter csv(cfg.out_dir + "/pullback_envelopes.csv",
                          {"n", "comp", "a_mean", "b_mean", "gap_mean"});
            const std::size_t np = pc.n_paths;
            for (int li = 0; li <= pc.n_max - pc.n_min; ++li)
                for (int c = 0; c < spec.d; ++c) {
                    double asum = 0.0, bsum = 0.0;
                    for (std::size_t p = 0; p < np; ++p) {
                        asum += diag.a[li][static_cast<std::size_t>(c) * np + p];
                        bsum += diag.b[li][static_cast<std::size_t>(c) * np + p];
                    }
                    csv.row({static_cast<double>(pc.n_min + li), static_cast<double>(c + 1),
                             asum / static_cast<double>(np), bsum / static_cast<double>(np),
                             bsum / static_cast<double>(np) - asum / static_cast<double>(np)});
                }
            csv.close();
        }
        nlohmann::json j;
        j["provenance"] = provenance(cfg, spec, fan.dt, pc.n_paths);
        j["alpha"] = pc.alpha;
        j["n_min"] = pc.n_min;
        j["n_max"] = pc.n_max;
        j["fit_slope_per_period"] = fan.fit_slope_per_period;
        j["fit_class"] = to_string(fan.fit_class);
        j["fit_band_anchor"] = env.lambda * spec.T;
        j["saturation_floor"] = fan.saturation_floor;
        j["projection_events"] = fan.projection_events;
        j["diam_mean"] = fan.diam_mean;
        j["gap_mean"] = diag.gap_mean;
        write_text_file(cfg.out_dir + "/pullback.json", j.dump(2) + "\n");
        std::cout << "pullback: n in [" << pc.n_min << ", " << pc.n_max << "], fit "
                  << to_string(fan.fit_class) << ", final mean diameter "
                  << format_double(fan.diam_mean.back()) << "\n";
        return 0;
    });
}

int cmd_fixpoint(const RunConfig& cfg) {
    return guarded([&]() -> int {
        const SystemSpec spec = load_spec(cfg);
        ensure_directory(cfg.out_dir);
        const DecayEnvelope env = make_envelope(spec);
        const double kappa =
            spec.feedback.lipschitz() * spec.d * spec.d * env.sup_er_bound / env.lambda;

        GainConfig gc;
        gc.m_trunc = cfg.mtrunc;
        gc.n_paths = cfg.paths == 0 ? 512 : cfg.paths;
        gc.seed = cfg.seed;
        gc.steps_per_period = steps_per_period(spec, cfg);
        gc.scheme = cfg.scheme;
        const OperatorContext ctx(spec, env, gc);

        if (kappa >= 1.0)
            std::cerr << "warning: kappa = " << format_double(kappa)
                      << " >= 1, iterating without a contraction certificate\n";

        const PicardResult pr =
            picard_fixed_point(ctx, default_u0(ctx), cfg.kmax, cfg.tol, kappa);
        KStats ks;
        const PeriodicProcess Y = realize_rps(ctx, pr.u_star, &ks);

        const std::int64_t N = ctx.period_nodes();
        const std::vector<std::pair<std::int64_t, std::int64_t>> windows = {
            {0, N / 4}, {N / 4, N / 2}, {0, N / 2}, {N / 2, N - 1}};
        const RpsInvarianceResult inv = verify_rps_invariance(ctx, Y, windows);

        {
            std::vector<std::string> header{"t"};
            for (int c = 0; c < spec.d; ++c) {
                const std::string base = "x" + std::to_string(c + 1);
                header.push_back(base + "_q05");
                header.push_back(base + "_q50");
                header.push_back(base + "_q95");
            }
            CsvWriter csv(cfg.out_dir + "/rps_quantiles.csv", header);
            const std::size_t np = ctx.n_paths();
            std::vector<double> vals(np);
            for (std::int64_t n = 0; n < N; ++n) {
                std::vector<double> row{static_cast<double>(n) * ctx.dt()};
                for (int c = 0; c < spec.d; ++c) {
                    for (std::size_t p = 0; p < np; ++p) vals[p] = Y.value(p, c, n);
                    std::vector<double> tmp = vals;
                    row.push_back(quantile_sorted(tmp, 0.05));
                    tmp = vals;
                    row.push_back(quantile_sorted(tmp, 0.50));
                    tmp = vals;
                    row.push_back(quantile_sorted(tmp, 0.95));
                }
                csv.row(row);
            }
            csv.close();
        }

        nlohmann::json j;
        j["provenance"] = provenance(cfg, spec, ctx.dt(), ctx.n_paths());
        j["kappa"] = kappa;
        j["contraction_warning"] = pr.contraction_warning;
        j["m_trunc"] = ctx.m_trunc();
        j["residuals"] = pr.residuals;
        j["ratios"] = pr.ratios;
        j["converged"] = pr.converged;
        j["iterations"] = pr.iterations;
        j["tolerance"] = cfg.tol;
        j["k_clamped"] = ks.clamped;
        j["k_checked"] = ks.checked;
        j["invariance"] = {{"residual1_median", inv.residual1_median},
                           {"residual1_max", inv.residual1_max},
                           {"residual2_max", inv.residual2_max},
                           {"windows", inv.windows}};
        write_text_file(cfg.out_dir + "/fixpoint.json", j.dump(2) + "\n");
        std::cout << "fixpoint: " << pr.iterations << " iterations, "
                  << (pr.converged ? "converged" : "NOT converged")
                  << ", final residual "
                  << format_double(pr.residuals.empty() ? 0.0 : pr.residuals.back())
                  << "\n";
        return 0;
    });
}

int cmd_report(const RunConfig& cfg) {
    return guarded([&]() -> int {
        nlohmann::json all;
        bool any = false;
        for (const char* name : {"report", "simulate", "pullback", "fixpoint"}) {
            const std::string path = cfg.out_dir + "/" + name + ".json";
            if (!file_exists(path)) continue;
            all[name] = nlohmann::json::parse(read_text_file(path));
            any = true;
        }
        if (!any) {
            std::cerr << "error: nothing to report in " << cfg.out_dir << "\n";
            return 1;
        }
        all["tool"] = "rpslab";
        all["version"] = kVersion;
        write_text_file(cfg.out_dir + "/report_all.json", all.dump(2) + "\n");
        std::cout << "report: aggregated " << all.size() - 2 << " stage(s) into "
                  << cfg.out_dir << "/report_all.json\n";
        return 0;
    });
}

}  // namespace rpslab::cli

#include "rpslab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rpslab/rng.hpp"

namespace rpslab {

AssumptionStatus check_cooperative(const Mat& A) {
    for (int i = 0; i < A.dim(); ++i)
        for (int j = 0; j < A.dim(); ++j)
            if (i != j && A(i, j) < 0.0)
                return {false, "a_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                   " = " + format_double(A(i, j)) + " < 0"};
    return {true, "all off-diagonal entries >= 0"};
}

namespace {

// One ordered pair x <= y; updates the preserving/anti counters.
void classify_pair(const FeedbackSpec& fb, double t, const Vec& x, const Vec& y,
                   long* viol_preserving, long* viol_anti) {
    constexpr double tol = 1e-12;
    const Vec hx = fb.eval(t, x);
    const Vec hy = fb.eval(t, y);
    for (int c = 0; c < fb.dim(); ++c) {
        if (hx[c] > hy[c] + tol) ++*viol_preserving;
        if (hy[c] > hx[c] + tol) ++*viol_anti;
    }
}

}  // namespace

MonotoneDirection check_monotone_direction(const FeedbackSpec& fb, int random_pairs,
                                           std::uint64_t seed) {
    if (fb.kind() != FeedbackKind::Custom) return fb.structural_direction();

    const int d = fb.dim();
    long viol_preserving = 0, viol_anti = 0;
    CounterRng rng(seed, 31);
    const double T = fb.period();

    for (int k = 0; k < random_pairs; ++k) {
        const double t = T * rng.next_uniform();
        Vec x(d), y(d);
        for (int c = 0; c < d; ++c) {
            x[c] = 10.0 * rng.next_uniform();
            y[c] = x[c] + 10.0 * rng.next_uniform();
        }
        classify_pair(fb, t, x, y, &viol_preserving, &viol_anti);
    }

    // Lattice-adjacent pairs: 5 points per axis up to radius 10.
    const double axis[5] = {0.0, 2.5, 5.0, 7.5, 10.0};
    std::vector<int> idx(d, 0);
    const double t_samples[4] = {0.0, 0.25 * T, 0.5 * T, 0.75 * T};
    for (;;) {
        Vec x(d);
        for (int c = 0; c < d; ++c) x[c] = axis[idx[c]];
        for (int c = 0; c < d; ++c) {
            if (idx[c] + 1 >= 5) continue;
            Vec y = x;
            y[c] = axis[idx[c] + 1];
            for (double t : t_samples)
                classify_pair(fb, t, x, y, &viol_preserving, &viol_anti);
        }
        int c = 0;
        while (c < d && ++idx[c] == 5) idx[c++] = 0;
        if (c == d) break;
    }

    // A constant map satisfies both directions; report it as preserving.
    if (viol_preserving == 0) return MonotoneDirection::OrderPreserving;
    if (viol_anti == 0) return MonotoneDirection::AntiOrderPreserving;
    return MonotoneDirection::Mixed;
}

LipschitzInfo lipschitz_constant(const FeedbackSpec& fb) {
    LipschitzInfo info;
    info.value = fb.lipschitz();
    info.provenance = fb.lipschitz_provenance();
    switch (fb.kind()) {
        case FeedbackKind::Goodwin:
            info.bound_form = fb.param_m() * fb.param_V() / (fb.param_K() - 1.0);
            break;
        case FeedbackKind::OthmerTyson:
            info.bound_form =
                fb.param_m() * fb.param_k0() * fb.param_K() / (fb.param_K() - 1.0);
            info.exact_form =
                othmer_tyson_exact_lipschitz(fb.param_k0(), fb.param_K(), fb.param_m());
            break;
        case FeedbackKind::Competitive: {
            double kmin = fb.param_Ks()[0];
            for (double k : fb.param_Ks()) kmin = std::min(kmin, k);
            info.bound_form = fb.param_m() / kmin;
            break;
        }
        case FeedbackKind::Custom:
            info.bound_form = fb.lipschitz();
            break;
    }
    return info;
}

double small_gain_sum(double lambda, const Vec& sigmas) {
    const int n = static_cast<int>(sigmas.size());
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double term = std::pow(lambda, -(i - j));
            for (int k = j; k <= i; ++k)
                term *= 1.0 + sigmas[k] * sigmas[k] / (2.0 * (k + 1) * lambda);
            total += term;
        }
    return total;
}

namespace {

double default_lambda_single_loop(const Vec& alphas) {
    double amin = alphas[0];
    for (double a : alphas) amin = std::min(amin, a);
    return amin / (static_cast<double>(alphas.size()) + 1.0);
}

double resolve_lambda(const Vec& alphas, std::optional<double> lambda_opt) {
    const double formula = default_lambda_single_loop(alphas);
    if (!lambda_opt) return formula;
    if (!(*lambda_opt > 0.0) || *lambda_opt > formula * (1.0 + 1e-12))
        throw Error("lambda must lie in (0, min(alpha)/(n+1)]");
    return *lambda_opt;
}

}  // namespace

double goodwin_bound(int n, double m, double V, double K, const Vec& alphas,
                     const Vec& sigmas, std::optional<double> lambda_opt) {
    if (!(K > 2.0)) throw Error("goodwin_bound requires K > 2");
    if (!(m > 1.0)) throw Error("goodwin_bound requires m > 1");
    const double lambda = resolve_lambda(alphas, lambda_opt);
    return m * n * n * V / (lambda * (K - 1.0)) * small_gain_sum(lambda, sigmas);
}

double othmer_tyson_bound(int n, double m, double k0, double K, const Vec& alphas,
                          const Vec& sigmas, std::optional<double> lambda_opt) {
    if (!(K > 2.0)) throw Error("othmer_tyson_bound requires K > 2");
    if (!(m > 1.0)) throw Error("othmer_tyson_bound requires m > 1");
    const double lambda = resolve_lambda(alphas, lambda_opt);
    return m * k0 * n * n * K / (lambda * (K - 1.0)) * small_gain_sum(lambda, sigmas);
}

double competitive_bound(int n, double m, double K_min, const Vec& alphas,
                         const Vec& sigmas) {
    if (!(K_min > 1.0)) throw Error("competitive_bound requires K_i > 1");
    if (!(m > 1.0)) throw Error("competitive_bound requires m > 1");
    double amin = alphas[0];
    for (double a : alphas) amin = std::min(amin, a);
    const double lambda = amin / 2.0;
    double s = 0.0;
    for (double sg : sigmas) s += 1.0 + sg * sg / (2.0 * lambda);
    return m * n * n / (lambda * K_min) * s;
}

SmallGainReport assemble_report(const SystemSpec& spec, const DecayEnvelope& env,
                                const McBudget& mc) {
    SmallGainReport rep;
    rep.d = spec.d;
    rep.T = spec.T;
    rep.system_kind = to_string(spec.feedback.kind());
    rep.lambda = env.lambda;
    rep.lambda_overridden = env.lambda_overridden;
    switch (env.kind) {
        case DecayEnvelope::Kind::SingleLoop: rep.envelope_kind = "single-loop"; break;
        case DecayEnvelope::Kind::Diagonal: rep.envelope_kind = "diagonal"; break;
        case DecayEnvelope::Kind::UserSupplied: rep.envelope_kind = "user-supplied"; break;
    }
    rep.L = spec.feedback.lipschitz();
    rep.L_provenance = to_string(spec.feedback.lipschitz_provenance());
    rep.bound_N = spec.feedback.bound_N();
    rep.N_provenance = to_string(spec.feedback.bound_provenance());
    rep.sup_er_bound = env.sup_er_bound;
    rep.sup_er_double_sum = env.sup_er_double_sum;
    rep.kappa = rep.L * rep.d * rep.d * rep.sup_er_bound / rep.lambda;
    rep.pass = rep.kappa < 1.0;

    rep.cooperative = check_cooperative(spec.A);
    const MonotoneDirection dir = check_monotone_direction(spec.feedback);
    rep.monotone_direction = to_string(dir);
    rep.monotone = {dir != MonotoneDirection::Mixed,
                    dir == MonotoneDirection::Mixed
                        ? "sampled classification found violations of both directions"
                        : "classified " + to_string(dir)};
    rep.envelope = {env.kind != DecayEnvelope::Kind::UserSupplied ||
                        spec.sup_er_override.has_value(),
                    env.note};
    rep.small_gain = {rep.pass, "kappa = " + format_double(rep.kappa) +
                                    (rep.pass ? " < 1" : " >= 1")};
    rep.temperedness_note =
        "temperedness of R is a proof-level property; not checkable at finite horizon";

    if (mc.n_paths > 0 && env.kind != DecayEnvelope::Kind::UserSupplied) {
        const double horizon = mc.horizon > 0.0 ? mc.horizon : 10.0 / env.lambda;
        const DecayCheck chk = verify_decay(spec, env, mc.n_paths, horizon, mc.seed);
        rep.mc_paths = mc.n_paths;
        rep.mc_sup_er = chk.sup_er_mc;
        rep.mc_sup_er_se = chk.sup_er_mc_se;
        rep.mc_horizon = horizon;
        rep.mc_envelope_violations = chk.violations;
        rep.mc_envelope_checked = chk.checked;
    }
    return rep;
}

std::string SmallGainReport::to_text() const {
    std::ostringstream os;
    auto line = [&](const std::string& k, const std::string& v) {
        os << "  " << k;
        for (std::size_t i = k.size(); i < 28; ++i) os << ' ';
        os << v << "\n";
    };
    os << "small-gain report\n";
    line("system", system_kind + " (d = " + std::to_string(d) +
                       ", T = " + format_double(T) + ")");
    line("envelope", envelope_kind + (lambda_overridden ? ", lambda overridden" : ""));
    line("lambda", format_double(lambda));
    line("L", format_double(L) + "  [" + L_provenance + "]");
    std::string nstr = "(";
    for (std::size_t i = 0; i < bound_N.size(); ++i)
        nstr += (i ? ", " : "") + format_double(bound_N[i]);
    nstr += ")  [" + N_provenance + "]";
    line("N", nstr);
    line("sup E R bound", format_double(sup_er_bound));
    line("sup E R (double sum)", format_double(sup_er_double_sum));
    if (mc_paths > 0) {
        line("sup E R (Monte Carlo)",
             format_double(mc_sup_er) + " +- " + format_double(mc_sup_er_se) + " (" +
                 std::to_string(mc_paths) + " paths, horizon " + format_double(mc_horizon) +
                 ")");
        line("envelope violations", std::to_string(mc_envelope_violations) + " / " +
                                        std::to_string(mc_envelope_checked));
    }
    line("kappa = L d^2 supER/lambda", format_double(kappa));
    os << "assumptions\n";
    line("(A) cooperative", (cooperative.pass ? "pass: " : "FAIL: ") + cooperative.detail);
    line("(H) monotone", (monotone.pass ? "pass: " : "FAIL: ") + monotone.detail);
    line("(L) envelope", (envelope.pass ? "pass: " : "FAIL: ") + envelope.detail);
    line("(R) temperedness", temperedness_note);
    line("(H1) small gain", (small_gain.pass ? "pass: " : "FAIL: ") + small_gain.detail);
    os << "verdict: " << (pass ? "PASS" : "FAIL") << " (kappa " << format_double(kappa)
       << (pass ? " < 1" : " >= 1") << ")\n";
    return os.str();
}

std::string SmallGainReport::to_json() const {
    nlohmann::json j;
    j["system"] = {{"kind", system_kind}, {"d", d}, {"T", T}};
    j["envelope"] = {{"kind", envelope_kind},
                     {"lambda", lambda},
                     {"lambda_overridden", lambda_overridden},
                     {"sup_er_bound", sup_er_bound},
                     {"sup_er_double_sum", sup_er_double_sum}};
    j["constants"] = {{"L", L},
                      {"L_provenance", L_provenance},
                      {"N", bound_N},
                      {"N_provenance", N_provenance},
                      {"kappa", kappa}};
    j["assumptions"] = {
        {"cooperative", {{"pass", cooperative.pass}, {"detail", cooperative.detail}}},
        {"monotone",
         {{"pass", monotone.pass},
          {"direction", monotone_direction},
          {"detail", monotone.detail}}},
        {"envelope", {{"pass", envelope.pass}, {"detail", envelope.detail}}},
        {"small_gain", {{"pass", small_gain.pass}, {"detail", small_gain.detail}}},
        {"temperedness_note", temperedness_note}};
    if (mc_paths > 0) {
        j["monte_carlo"] = {{"paths", mc_paths},
                            {"sup_er", mc_sup_er},
                            {"sup_er_se", mc_sup_er_se},
                            {"horizon", mc_horizon},
                            {"envelope_violations", mc_envelope_violations},
                            {"envelope_checked", mc_envelope_checked}};
    }
    j["verdict"] = pass ? "pass" : "fail";
    return j.dump(2) + "\n";
}

double grid_search_lambda(const SystemSpec& spec, int grid_points) {
    SystemSpec probe = spec;
    const DecayEnvelope base = [&] {
        SystemSpec tmp = spec;
        tmp.lambda_override.reset();
        return make_envelope(tmp);
    }();
    if (base.kind == DecayEnvelope::Kind::UserSupplied)
        throw Error("lambda grid search needs a closed-form envelope");
    double lambda_max = 0.0;
    {
        Vec alphas = spec.alphas();
        double amin = alphas[0];
        for (double a : alphas) amin = std::min(amin, a);
        lambda_max = base.kind == DecayEnvelope::Kind::SingleLoop
                         ? amin / (spec.d + 1.0)
                         : amin / 2.0;
    }
    double best_lambda = lambda_max;
    double best_kappa = std::numeric_limits<double>::infinity();
    for (int g = 1; g <= grid_points; ++g) {
        const double lam = lambda_max * static_cast<double>(g) / grid_points;
        probe.lambda_override = lam;
        const DecayEnvelope env = make_envelope(probe);
        const double kappa =
            spec.feedback.lipschitz() * spec.d * spec.d * env.sup_er_bound / env.lambda;
        if (kappa < best_kappa) {
            best_kappa = kappa;
            best_lambda = lam;
        }
    }
    return best_lambda;
}

}  // namespace rpslab

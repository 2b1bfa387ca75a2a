#include "rpslab/sdeflow.hpp"

#include <cmath>

#include "rpslab/kernels/kernels.hpp"

namespace rpslab {

std::int64_t period_cells(const SystemSpec& spec, double dt) {
    const double raw = spec.T / dt;
    const std::int64_t n = static_cast<std::int64_t>(std::llround(raw));
    if (n < 1 || std::fabs(static_cast<double>(n) * dt - spec.T) > 1e-9 * spec.T)
        throw Error("period T is not an integer multiple of dt");
    return n;
}

double phase_time(std::int64_t node, std::int64_t n_period, double dt) {
    std::int64_t p = node % n_period;
    if (p < 0) p += n_period;
    return static_cast<double>(p) * dt;
}

Trajectory evolve(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                  std::int64_t t1, const Vec& x0, Scheme scheme) {
    if (s > t1) throw Error("evolve: window reversed");
    if (s < w.first_node() || t1 > w.last_node())
        throw Error("evolve: window missing from path grid");
    const int d = spec.d;
    const double dt = w.spec().dt;
    const std::int64_t n_period = period_cells(spec, dt);
    const auto& kt = kernels::active_table();
    const std::vector<double> sig = spec.sigma_flat();
    const bool milstein = scheme == Scheme::Milstein;

    Trajectory traj;
    traj.s = s;
    traj.t1 = t1;
    traj.dim = d;
    traj.states.resize(static_cast<std::size_t>(t1 - s + 1) * d);
    for (int c = 0; c < d; ++c) traj.states[c] = x0[c];

    std::vector<double> dW(d), g(d), h(d), x(d), xn(d);
    for (int c = 0; c < d; ++c) x[c] = x0[c];
    for (std::int64_t n = s; n < t1; ++n) {
        for (int k = 0; k < d; ++k) dW[k] = w.increment(k, n);
        kt.noise_factors(sig.data(), d, dt, milstein, dW.data(), g.data(), 1, 1);
        spec.feedback.eval(phase_time(n, n_period, dt), x.data(), h.data());
        kt.em_state_step(spec.A.data(), d, dt, g.data(), h.data(), x.data(), xn.data(), 1, 1);
        for (int c = 0; c < d; ++c) {
            if (xn[c] < 0.0) {
                xn[c] = 0.0;
                ++traj.projection_events;
            }
            if (!std::isfinite(xn[c]))
                throw Error("trajectory blow-up: non-finite x" + std::to_string(c + 1) +
                            " at node " + std::to_string(n + 1) + " (t = " +
                            format_double(w.spec().time(n + 1)) + ")");
        }
        std::swap(x, xn);
        double* slot = traj.states.data() + static_cast<std::size_t>(n + 1 - s) * d;
        for (int c = 0; c < d; ++c) slot[c] = x[c];
    }
    return traj;
}

BatchTerminal evolve_batch(const SystemSpec& spec, const EnsembleWiener& paths,
                           std::int64_t s, std::int64_t t1, const std::vector<double>& x0,
                           Scheme scheme) {
    if (s > t1) throw Error("evolve_batch: window reversed");
    if (s < paths.spec().i_min || t1 > paths.spec().i_max)
        throw Error("evolve_batch: window missing from ensemble grid");
    const int d = spec.d;
    const std::size_t np = paths.n_paths();
    if (x0.size() != static_cast<std::size_t>(d) * np)
        throw Error("evolve_batch: x0 block size mismatch");
    const double dt = paths.spec().dt;
    const std::int64_t n_period = period_cells(spec, dt);
    const auto& kt = kernels::active_table();
    const std::vector<double> sig = spec.sigma_flat();
    const bool milstein = scheme == Scheme::Milstein;

    std::vector<double> x = x0, xn(x0.size());
    std::vector<double> g(x0.size()), h(x0.size());
    long projections = 0;
    for (std::int64_t n = s; n < t1; ++n) {
        kt.noise_factors(sig.data(), d, dt, milstein, paths.cell(n), g.data(), np, np);
        spec.feedback.eval_batch(phase_time(n, n_period, dt), x.data(), h.data(), np);
        kt.em_state_step(spec.A.data(), d, dt, g.data(), h.data(), x.data(), xn.data(), np,
                         np);
        for (std::size_t i = 0; i < xn.size(); ++i) {
            if (xn[i] < 0.0) {
                xn[i] = 0.0;
                ++projections;
            }
        }
        std::swap(x, xn);
    }
    for (double v : x)
        if (!std::isfinite(v)) throw Error("evolve_batch: trajectory blow-up");
    BatchTerminal out;
    out.state = std::move(x);
    out.projection_events = projections;
    return out;
}

double verify_flow_property(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                            std::int64_t r, std::int64_t t, const Vec& x0, Scheme scheme) {
    if (!(s <= r && r <= t)) throw Error("verify_flow_property needs s <= r <= t");
    const Trajectory direct = evolve(spec, w, s, t, x0, scheme);
    const Trajectory first = evolve(spec, w, s, r, x0, scheme);
    const Trajectory second = evolve(spec, w, r, t, first.state(r), scheme);
    return max_abs_diff(direct.state(t), second.state(t));
}

double verify_period_shift(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                           std::int64_t t, const Vec& x0, Scheme scheme) {
    const double dt = w.spec().dt;
    const std::int64_t n_period = period_cells(spec, dt);
    const Trajectory on_omega = evolve(spec, w, s + n_period, t + n_period, x0, scheme);
    const Trajectory on_shifted = evolve(spec, w.shifted(n_period), s, t, x0, scheme);
    double res = 0.0;
    for (std::int64_t n = s; n <= t; ++n)
        for (int c = 0; c < spec.d; ++c)
            res = std::max(res, std::fabs(on_omega.value(n + n_period, c) -
                                          on_shifted.value(n, c)));
    return res;
}

double mild_form_residual(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                          std::int64_t t, const Vec& x0, MildPropagator source,
                          Scheme scheme) {
    const int d = spec.d;
    const double dt = w.spec().dt;
    const std::int64_t n_period = period_cells(spec, dt);
    const Trajectory traj = evolve(spec, w, s, t, x0, scheme);
    const Propagator prop = source == MildPropagator::ClosedForm
                                ? closed_form_single_loop(spec, w, s, t)
                                : integrate_propagator(spec, w, s, t, scheme);

    // mild(n) = Psi(n) (x0 + sum_{m<n} Psi(m)^{-1} h(m, X_m) dt)
    Vec carry = x0;
    double res = 0.0;
    Vec h(d);
    for (std::int64_t n = s; n <= t; ++n) {
        const Vec mild = prop.at(n).apply(carry);
        const Vec direct = traj.state(n);
        res = std::max(res, max_abs_diff(mild, direct));
        if (n == t) break;
        spec.feedback.eval(phase_time(n, n_period, dt), direct.data(), h.data());
        for (int c = 0; c < d; ++c) h[c] *= dt;
        const Vec z = solve(prop.at(n), h);
        for (int c = 0; c < d; ++c) carry[c] += z[c];
    }
    return res;
}

}  // namespace rpslab

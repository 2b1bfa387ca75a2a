#pragma once

#include <cstdint>
#include <vector>

#include "rpslab/linearflow.hpp"
#include "rpslab/system_spec.hpp"
#include "rpslab/wiener.hpp"

namespace rpslab {

/// Forward solution samples of one path over [s, t1] (view node indices).
/// States live in the nonnegative orthant: components the explicit step
/// takes below zero are projected to zero and counted.
struct Trajectory {
    std::int64_t s = 0;
    std::int64_t t1 = 0;
    int dim = 0;
    std::vector<double> states;  // [node - s][comp]
    long projection_events = 0;

    double value(std::int64_t node, int c) const {
        return states[static_cast<std::size_t>(node - s) * dim + c];
    }
    Vec state(std::int64_t node) const {
        Vec x(dim);
        for (int c = 0; c < dim; ++c) x[c] = value(node, c);
        return x;
    }
};

/// Number of grid cells per period; requires T to be a grid multiple.
std::int64_t period_cells(const SystemSpec& spec, double dt);

/// Phase-reduced time of a view node: (node mod N_T) * dt. Feedback maps
/// are always evaluated at the reduced time, which is what makes the
/// period-shift identity exact.
double phase_time(std::int64_t node, std::int64_t n_period, double dt);

/// Explicit step X <- X + (A X + h(t,X)) dt + sum_k sigma_k X dW^k, with
/// the absolute-value extension inside h and projection to the orthant.
/// Throws on non-finite states with a node/time diagnostic.
Trajectory evolve(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                  std::int64_t t1, const Vec& x0, Scheme scheme = Scheme::EulerMaruyama);

/// Batched variant over a whole ensemble; x0 and the returned terminal
/// block are [comp][path]. Only the terminal slice is kept.
struct BatchTerminal {
    std::vector<double> state;  // [comp][path]
    long projection_events = 0;
};
BatchTerminal evolve_batch(const SystemSpec& spec, const EnsembleWiener& paths,
                           std::int64_t s, std::int64_t t1, const std::vector<double>& x0,
                           Scheme scheme = Scheme::EulerMaruyama);

/// |phi(s->t) - phi(r->t) o phi(s->r)| at t; identically zero for a step
/// scheme replaying identical increments.
double verify_flow_property(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                            std::int64_t r, std::int64_t t, const Vec& x0,
                            Scheme scheme = Scheme::EulerMaruyama);

/// max over nodes of |phi on omega over [s+T, t+T] - phi on theta_T omega
/// over [s, t]|; zero bit for bit when the feedback is T-periodic.
double verify_period_shift(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                           std::int64_t t, const Vec& x0,
                           Scheme scheme = Scheme::EulerMaruyama);

enum class MildPropagator { ClosedForm, Numeric };

/// max over nodes of |trajectory - (Psi(n) x0 + quadrature of
/// Psi(n) Psi(m)^{-1} h(m, X_m) dt)|. With the numeric propagator both
/// sides share the step rule and the residual is pure roundoff; with the
/// closed form it measures the scheme's strong error.
double mild_form_residual(const SystemSpec& spec, const WienerGrid& w, std::int64_t s,
                          std::int64_t t, const Vec& x0,
                          MildPropagator source = MildPropagator::Numeric,
                          Scheme scheme = Scheme::EulerMaruyama);

}  // namespace rpslab

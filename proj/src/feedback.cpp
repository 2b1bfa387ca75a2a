#include "rpslab/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rpslab/kernels/kernels.hpp"
#include "rpslab/rng.hpp"

namespace rpslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error(msg);
}

}  // namespace

std::string to_string(FeedbackKind k) {
    switch (k) {
        case FeedbackKind::Goodwin: return "goodwin";
        case FeedbackKind::OthmerTyson: return "othmer_tyson";
        case FeedbackKind::Competitive: return "competitive";
        case FeedbackKind::Custom: return "custom";
    }
    return "?";
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::ClosedFormBound: return "closed-form bound";
        case Provenance::ClosedFormExact: return "closed-form exact";
        case Provenance::SampledEstimate: return "sampled estimate";
    }
    return "?";
}

std::string to_string(MonotoneDirection m) {
    switch (m) {
        case MonotoneDirection::OrderPreserving: return "order-preserving";
        case MonotoneDirection::AntiOrderPreserving: return "anti-order-preserving";
        case MonotoneDirection::Mixed: return "mixed";
    }
    return "?";
}

bool is_small_integer(double m) {
    return m == std::floor(m) && m >= 0.0 && m <= 64.0;
}

double pow_mono(double x, double m) {
    if (is_small_integer(m)) {
        double r = 1.0;
        const int mi = static_cast<int>(m);
        for (int k = 0; k < mi; ++k) r = r * x;
        return r;
    }
    return std::pow(x, m);
}

double othmer_tyson_exact_lipschitz(double k0, double K, double m) {
    require(m > 1.0, "othmer_tyson exact Lipschitz requires m > 1");
    require(K > 2.0, "othmer_tyson exact Lipschitz requires K > 2");
    // d/dx [k0 (1+x^m)/(c+x^m)] = k0 m (c-1) x^{m-1} / (c+x^m)^2 with
    // c = K + sin t in [K-1, K+1]. For fixed c the maximum over x >= 0
    // sits at x^m = c(m-1)/(m+1); over c it is attained at
    // c = clamp(m+1, K-1, K+1).
    const double c = std::clamp(m + 1.0, K - 1.0, K + 1.0);
    const double u = c * (m - 1.0) / (m + 1.0);
    return k0 * (c - 1.0) * (m + 1.0) * (m + 1.0) * std::pow(u, (m - 1.0) / m) /
           (4.0 * m * c * c);
}

FeedbackSpec FeedbackSpec::goodwin(int dim, double V, double K, double m) {
    require(dim >= 1, "goodwin: dimension must be >= 1");
    require(m > 1.0, "goodwin: m must be > 1");
    require(K > 2.0, "goodwin: K must be > 2");
    require(V > 0.0, "goodwin: V must be > 0");
    FeedbackSpec f;
    f.kind_ = FeedbackKind::Goodwin;
    f.dim_ = dim;
    f.period_ = kTwoPi;
    f.V_ = V;
    f.K_ = K;
    f.m_ = m;
    f.bound_N_ = Vec(dim, 0.0);
    f.bound_N_[0] = V / (K - 1.0);
    f.lipschitz_ = m * V / (K - 1.0);
    return f;
}

FeedbackSpec FeedbackSpec::othmer_tyson(int dim, double k0, double K, double m,
                                        bool exact_lipschitz) {
    require(dim >= 1, "othmer_tyson: dimension must be >= 1");
    require(m > 1.0, "othmer_tyson: m must be > 1");
    require(K > 2.0, "othmer_tyson: K must be > 2");
    require(k0 > 0.0, "othmer_tyson: k0 must be > 0");
    FeedbackSpec f;
    f.kind_ = FeedbackKind::OthmerTyson;
    f.dim_ = dim;
    f.period_ = kTwoPi;
    f.k0_ = k0;
    f.K_ = K;
    f.m_ = m;
    f.exact_lip_ = exact_lipschitz;
    f.bound_N_ = Vec(dim, 0.0);
    f.bound_N_[0] = k0;
    if (exact_lipschitz) {
        f.lipschitz_ = othmer_tyson_exact_lipschitz(k0, K, m);
        f.lip_prov_ = Provenance::ClosedFormExact;
    } else {
        f.lipschitz_ = m * k0 * K / (K - 1.0);
    }
    return f;
}

FeedbackSpec FeedbackSpec::competitive(int dim, std::vector<double> Ks, double m) {
    require(dim >= 1, "competitive: dimension must be >= 1");
    require(static_cast<int>(Ks.size()) == dim, "competitive: need one K_i per component");
    require(m > 1.0, "competitive: m must be > 1");
    double kmin = Ks[0];
    for (double k : Ks) {
        require(k > 1.0, "competitive: all K_i must be > 1");
        kmin = std::min(kmin, k);
    }
    FeedbackSpec f;
    f.kind_ = FeedbackKind::Competitive;
    f.dim_ = dim;
    f.period_ = std::numbers::pi;
    f.m_ = m;
    f.Ks_ = std::move(Ks);
    f.bound_N_ = Vec(dim, 0.0);
    for (int i = 0; i < dim; ++i) f.bound_N_[i] = 1.0 + 1.0 / f.Ks_[i];
    f.lipschitz_ = m / kmin;
    return f;
}

void FeedbackSpec::eval(double t, const double* x, double* out) const {
    switch (kind_) {
        case FeedbackKind::Goodwin: {
            const double u = pow_mono(std::fabs(x[dim_ - 1]), m_);
            out[0] = V_ / (K_ + std::sin(t) + u);
            for (int i = 1; i < dim_; ++i) out[i] = 0.0;
            return;
        }
        case FeedbackKind::OthmerTyson: {
            const double u = pow_mono(std::fabs(x[dim_ - 1]), m_);
            out[0] = (k0_ * (1.0 + u)) / (K_ + std::sin(t) + u);
            for (int i = 1; i < dim_; ++i) out[i] = 0.0;
            return;
        }
        case FeedbackKind::Competitive: {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s = s + pow_mono(std::fabs(x[j]), m_);
            const double a = std::fabs(std::sin(t));
            for (int i = 0; i < dim_; ++i) out[i] = a + 1.0 / (Ks_[i] + s);
            return;
        }
        case FeedbackKind::Custom: {
            for (int i = 0; i < dim_; ++i) out[i] = exprs_[i].eval(t, x);
            return;
        }
    }
}

Vec FeedbackSpec::eval(double t, const Vec& x) const {
    Vec out(dim_);
    eval(t, x.data(), out.data());
    return out;
}

void FeedbackSpec::eval_batch(double t, const double* x, double* out, std::size_t n) const {
    const auto& kt = kernels::active_table();
    const bool integral_m = is_small_integer(m_);
    switch (kind_) {
        case FeedbackKind::Goodwin:
            if (integral_m) {
                kt.goodwin_feedback(V_, K_ + std::sin(t), static_cast<int>(m_),
                                    x + static_cast<std::size_t>(dim_ - 1) * n, out, n);
                std::fill(out + n, out + static_cast<std::size_t>(dim_) * n, 0.0);
                return;
            }
            break;
        case FeedbackKind::OthmerTyson:
            if (integral_m) {
                kt.othmer_tyson_feedback(k0_, K_ + std::sin(t), static_cast<int>(m_),
                                         x + static_cast<std::size_t>(dim_ - 1) * n, out, n);
                std::fill(out + n, out + static_cast<std::size_t>(dim_) * n, 0.0);
                return;
            }
            break;
        case FeedbackKind::Competitive:
            if (integral_m) {
                std::vector<double> s(n);
                kt.competitive_sum(dim_, static_cast<int>(m_), x, s.data(), n, n);
                const double a = std::fabs(std::sin(t));
                for (int i = 0; i < dim_; ++i) {
                    double* row = out + static_cast<std::size_t>(i) * n;
                    const double Ki = Ks_[i];
                    for (std::size_t p = 0; p < n; ++p) row[p] = a + 1.0 / (Ki + s[p]);
                }
                return;
            }
            break;
        case FeedbackKind::Custom:
            break;
    }
    // Non-integral exponent or custom trees: plain per-path loop.
    std::vector<double> xp(dim_), hp(dim_);
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < dim_; ++c) xp[c] = x[static_cast<std::size_t>(c) * n + p];
        eval(t, xp.data(), hp.data());
        for (int c = 0; c < dim_; ++c) out[static_cast<std::size_t>(c) * n + p] = hp[c];
    }
}

MonotoneDirection FeedbackSpec::structural_direction() const {
    switch (kind_) {
        case FeedbackKind::Goodwin: return MonotoneDirection::AntiOrderPreserving;
        case FeedbackKind::OthmerTyson: return MonotoneDirection::OrderPreserving;
        case FeedbackKind::Competitive: return MonotoneDirection::AntiOrderPreserving;
        case FeedbackKind::Custom: return MonotoneDirection::Mixed;
    }
    return MonotoneDirection::Mixed;
}

namespace {

// Axis values for the validation lattice: 0 plus log-spaced magnitudes up
// to the configured radius.
std::vector<double> lattice_axis(double max_radius) {
    std::vector<double> v{0.0};
    for (double r = 1e-3; r <= max_radius * (1.0 + 1e-12); r *= 10.0) v.push_back(r);
    return v;
}

std::vector<Vec> build_lattice(int dim, const FeedbackSampleConfig& cfg) {
    const std::vector<double> axis = lattice_axis(cfg.max_radius);
    const std::size_t per_axis = axis.size();
    double total = 1.0;
    for (int i = 0; i < dim; ++i) total *= static_cast<double>(per_axis);
    std::vector<Vec> pts;
    if (total <= static_cast<double>(cfg.max_lattice_points)) {
        pts.reserve(static_cast<std::size_t>(total));
        Vec x(dim, 0.0);
        std::vector<std::size_t> idx(dim, 0);
        for (;;) {
            for (int i = 0; i < dim; ++i) x[i] = axis[idx[i]];
            pts.push_back(x);
            int c = 0;
            while (c < dim && ++idx[c] == per_axis) idx[c++] = 0;
            if (c == dim) break;
        }
    } else {
        CounterRng rng(cfg.seed, /*stream=*/7);
        pts.reserve(cfg.max_lattice_points);
        for (std::size_t k = 0; k < cfg.max_lattice_points; ++k) {
            Vec x(dim);
            for (int i = 0; i < dim; ++i)
                x[i] = axis[static_cast<std::size_t>(rng.next_uniform() * per_axis) % per_axis];
            pts.push_back(std::move(x));
        }
    }
    return pts;
}

}  // namespace

FeedbackSpec FeedbackSpec::custom(int dim, std::vector<FeedbackExpr> exprs, double period,
                                  const FeedbackSampleConfig& cfg) {
    require(dim >= 1, "custom feedback: dimension must be >= 1");
    require(static_cast<int>(exprs.size()) == dim,
            "custom feedback: need one expression per component");
    require(period > 0.0, "custom feedback: period must be positive");

    FeedbackSpec f;
    f.kind_ = FeedbackKind::Custom;
    f.dim_ = dim;
    f.period_ = period;
    f.exprs_ = std::move(exprs);

    const std::vector<Vec> lattice = build_lattice(dim, cfg);
    Vec sup(dim, 0.0);
    double max_slope = 0.0;

    auto eval_checked = [&](double t, const Vec& x, int i) {
        double v;
        try {
            v = f.exprs_[i].eval(t, x);
        } catch (const EvalError& e) {
            throw Error(std::string("custom feedback failed validation: ") + e.what());
        }
        if (!std::isfinite(v))
            throw Error("custom feedback failed validation: non-finite value of h" +
                        std::to_string(i + 1) + " at sampled point");
        return v;
    };

    // Finiteness, nonnegativity, sup and slope estimates over the lattice.
    for (int ti = 0; ti < cfg.t_samples; ++ti) {
        const double t = period * static_cast<double>(ti) / cfg.t_samples;
        for (const Vec& x : lattice) {
            for (int i = 0; i < dim; ++i) {
                const double v = eval_checked(t, x, i);
                if (v < 0.0)
                    throw Error("custom feedback failed validation: h" +
                                std::to_string(i + 1) + " is negative at sampled point");
                sup[i] = std::max(sup[i], std::fabs(v));
                for (int j = 0; j < dim; ++j) {
                    const double step = std::max(1e-4, 1e-4 * x[j]);
                    Vec xp = x, xm = x;
                    xp[j] += step;
                    xm[j] = std::max(0.0, xm[j] - step);
                    const double den = xp[j] - xm[j];
                    if (den <= 0.0) continue;
                    const double slope =
                        (eval_checked(t, xp, i) - eval_checked(t, xm, i)) / den;
                    max_slope = std::max(max_slope, std::fabs(slope));
                }
            }
        }
    }

    // Periodicity check by sampling: |h(t,x) - h(t+T,x)| within tolerance.
    {
        CounterRng rng(cfg.seed, /*stream=*/11);
        const std::vector<double> axis = lattice_axis(cfg.max_radius);
        for (int k = 0; k < cfg.x_samples; ++k) {
            Vec x(dim);
            for (int i = 0; i < dim; ++i)
                x[i] = axis[static_cast<std::size_t>(rng.next_uniform() * axis.size()) %
                            axis.size()];
            for (int ti = 0; ti < cfg.t_samples; ++ti) {
                const double t = period * static_cast<double>(ti) / cfg.t_samples;
                for (int i = 0; i < dim; ++i) {
                    const double a = eval_checked(t, x, i);
                    const double b = eval_checked(t + period, x, i);
                    if (std::fabs(a - b) > cfg.periodicity_tol)
                        throw Error("custom feedback failed validation: h" +
                                    std::to_string(i + 1) +
                                    " is not T-periodic at sampled point (|diff| = " +
                                    format_double(std::fabs(a - b)) + ")");
                }
            }
        }
    }

    f.bound_N_ = sup;
    for (double& v : f.bound_N_) v *= cfg.safety;
    f.lipschitz_ = max_slope * cfg.safety;
    f.bound_prov_ = Provenance::SampledEstimate;
    f.lip_prov_ = Provenance::SampledEstimate;
    return f;
}

}  // namespace rpslab

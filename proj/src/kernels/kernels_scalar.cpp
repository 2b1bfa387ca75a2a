#include <cmath>
#include <cstddef>

#include "rpslab/kernels/kernels.hpp"

// Reference kernels. The SIMD variants replicate these operation for
// operation; any change here must be mirrored there or the equivalence
// suite fails.

namespace rpslab::kernels {
namespace {

inline double powi(double x, int m) {
    double r = 1.0;
    for (int k = 0; k < m; ++k) r = r * x;
    return r;
}

void em_state_step_scalar(const double* A, int d, double dt, const double* noise,
                          const double* drift, const double* x, double* out,
                          std::size_t stride, std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < d; ++c) {
            double acc = 0.0;
            const double* arow = A + static_cast<std::size_t>(c) * d;
            for (int j = 0; j < d; ++j) acc = acc + arow[j] * x[static_cast<std::size_t>(j) * stride + p];
            const double xc = x[static_cast<std::size_t>(c) * stride + p];
            double s = xc + dt * acc;
            s = s + dt * drift[static_cast<std::size_t>(c) * stride + p];
            s = s + noise[static_cast<std::size_t>(c) * stride + p] * xc;
            out[static_cast<std::size_t>(c) * stride + p] = s;
        }
    }
}

void k_sweep_step_scalar(const double* A, int d, double dt, const double* noise,
                         const double* v, const double* x, double* out,
                         std::size_t stride, std::size_t n) {
    double tmp[kMaxDim];
    for (std::size_t p = 0; p < n; ++p) {
        for (int j = 0; j < d; ++j)
            tmp[j] = x[static_cast<std::size_t>(j) * stride + p] +
                     dt * v[static_cast<std::size_t>(j) * stride + p];
        for (int c = 0; c < d; ++c) {
            double acc = 0.0;
            const double* arow = A + static_cast<std::size_t>(c) * d;
            for (int j = 0; j < d; ++j) acc = acc + arow[j] * tmp[j];
            double s = tmp[c] + dt * acc;
            s = s + noise[static_cast<std::size_t>(c) * stride + p] * tmp[c];
            out[static_cast<std::size_t>(c) * stride + p] = s;
        }
    }
}

void noise_factors_scalar(const double* sig, int d, double dt, bool milstein,
                          const double* dW, double* out, std::size_t stride,
                          std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < d; ++c) {
            double g = 0.0;
            for (int k = 0; k < d; ++k) {
                const double s = sig[static_cast<std::size_t>(k) * d + c];
                if (s == 0.0) continue;
                g = g + s * dW[static_cast<std::size_t>(k) * stride + p];
            }
            if (milstein) {
                double corr = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double sk = sig[static_cast<std::size_t>(k) * d + c];
                    if (sk == 0.0) continue;
                    const double wk = dW[static_cast<std::size_t>(k) * stride + p];
                    for (int l = 0; l < d; ++l) {
                        const double sl = sig[static_cast<std::size_t>(l) * d + c];
                        if (sl == 0.0) continue;
                        const double wl = dW[static_cast<std::size_t>(l) * stride + p];
                        double iter = wk * wl;
                        if (k == l) iter = iter - dt;
                        corr = corr + sk * sl * iter;
                    }
                }
                g = g + 0.5 * corr;
            }
            out[static_cast<std::size_t>(c) * stride + p] = g;
        }
    }
}

void goodwin_feedback_scalar(double V, double Kt, int m, const double* x, double* out,
                             std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        const double u = powi(std::fabs(x[p]), m);
        out[p] = V / (Kt + u);
    }
}

void othmer_tyson_feedback_scalar(double k0, double Kt, int m, const double* x,
                                  double* out, std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        const double u = powi(std::fabs(x[p]), m);
        out[p] = (k0 * (1.0 + u)) / (Kt + u);
    }
}

void competitive_sum_scalar(int d, int m, const double* x, double* out,
                            std::size_t stride, std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        double s = 0.0;
        for (int c = 0; c < d; ++c)
            s = s + powi(std::fabs(x[static_cast<std::size_t>(c) * stride + p]), m);
        out[p] = s;
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t = {
        em_state_step_scalar,      k_sweep_step_scalar,
        noise_factors_scalar,      goodwin_feedback_scalar,
        othmer_tyson_feedback_scalar, competitive_sum_scalar,
        "scalar",
    };
    return t;
}

}  // namespace rpslab::kernels

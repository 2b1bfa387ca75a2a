// NEON (aarch64) variants, 2 lanes per iteration with a scalar tail.
// Same per-lane operation order as kernels_scalar.cpp; no fused ops.

#include "rpslab/kernels/kernels.hpp"

#if defined(__aarch64__)
#define RPSLAB_HAVE_NEON_BUILD 1
#include <arm_neon.h>
#else
#define RPSLAB_HAVE_NEON_BUILD 0
#endif

namespace rpslab::kernels {

#if RPSLAB_HAVE_NEON_BUILD

namespace {

constexpr std::size_t W = 2;

inline float64x2_t powi_f64(float64x2_t x, int m) {
    float64x2_t r = vdupq_n_f64(1.0);
    for (int k = 0; k < m; ++k) r = vmulq_f64(r, x);
    return r;
}

void em_state_step_neon(const double* A, int d, double dt, const double* noise,
                        const double* drift, const double* x, double* out,
                        std::size_t stride, std::size_t n) {
    const float64x2_t dtv = vdupq_n_f64(dt);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        float64x2_t xv[kMaxDim];
        for (int j = 0; j < d; ++j)
            xv[j] = vld1q_f64(x + static_cast<std::size_t>(j) * stride + p);
        for (int c = 0; c < d; ++c) {
            const double* arow = A + static_cast<std::size_t>(c) * d;
            float64x2_t acc = vdupq_n_f64(0.0);
            for (int j = 0; j < d; ++j)
                acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(arow[j]), xv[j]));
            float64x2_t s = vaddq_f64(xv[c], vmulq_f64(dtv, acc));
            s = vaddq_f64(s, vmulq_f64(dtv, vld1q_f64(drift + static_cast<std::size_t>(c) * stride + p)));
            s = vaddq_f64(s, vmulq_f64(vld1q_f64(noise + static_cast<std::size_t>(c) * stride + p), xv[c]));
            vst1q_f64(out + static_cast<std::size_t>(c) * stride + p, s);
        }
    }
    if (p < n)
        scalar_table().em_state_step(A, d, dt, noise + p, drift + p, x + p, out + p,
                                     stride, n - p);
}

void k_sweep_step_neon(const double* A, int d, double dt, const double* noise,
                       const double* v, const double* x, double* out,
                       std::size_t stride, std::size_t n) {
    const float64x2_t dtv = vdupq_n_f64(dt);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        float64x2_t tmp[kMaxDim];
        for (int j = 0; j < d; ++j) {
            const std::size_t off = static_cast<std::size_t>(j) * stride + p;
            tmp[j] = vaddq_f64(vld1q_f64(x + off), vmulq_f64(dtv, vld1q_f64(v + off)));
        }
        for (int c = 0; c < d; ++c) {
            const double* arow = A + static_cast<std::size_t>(c) * d;
            float64x2_t acc = vdupq_n_f64(0.0);
            for (int j = 0; j < d; ++j)
                acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(arow[j]), tmp[j]));
            float64x2_t s = vaddq_f64(tmp[c], vmulq_f64(dtv, acc));
            s = vaddq_f64(s, vmulq_f64(vld1q_f64(noise + static_cast<std::size_t>(c) * stride + p), tmp[c]));
            vst1q_f64(out + static_cast<std::size_t>(c) * stride + p, s);
        }
    }
    if (p < n)
        scalar_table().k_sweep_step(A, d, dt, noise + p, v + p, x + p, out + p, stride,
                                    n - p);
}

void noise_factors_neon(const double* sig, int d, double dt, bool milstein,
                        const double* dW, double* out, std::size_t stride,
                        std::size_t n) {
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        float64x2_t wv[kMaxDim];
        for (int k = 0; k < d; ++k)
            wv[k] = vld1q_f64(dW + static_cast<std::size_t>(k) * stride + p);
        for (int c = 0; c < d; ++c) {
            float64x2_t g = vdupq_n_f64(0.0);
            for (int k = 0; k < d; ++k) {
                const double s = sig[static_cast<std::size_t>(k) * d + c];
                if (s == 0.0) continue;
                g = vaddq_f64(g, vmulq_f64(vdupq_n_f64(s), wv[k]));
            }
            if (milstein) {
                float64x2_t corr = vdupq_n_f64(0.0);
                for (int k = 0; k < d; ++k) {
                    const double sk = sig[static_cast<std::size_t>(k) * d + c];
                    if (sk == 0.0) continue;
                    for (int l = 0; l < d; ++l) {
                        const double sl = sig[static_cast<std::size_t>(l) * d + c];
                        if (sl == 0.0) continue;
                        float64x2_t iter = vmulq_f64(wv[k], wv[l]);
                        if (k == l) iter = vsubq_f64(iter, vdupq_n_f64(dt));
                        corr = vaddq_f64(corr, vmulq_f64(vdupq_n_f64(sk * sl), iter));
                    }
                }
                g = vaddq_f64(g, vmulq_f64(vdupq_n_f64(0.5), corr));
            }
            vst1q_f64(out + static_cast<std::size_t>(c) * stride + p, g);
        }
    }
    if (p < n)
        scalar_table().noise_factors(sig, d, dt, milstein, dW + p, out + p, stride,
                                     n - p);
}

void goodwin_feedback_neon(double V, double Kt, int m, const double* x, double* out,
                           std::size_t n) {
    const float64x2_t Vv = vdupq_n_f64(V);
    const float64x2_t Ktv = vdupq_n_f64(Kt);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        float64x2_t u = powi_f64(vabsq_f64(vld1q_f64(x + p)), m);
        vst1q_f64(out + p, vdivq_f64(Vv, vaddq_f64(Ktv, u)));
    }
    if (p < n) scalar_table().goodwin_feedback(V, Kt, m, x + p, out + p, n - p);
}

void othmer_tyson_feedback_neon(double k0, double Kt, int m, const double* x,
                                double* out, std::size_t n) {
    const float64x2_t k0v = vdupq_n_f64(k0);
    const float64x2_t Ktv = vdupq_n_f64(Kt);
    const float64x2_t one = vdupq_n_f64(1.0);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        float64x2_t u = powi_f64(vabsq_f64(vld1q_f64(x + p)), m);
        float64x2_t num = vmulq_f64(k0v, vaddq_f64(one, u));
        vst1q_f64(out + p, vdivq_f64(num, vaddq_f64(Ktv, u)));
    }
    if (p < n) scalar_table().othmer_tyson_feedback(k0, Kt, m, x + p, out + p, n - p);
}

void competitive_sum_neon(int d, int m, const double* x, double* out,
                          std::size_t stride, std::size_t n) {
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        float64x2_t s = vdupq_n_f64(0.0);
        for (int c = 0; c < d; ++c)
            s = vaddq_f64(s, powi_f64(vabsq_f64(vld1q_f64(x + static_cast<std::size_t>(c) * stride + p)), m));
        vst1q_f64(out + p, s);
    }
    if (p < n) scalar_table().competitive_sum(d, m, x + p, out + p, stride, n - p);
}

const KernelTable neon_impl = {
    em_state_step_neon,     k_sweep_step_neon,  noise_factors_neon,
    goodwin_feedback_neon,  othmer_tyson_feedback_neon,
    competitive_sum_neon,   "neon",
};

}  // namespace

const KernelTable* neon_table() { return &neon_impl; }

#else  // !RPSLAB_HAVE_NEON_BUILD

const KernelTable* neon_table() { return nullptr; }

#endif

}  // namespace rpslab::kernels

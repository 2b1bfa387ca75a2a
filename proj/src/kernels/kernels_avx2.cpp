// AVX2 variants of the batched kernels, 4 lanes per iteration with a scalar
// tail. Per lane these perform the same IEEE operations in the same order as
// kernels_scalar.cpp (mul/add only, never FMA), so results are bit-identical.

#include "rpslab/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define RPSLAB_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define RPSLAB_HAVE_AVX2_BUILD 0
#endif

namespace rpslab::kernels {

#if RPSLAB_HAVE_AVX2_BUILD

namespace {

constexpr std::size_t W = 4;

inline __m256d abs_pd(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(v, mask);
}

inline __m256d powi_pd(__m256d x, int m) {
    __m256d r = _mm256_set1_pd(1.0);
    for (int k = 0; k < m; ++k) r = _mm256_mul_pd(r, x);
    return r;
}

void em_state_step_avx2(const double* A, int d, double dt, const double* noise,
                        const double* drift, const double* x, double* out,
                        std::size_t stride, std::size_t n) {
    const __m256d dtv = _mm256_set1_pd(dt);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        __m256d xv[kMaxDim];
        for (int j = 0; j < d; ++j)
            xv[j] = _mm256_loadu_pd(x + static_cast<std::size_t>(j) * stride + p);
        for (int c = 0; c < d; ++c) {
            const double* arow = A + static_cast<std::size_t>(c) * d;
            __m256d acc = _mm256_setzero_pd();
            for (int j = 0; j < d; ++j)
                acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(arow[j]), xv[j]));
            __m256d s = _mm256_add_pd(xv[c], _mm256_mul_pd(dtv, acc));
            s = _mm256_add_pd(
                s, _mm256_mul_pd(dtv, _mm256_loadu_pd(drift + static_cast<std::size_t>(c) * stride + p)));
            s = _mm256_add_pd(
                s, _mm256_mul_pd(_mm256_loadu_pd(noise + static_cast<std::size_t>(c) * stride + p), xv[c]));
            _mm256_storeu_pd(out + static_cast<std::size_t>(c) * stride + p, s);
        }
    }
    if (p < n)
        scalar_table().em_state_step(A, d, dt, noise + p, drift + p, x + p, out + p,
                                     stride, n - p);
}

void k_sweep_step_avx2(const double* A, int d, double dt, const double* noise,
                       const double* v, const double* x, double* out,
                       std::size_t stride, std::size_t n) {
    const __m256d dtv = _mm256_set1_pd(dt);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        __m256d tmp[kMaxDim];
        for (int j = 0; j < d; ++j) {
            const std::size_t off = static_cast<std::size_t>(j) * stride + p;
            tmp[j] = _mm256_add_pd(_mm256_loadu_pd(x + off),
                                   _mm256_mul_pd(dtv, _mm256_loadu_pd(v + off)));
        }
        for (int c = 0; c < d; ++c) {
            const double* arow = A + static_cast<std::size_t>(c) * d;
            __m256d acc = _mm256_setzero_pd();
            for (int j = 0; j < d; ++j)
                acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(arow[j]), tmp[j]));
            __m256d s = _mm256_add_pd(tmp[c], _mm256_mul_pd(dtv, acc));
            s = _mm256_add_pd(
                s, _mm256_mul_pd(_mm256_loadu_pd(noise + static_cast<std::size_t>(c) * stride + p), tmp[c]));
            _mm256_storeu_pd(out + static_cast<std::size_t>(c) * stride + p, s);
        }
    }
    if (p < n)
        scalar_table().k_sweep_step(A, d, dt, noise + p, v + p, x + p, out + p, stride,
                                    n - p);
}

void noise_factors_avx2(const double* sig, int d, double dt, bool milstein,
                        const double* dW, double* out, std::size_t stride,
                        std::size_t n) {
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        __m256d wv[kMaxDim];
        for (int k = 0; k < d; ++k)
            wv[k] = _mm256_loadu_pd(dW + static_cast<std::size_t>(k) * stride + p);
        for (int c = 0; c < d; ++c) {
            __m256d g = _mm256_setzero_pd();
            for (int k = 0; k < d; ++k) {
                const double s = sig[static_cast<std::size_t>(k) * d + c];
                if (s == 0.0) continue;
                g = _mm256_add_pd(g, _mm256_mul_pd(_mm256_set1_pd(s), wv[k]));
            }
            if (milstein) {
                __m256d corr = _mm256_setzero_pd();
                for (int k = 0; k < d; ++k) {
                    const double sk = sig[static_cast<std::size_t>(k) * d + c];
                    if (sk == 0.0) continue;
                    for (int l = 0; l < d; ++l) {
                        const double sl = sig[static_cast<std::size_t>(l) * d + c];
                        if (sl == 0.0) continue;
                        __m256d iter = _mm256_mul_pd(wv[k], wv[l]);
                        if (k == l) iter = _mm256_sub_pd(iter, _mm256_set1_pd(dt));
                        corr = _mm256_add_pd(corr,
                                             _mm256_mul_pd(_mm256_set1_pd(sk * sl), iter));
                    }
                }
                g = _mm256_add_pd(g, _mm256_mul_pd(_mm256_set1_pd(0.5), corr));
            }
            _mm256_storeu_pd(out + static_cast<std::size_t>(c) * stride + p, g);
        }
    }
    if (p < n)
        scalar_table().noise_factors(sig, d, dt, milstein, dW + p, out + p, stride,
                                     n - p);
}

void goodwin_feedback_avx2(double V, double Kt, int m, const double* x, double* out,
                           std::size_t n) {
    const __m256d Vv = _mm256_set1_pd(V);
    const __m256d Ktv = _mm256_set1_pd(Kt);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        __m256d u = powi_pd(abs_pd(_mm256_loadu_pd(x + p)), m);
        _mm256_storeu_pd(out + p, _mm256_div_pd(Vv, _mm256_add_pd(Ktv, u)));
    }
    if (p < n) scalar_table().goodwin_feedback(V, Kt, m, x + p, out + p, n - p);
}

void othmer_tyson_feedback_avx2(double k0, double Kt, int m, const double* x,
                                double* out, std::size_t n) {
    const __m256d k0v = _mm256_set1_pd(k0);
    const __m256d Ktv = _mm256_set1_pd(Kt);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        __m256d u = powi_pd(abs_pd(_mm256_loadu_pd(x + p)), m);
        __m256d num = _mm256_mul_pd(k0v, _mm256_add_pd(one, u));
        _mm256_storeu_pd(out + p, _mm256_div_pd(num, _mm256_add_pd(Ktv, u)));
    }
    if (p < n) scalar_table().othmer_tyson_feedback(k0, Kt, m, x + p, out + p, n - p);
}

void competitive_sum_avx2(int d, int m, const double* x, double* out,
                          std::size_t stride, std::size_t n) {
    std::size_t p = 0;
    for (; p + W <= n; p += W) {
        __m256d s = _mm256_setzero_pd();
        for (int c = 0; c < d; ++c) {
            __m256d u =
                powi_pd(abs_pd(_mm256_loadu_pd(x + static_cast<std::size_t>(c) * stride + p)), m);
            s = _mm256_add_pd(s, u);
        }
        _mm256_storeu_pd(out + p, s);
    }
    if (p < n) scalar_table().competitive_sum(d, m, x + p, out + p, stride, n - p);
}

const KernelTable avx2_impl = {
    em_state_step_avx2,      k_sweep_step_avx2,  noise_factors_avx2,
    goodwin_feedback_avx2,   othmer_tyson_feedback_avx2,
    competitive_sum_avx2,    "avx2",
};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

}  // namespace

const KernelTable* avx2_table() { return cpu_has_avx2() ? &avx2_impl : nullptr; }

#else  // !RPSLAB_HAVE_AVX2_BUILD

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace rpslab::kernels

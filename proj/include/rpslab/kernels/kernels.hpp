#pragma once

#include <cstddef>
#include <string>

namespace rpslab::kernels {

// Batched inner-loop kernels. One lane = one sample path. All state blocks
// are structure-of-arrays: component c of lane p lives at [c*stride + p].
//
// Every kernel has a scalar reference implementation and SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected once at startup. Lanes never
// interact and no fused multiply-adds are emitted, so the variants produce
// bit-identical results; the equivalence suite asserts this.
//
// em_state_step:
//   out[c][p] = x[c][p] + dt*sum_j A[c][j]*x[j][p] + dt*drift[c][p]
//             + noise[c][p]*x[c][p]
// k_sweep_step:   (one step of the running convolution J <- M*(J + v*dt))
//   tmp[j][p] = x[j][p] + dt*v[j][p]
//   out[c][p] = tmp[c][p] + dt*sum_j A[c][j]*tmp[j][p] + noise[c][p]*tmp[c][p]
// noise_factors:  (per-step multiplicative noise factor, sig[k*d+c] = sigma_k^c)
//   out[c][p] = sum_k sig[k][c]*dW[k][p]
//   plus, when milstein, 0.5*sum_{k,l} sig[k][c]*sig[l][c]*
//                        (dW[k][p]*dW[l][p] - (k==l)*dt)
// goodwin_feedback:       out[p] = V / (Kt + |x[p]|^m)
// othmer_tyson_feedback:  out[p] = k0*(1 + |x[p]|^m) / (Kt + |x[p]|^m)
// competitive_sum:        out[p] = sum_c |x[c][p]|^m
// (Kt bundles K + sin t, which is lane-independent.)
//
// Exponents are integral in the feedback kernels; non-integral exponents
// take the scalar std::pow path in FeedbackSpec instead.
//
// x and out must not alias in the stepping kernels.

struct KernelTable {
    void (*em_state_step)(const double* A, int d, double dt, const double* noise,
                          const double* drift, const double* x, double* out,
                          std::size_t stride, std::size_t n);
    void (*k_sweep_step)(const double* A, int d, double dt, const double* noise,
                         const double* v, const double* x, double* out,
                         std::size_t stride, std::size_t n);
    void (*noise_factors)(const double* sig, int d, double dt, bool milstein,
                          const double* dW, double* out, std::size_t stride,
                          std::size_t n);
    void (*goodwin_feedback)(double V, double Kt, int m, const double* x, double* out,
                             std::size_t n);
    void (*othmer_tyson_feedback)(double k0, double Kt, int m, const double* x,
                                  double* out, std::size_t n);
    void (*competitive_sum)(int d, int m, const double* x, double* out,
                            std::size_t stride, std::size_t n);
    const char* name;
};

/// Largest system dimension the batched kernels accept.
inline constexpr int kMaxDim = 64;

const KernelTable& scalar_table();

/// AVX2 / NEON tables; nullptr when the build or the CPU lacks them.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// Table picked at startup: best available, unless the environment variable
/// RPSLAB_SIMD (= scalar | avx2 | neon | auto) says otherwise.
const KernelTable& active_table();

/// Name of the active table ("scalar", "avx2", "neon").
std::string active_name();

}  // namespace rpslab::kernels

#include <cstdlib>
#include <cstring>

#include "rpslab/kernels/kernels.hpp"

namespace rpslab::kernels {

namespace {

const KernelTable* pick() {
    const char* env = std::getenv("RPSLAB_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_table();
        if (std::strcmp(env, "avx2") == 0 && avx2_table() != nullptr) return avx2_table();
        if (std::strcmp(env, "neon") == 0 && neon_table() != nullptr) return neon_table();
        // fall through to auto on unknown/unavailable values
    }
    if (const KernelTable* t = avx2_table()) return t;
    if (const KernelTable* t = neon_table()) return t;
    return &scalar_table();
}

}  // namespace

const KernelTable& active_table() {
    static const KernelTable* table = pick();
    return *table;
}

std::string active_name() { return active_table().name; }

}  // namespace rpslab::kernels

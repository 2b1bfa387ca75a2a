#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rpslab/common.hpp"

namespace rpslab {

/// Uniform grid over [i_min*dt, i_max*dt]. Times are handled as signed
/// cell indices; every shift and window operation is integer arithmetic.
struct GridSpec {
    double dt = 0.0;
    std::int64_t i_min = 0;  // < 0
    std::int64_t i_max = 0;  // >= 0
    int dim = 0;

    double time(std::int64_t i) const { return static_cast<double>(i) * dt; }
    std::int64_t cells() const { return i_max - i_min; }
    void validate() const;

    /// Snaps a time to the nearest grid index; throws unless the time is a
    /// grid multiple to within 1e-9 relative.
    std::int64_t index_of(double t) const;
};

/// Two-sided d-dimensional Brownian path on a uniform grid.
///
/// The increment of component k over cell i is a pure function of
/// (seed, k, i) via the counter RNG, so regenerating the path on a wider
/// grid reproduces every overlapping increment bit for bit. Cumulative
/// values are anchored at node 0 (W(0) = 0 exactly) and accumulated
/// outward from it.
///
/// A WienerGrid is an immutable shared core plus a view offset: shifting
/// by s returns a view with offset advanced by s/dt cells whose value at
/// node i reads V[i + o] - V[o] off the same arrays. Increment slices of a
/// shifted view alias the core storage, which is what makes the shift and
/// period identities downstream exact rather than approximate.
class WienerGrid {
public:
    WienerGrid() = default;

    static WienerGrid sample(const GridSpec& spec, std::uint64_t seed);

    /// Same seed, wider bounds; overlapping cells are bit-identical.
    WienerGrid extended(std::int64_t new_i_min, std::int64_t new_i_max) const;

    /// theta_s with s = cells*dt. Shares the core.
    WienerGrid shifted(std::int64_t cells) const;
    /// theta_s for a time shift; errors when s is not a grid multiple.
    WienerGrid shifted_time(double s) const;

    /// W_k at view node i: value(k, 0) == 0 exactly.
    double value(int k, std::int64_t i) const;

    /// Increment over view cell [i, i+1).
    double increment(int k, std::int64_t i) const;

    /// Stored increments for cells [a, b), contiguous view into the core.
    std::span<const double> increments_on(int k, std::int64_t a, std::int64_t b) const;

    /// Valid node range of this view (inclusive).
    std::int64_t first_node() const;
    std::int64_t last_node() const;

    const GridSpec& spec() const;  // of the underlying core (absolute indexing)
    std::uint64_t seed() const;
    std::int64_t offset() const { return offset_; }
    bool valid() const { return core_ != nullptr; }

    /// Binary path dump (header + per-component increments, little endian).
    void dump(const std::string& path) const;
    static WienerGrid load(const std::string& path);

    /// Process-wide cap used by sample(); throws "grid too large" beyond it.
    static void set_memory_budget(std::size_t bytes);

private:
    struct Core;
    std::shared_ptr<const Core> core_;
    std::int64_t offset_ = 0;
};

/// Increments for an ensemble of paths with consecutive seeds
/// (seed(p) = base_seed + p), stored time-major as [cell][component][path]
/// so the batched kernels stream straight through a time slice.
/// Path p of the ensemble carries exactly the same increments as
/// WienerGrid::sample(spec, base_seed + p).
class EnsembleWiener {
public:
    EnsembleWiener(const GridSpec& spec, std::uint64_t base_seed, std::size_t n_paths);

    const GridSpec& spec() const { return spec_; }
    std::size_t n_paths() const { return n_; }
    std::uint64_t seed_of(std::size_t p) const { return base_seed_ + p; }
    std::uint64_t base_seed() const { return base_seed_; }

    /// Pointer to the [component][path] block of increments for cell i;
    /// component k of path p is at [k*n_paths() + p].
    const double* cell(std::int64_t i) const;

    double increment(std::size_t p, int k, std::int64_t i) const {
        return cell(i)[static_cast<std::size_t>(k) * n_ + p];
    }

private:
    GridSpec spec_;
    std::uint64_t base_seed_ = 0;
    std::size_t n_ = 0;
    std::vector<double> inc_;
};

}  // namespace rpslab

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rpslab/common.hpp"

namespace rpslab {

using Vec = std::vector<double>;

/// Row-major dense d x d matrix. d stays small (system dimension),
/// so no attempt is made at blocking or expression templates.
class Mat {
public:
    Mat() : d_(0) {}
    explicit Mat(int d, double fill = 0.0) : d_(d), a_(static_cast<std::size_t>(d) * d, fill) {}

    static Mat identity(int d) {
        Mat m(d);
        for (int i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return d_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    const double* data() const { return a_.data(); }
    double* data() { return a_.data(); }

    Vec apply(const Vec& x) const {
        Vec y(d_, 0.0);
        for (int i = 0; i < d_; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d_; ++j) acc += (*this)(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

    Mat mul(const Mat& b) const {
        Mat c(d_);
        for (int i = 0; i < d_; ++i)
            for (int k = 0; k < d_; ++k) {
                const double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < d_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    /// max |a_ij|
    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::fabs(v));
        return m;
    }

    bool lower_triangular(double tol = 0.0) const {
        for (int i = 0; i < d_; ++i)
            for (int j = i + 1; j < d_; ++j)
                if (std::fabs((*this)(i, j)) > tol) return false;
        return true;
    }

private:
    int d_;
    std::vector<double> a_;
};

inline double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double max_abs(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

/// Solves L y = b for lower-triangular L by forward substitution.
Vec solve_lower_triangular(const Mat& L, const Vec& b);

/// Solves A y = b by LU with partial pivoting. Throws Error on a
/// singular pivot; the flow matrices this is used on are never
/// expected to be singular.
Vec solve_lu(const Mat& A, const Vec& b);

/// y = A^{-1} b choosing the cheap route when A is lower triangular.
Vec solve(const Mat& A, const Vec& b);

}  // namespace rpslab

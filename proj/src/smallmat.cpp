#include "rpslab/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rpslab {

Vec solve_lower_triangular(const Mat& L, const Vec& b) {
    const int d = L.dim();
    Vec y(d, 0.0);
    for (int i = 0; i < d; ++i) {
        double acc = b[i];
        for (int j = 0; j < i; ++j) acc -= L(i, j) * y[j];
        if (L(i, i) == 0.0) throw Error("singular triangular matrix");
        y[i] = acc / L(i, i);
    }
    return y;
}

Vec solve_lu(const Mat& A, const Vec& b) {
    const int d = A.dim();
    Mat lu = A;
    std::vector<int> piv(d);
    std::iota(piv.begin(), piv.end(), 0);
    for (int k = 0; k < d; ++k) {
        int p = k;
        double best = std::fabs(lu(k, k));
        for (int i = k + 1; i < d; ++i) {
            double v = std::fabs(lu(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best == 0.0) throw Error("singular matrix in LU solve");
        if (p != k) {
            for (int j = 0; j < d; ++j) std::swap(lu(k, j), lu(p, j));
            std::swap(piv[k], piv[p]);
        }
        for (int i = k + 1; i < d; ++i) {
            lu(i, k) /= lu(k, k);
            const double f = lu(i, k);
            for (int j = k + 1; j < d; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    Vec y(d);
    for (int i = 0; i < d; ++i) {
        double acc = b[piv[i]];
        for (int j = 0; j < i; ++j) acc -= lu(i, j) * y[j];
        y[i] = acc;
    }
    for (int i = d - 1; i >= 0; --i) {
        double acc = y[i];
        for (int j = i + 1; j < d; ++j) acc -= lu(i, j) * y[j];
        y[i] = acc / lu(i, i);
    }
    return y;
}

Vec solve(const Mat& A, const Vec& b) {
    if (A.lower_triangular()) return solve_lower_triangular(A, b);
    return solve_lu(A, b);
}

}  // namespace rpslab

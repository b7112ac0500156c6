#pragma once

// Small-matrix singular values via the Jacobi eigenvalue iteration on
// M M^T (test-only oracle).

#include <cmath>
#include <vector>

namespace tl {

// Symmetric Jacobi sweep; a is n x n row-major, overwritten. Returns
// eigenvalues (unsorted).
inline std::vector<double> sym_eigenvalues(std::vector<double> a, int n) {
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (std::fabs(apq) < 1e-30) continue;
                double app = a[p * n + p], aqq = a[q * n + q];
                double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
                double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) eig[static_cast<size_t>(i)] = a[i * n + i];
    return eig;
}

inline std::vector<double> singular_values(const std::vector<float>& m, int rows, int cols) {
    std::vector<double> gram(static_cast<size_t>(rows) * rows, 0.0);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < rows; ++j) {
            double acc = 0.0;
            for (int k = 0; k < cols; ++k)
                acc += static_cast<double>(m[static_cast<size_t>(i) * cols + k]) *
                       static_cast<double>(m[static_cast<size_t>(j) * cols + k]);
            gram[static_cast<size_t>(i) * rows + j] = acc;
        }
    std::vector<double> eig = sym_eigenvalues(std::move(gram), rows);
    for (auto& e : eig) e = std::sqrt(std::max(0.0, e));
    return eig;
}

inline int numerical_rank(const std::vector<float>& m, int rows, int cols, double rel_tol = 1e-5) {
    std::vector<double> sv = singular_values(m, rows, cols);
    double mx = 0.0;
    for (double s : sv) mx = std::max(mx, s);
    if (mx == 0.0) return 0;
    int rank = 0;
    for (double s : sv)
        if (s > rel_tol * mx) ++rank;
    return rank;
}

}  // namespace tl

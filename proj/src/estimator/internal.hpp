#pragma once

#include "favis/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace favis::detail {

/// Reorders columns by descending sum of squares and flips each column so its
/// largest-magnitude entry is positive (first such entry on ties). Phi, when
/// given, receives the matching row/column permutation and sign flips.
inline void canonicalize_columns(Matrix& loadings, Matrix* phi = nullptr) {
    const auto q = loadings.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Vector ss = loadings.colwise().squaredNorm().transpose();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ss(a) > ss(b); });

    Matrix sorted(loadings.rows(), q);
    Vector sign(q);
    for (Eigen::Index k = 0; k < q; ++k) {
        const auto col = loadings.col(order[static_cast<std::size_t>(k)]);
        Eigen::Index arg = 0;
        col.cwiseAbs().maxCoeff(&arg);
        sign(k) = col(arg) < 0.0 ? -1.0 : 1.0;
        sorted.col(k) = sign(k) * col;
    }
    loadings = std::move(sorted);

    if (phi != nullptr) {
        Matrix reordered(q, q);
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = 0; b < q; ++b) {
                reordered(a, b) = sign(a) * sign(b) *
                                  (*phi)(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
            }
        }
        *phi = std::move(reordered);
    }
}

/// log|Sigma| + tr(S Sigma^-1) - log|S| - p; NaN unless both matrices are positive definite.
inline double ml_discrepancy(const Matrix& corr, const Matrix& implied) {
    Eigen::LLT<Matrix> s_llt(corr);
    Eigen::LLT<Matrix> sigma_llt(implied);
    if (s_llt.info() != Eigen::Success || sigma_llt.info() != Eigen::Success) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const auto log_det = [](const Eigen::LLT<Matrix>& llt) {
        return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    };
    const double trace = sigma_llt.solve(corr).trace();
    return log_det(sigma_llt) + trace - log_det(s_llt) - static_cast<double>(corr.rows());
}

}  // namespace favis::detail

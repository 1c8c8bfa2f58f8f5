#include "favis/error.hpp"
#include "favis/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace favis {

namespace {

constexpr double kCorrelationTolerance = 1e-8;

// Column sd at or below this (relative to the column's scale) counts as constant.
constexpr double kConstantColumnRatio = 1e-12;

struct ColumnMoments {
    Vector mean;
    Vector sd;
};

ColumnMoments column_moments(const Dataset& data) {
    const Matrix& x = data.values();
    const double n = static_cast<double>(x.rows());
    ColumnMoments m;
    m.mean = x.colwise().mean().transpose();
    m.sd = Vector(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double ss = (x.col(j).array() - m.mean(j)).square().sum();
        m.sd(j) = std::sqrt(ss / (n - 1.0));
        const double scale = std::max(1.0, x.col(j).cwiseAbs().maxCoeff());
        if (!(m.sd(j) > kConstantColumnRatio * scale)) {
            throw Error(ErrorCode::ConstantColumn, "column '" + data.variable_names()[static_cast<std::size_t>(j)] +
                                                       "' has zero standard deviation");
        }
    }
    return m;
}

}  // namespace

Dataset standardize(const Dataset& data) {
    const auto moments = column_moments(data);
    Matrix z = data.values();
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        z.col(j) = (z.col(j).array() - moments.mean(j)) / moments.sd(j);
        // Second centering pass removes the residual rounding in the mean.
        z.col(j).array() -= z.col(j).mean();
    }
    return Dataset(std::move(z), data.variable_names());
}

Matrix correlation_matrix(const Dataset& data) {
    const auto moments = column_moments(data);
    const Matrix centered = data.values().rowwise() - moments.mean.transpose();
    Matrix cross = centered.transpose() * centered;
    const Vector scale = cross.diagonal().cwiseSqrt();
    Matrix corr(cross.rows(), cross.cols());
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
        corr(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double r = std::clamp(cross(i, j) / (scale(i) * scale(j)), -1.0, 1.0);
            corr(i, j) = r;
            corr(j, i) = r;
        }
    }
    return corr;
}

void validate_correlation(const Matrix& corr) {
    const auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidCorrelation, why); };
    if (corr.rows() < 1 || corr.rows() != corr.cols()) {
        fail("correlation matrix must be square and non-empty");
    }
    if (!corr.allFinite()) {
        fail("correlation matrix has non-finite entries");
    }
    if ((corr - corr.transpose()).cwiseAbs().maxCoeff() > kCorrelationTolerance) {
        fail("correlation matrix is not symmetric");
    }
    if ((corr.diagonal().array() - 1.0).abs().maxCoeff() > kCorrelationTolerance) {
        fail("correlation matrix must have unit diagonal");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eigen(corr, Eigen::EigenvaluesOnly);
    if (eigen.eigenvalues().minCoeff() < -kCorrelationTolerance) {
        fail("correlation matrix is not positive semi-definite");
    }
}

}  // namespace favis

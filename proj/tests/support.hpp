#pragma once

#include "favis/model.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace favis::fixtures {

/// Four variables, two factors: v1=(0.8,0.1), v2=(0.7,0.6), v3=(0.1,0.9), v4=(0.6,0.7).
inline FactorModel canonical_model() {
    FactorModelParts parts;
    parts.loadings = Matrix(4, 2);
    parts.loadings << 0.8, 0.1, 0.7, 0.6, 0.1, 0.9, 0.6, 0.7;
    parts.variable_names = {"v1", "v2", "v3", "v4"};
    parts.factor_names = {"f1", "f2"};
    return FactorModel(std::move(parts));
}

/// v1, v2 -> fear; v3, v4 -> optimism; v2 also arousal.
inline Codebook canonical_codebook() {
    return Codebook({{"v1", {"I feel afraid", {"fear"}}},
                     {"v2", {"I feel tense", {"fear", "arousal"}}},
                     {"v3", {"Things will work out", {"optimism"}}},
                     {"v4", {"I look forward", {"optimism"}}}});
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    return m;
}

inline FactorModel loadings_model(Matrix loadings) {
    FactorModelParts parts;
    parts.loadings = std::move(loadings);
    return FactorModel(std::move(parts));
}

/// Unrotated model with communalities in [0.2, 0.8] and psi = 1 - communality.
inline FactorModel random_valid_model(Eigen::Index p, Eigen::Index q, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> h2(0.2, 0.8);
    Matrix lambda = random_matrix(p, q, rng);
    Vector psi(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double target = h2(rng);
        lambda.row(i) *= std::sqrt(target) / lambda.row(i).norm();
        psi(i) = 1.0 - target;
    }
    FactorModelParts parts;
    parts.loadings = std::move(lambda);
    parts.unique_variances = std::move(psi);
    return FactorModel(std::move(parts));
}

/// Random correlation matrix from a random sample covariance.
inline Matrix random_correlation(Eigen::Index p, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index n = 3 * p + 5;
    Matrix x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
    // Mix columns so the spectrum is spread out.
    x = x * random_matrix(p, p, rng);
    Matrix cov = x.transpose() * x;
    const Vector d = cov.diagonal().cwiseSqrt().cwiseInverse();
    Matrix corr = d.asDiagonal() * cov * d.asDiagonal();
    corr = 0.5 * (corr + corr.transpose());
    corr.diagonal().setOnes();
    return corr;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("favis-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] std::filesystem::path file(const std::string& name) const { return path_ / name; }
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace favis::fixtures

#include "favis/error.hpp"
#include "favis/estimator.hpp"
#include "internal.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace favis {

namespace {

constexpr int kMaxHalvings = 40;

struct CriterionValue {
    double value = 0.0;
    Matrix gradient;  // d value / d L
};

using Criterion = std::function<CriterionValue(const Matrix&)>;

CriterionValue varimax_value(const Matrix& l) {
    const Matrix squared = l.cwiseAbs2();
    const Matrix centered = squared.rowwise() - squared.colwise().mean();
    return {-0.25 * centered.squaredNorm(), -l.cwiseProduct(centered)};
}

CriterionValue oblimin_value(const Matrix& l, double gamma) {
    const auto p = l.rows();
    const auto q = l.cols();
    const Matrix squared = l.cwiseAbs2();
    // Row-wise sum of the other columns' squared loadings.
    Matrix x = (squared.rowwise().sum() * Eigen::RowVectorXd::Ones(q)) - squared;
    if (gamma != 0.0) {
        x = x.rowwise() - (gamma / static_cast<double>(p)) * x.colwise().sum();
    }
    return {0.25 * squared.cwiseProduct(x).sum(), l.cwiseProduct(x)};
}

struct RotationRun {
    Matrix transform;
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

Matrix polar_factor(const Matrix& x) {
    Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

// Armijo test, except that once the promised decrease is below rounding level of
// the criterion a shrinking projected gradient is taken as progress instead.
bool acceptable(double value, double trial_value, double promised, double gradient_norm, double trial_gradient_norm) {
    const double noise = 1e-14 * std::max(1.0, std::abs(value));
    if (promised > noise) {
        return trial_value < value - promised;
    }
    return trial_value <= value + noise && trial_gradient_norm < gradient_norm;
}

// Gradient projection on the orthogonal group (Jennrich 2001): L = A T.
RotationRun orthogonal_gp(const Matrix& a, Matrix t, const Criterion& criterion, const RotationOptions& options) {
    const auto projected_gradient = [](const Matrix& transform, const Matrix& g) {
        const Matrix m = transform.transpose() * g;
        return (g - transform * (0.5 * (m + m.transpose()))).eval();
    };

    RotationRun run;
    auto current = criterion(a * t);
    Matrix projected = projected_gradient(t, a.transpose() * current.gradient);
    double step = 1.0;
    for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
        const double s = projected.norm();
        if (s < options.tolerance) {
            run.converged = true;
            break;
        }
        run.iterations = iteration + 1;
        step *= 2.0;
        Matrix trial_t;
        Matrix trial_projected;
        CriterionValue trial;
        bool accepted = false;
        for (int halving = 0; halving < kMaxHalvings; ++halving, step *= 0.5) {
            trial_t = polar_factor(t - step * projected);
            trial = criterion(a * trial_t);
            trial_projected = projected_gradient(trial_t, a.transpose() * trial.gradient);
            if (acceptable(current.value, trial.value, 0.5 * s * s * step, s, trial_projected.norm())) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
        t = std::move(trial_t);
        current = std::move(trial);
        projected = std::move(trial_projected);
    }
    run.transform = std::move(t);
    run.value = current.value;
    return run;
}

// Oblique gradient projection (Jennrich 2002): T has unit-length columns,
// L = A T^-T and Phi = T^T T.
RotationRun oblique_gp(const Matrix& a, Matrix t, const Criterion& criterion, const RotationOptions& options) {
    const auto evaluate = [&](const Matrix& transform, Matrix& projected) {
        const Matrix inverse = transform.inverse();
        const Matrix l = a * inverse.transpose();
        auto value = criterion(l);
        const Matrix g = -(l.transpose() * value.gradient * inverse).transpose();
        const Vector column_dots = transform.cwiseProduct(g).colwise().sum().transpose();
        projected = g - transform * column_dots.asDiagonal();
        return value;
    };

    RotationRun run;
    Matrix projected;
    auto current = evaluate(t, projected);
    double step = 1.0;
    for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
        const double s = projected.norm();
        if (s < options.tolerance) {
            run.converged = true;
            break;
        }
        run.iterations = iteration + 1;
        step *= 2.0;
        Matrix trial_t;
        Matrix trial_projected;
        CriterionValue trial;
        bool accepted = false;
        for (int halving = 0; halving < kMaxHalvings; ++halving, step *= 0.5) {
            trial_t = t - step * projected;
            const Vector column_norms = trial_t.colwise().norm().transpose();
            trial_t = trial_t * column_norms.cwiseInverse().asDiagonal();
            if (!(std::abs(trial_t.determinant()) > 1e-12)) {
                continue;
            }
            trial = evaluate(trial_t, trial_projected);
            if (acceptable(current.value, trial.value, 0.5 * s * s * step, s, trial_projected.norm())) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
        t = std::move(trial_t);
        projected = std::move(trial_projected);
        current = std::move(trial);
    }
    run.transform = std::move(t);
    run.value = current.value;
    return run;
}

void validate_options(const RotationOptions& options) {
    if (options.max_iterations < 1 || options.restarts < 1 || !(options.tolerance > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "rotation options need positive iterations, restarts and tolerance");
    }
}

// Returns true when the model can be rotated; a single factor is passed through.
bool check_rotatable(const FactorModel& model) {
    if (model.rotation().kind != RotationKind::none) {
        throw Error(ErrorCode::AlreadyRotated, "model is already rotated (" +
                                                   std::string(to_string(model.rotation().kind)) + ")");
    }
    return model.factor_count() >= 2;
}

FactorModel single_factor_passthrough(const FactorModel& model, Rotation rotation) {
    auto parts = model.parts();
    parts.rotation = rotation;
    parts.warnings.push_back("SingleFactor: rotation of a one-factor solution is a no-op");
    return FactorModel(std::move(parts));
}

template <typename Solver>
RotationRun best_of_restarts(const Matrix& a, const Criterion& criterion, const RotationOptions& options,
                             Solver solver, bool orthogonal) {
    const auto q = a.cols();
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    RotationRun best;
    int last_iterations = 0;
    for (int restart = 0; restart < options.restarts; ++restart) {
        Matrix start = Matrix::Identity(q, q);
        if (restart > 0) {
            Matrix z(q, q);
            for (Eigen::Index j = 0; j < q; ++j) {
                for (Eigen::Index i = 0; i < q; ++i) {
                    z(i, j) = normal(rng);
                }
            }
            if (orthogonal) {
                Eigen::HouseholderQR<Matrix> qr(z);
                start = qr.householderQ() * Matrix::Identity(q, q);
            } else {
                start = z * z.colwise().norm().cwiseInverse().asDiagonal();
            }
        }
        auto run = solver(a, start, criterion, options);
        last_iterations = run.iterations;
        if (run.converged && run.value < best.value) {
            best = std::move(run);
        }
    }
    if (!best.converged) {
        throw Error(ErrorCode::NotConverged, "rotation did not converge from any of " +
                                                 std::to_string(options.restarts) + " starts (last run: " +
                                                 std::to_string(last_iterations) + " iterations)");
    }
    return best;
}

}  // namespace

double varimax_criterion(const Matrix& loadings) {
    return -4.0 * varimax_value(loadings).value / static_cast<double>(loadings.rows());
}

double oblimin_criterion(const Matrix& loadings, double gamma) {
    return oblimin_value(loadings, gamma).value;
}

FactorModel rotate_varimax(const FactorModel& model, const RotationOptions& options) {
    validate_options(options);
    if (!check_rotatable(model)) {
        return single_factor_passthrough(model, Rotation::varimax());
    }

    const Matrix& lambda = model.loadings();
    Vector row_norm = Vector::Ones(lambda.rows());
    if (options.kaiser_normalize) {
        row_norm = lambda.rowwise().norm();
        for (auto& h : row_norm) {
            if (!(h > 0.0)) {
                h = 1.0;
            }
        }
    }
    const Matrix normalized = row_norm.cwiseInverse().asDiagonal() * lambda;
    const auto best = best_of_restarts(normalized, varimax_value, options, orthogonal_gp, true);

    auto parts = model.parts();
    parts.loadings = row_norm.asDiagonal() * (normalized * best.transform);
    detail::canonicalize_columns(parts.loadings);
    parts.factor_correlations = Matrix::Identity(lambda.cols(), lambda.cols());
    parts.rotation = Rotation::varimax();
    return FactorModel(std::move(parts));
}

FactorModel rotate_oblimin(const FactorModel& model, double gamma, const RotationOptions& options) {
    validate_options(options);
    if (!std::isfinite(gamma)) {
        throw Error(ErrorCode::InvalidArgument, "oblimin gamma must be finite");
    }
    if (!check_rotatable(model)) {
        return single_factor_passthrough(model, Rotation::oblimin(gamma));
    }

    const Matrix& lambda = model.loadings();
    const Criterion criterion = [gamma](const Matrix& l) { return oblimin_value(l, gamma); };
    const auto best = best_of_restarts(lambda, criterion, options, oblique_gp, false);

    auto parts = model.parts();
    parts.loadings = lambda * best.transform.inverse().transpose();
    Matrix phi = best.transform.transpose() * best.transform;
    detail::canonicalize_columns(parts.loadings, &phi);
    phi = 0.5 * (phi + phi.transpose());
    phi.diagonal().setOnes();
    parts.factor_correlations = std::move(phi);
    parts.rotation = Rotation::oblimin(gamma);
    return FactorModel(std::move(parts));
}

}  // namespace favis

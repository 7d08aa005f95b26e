#include "urag/strategies/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "urag/core/errors.hpp"

namespace urag::strategies {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct ComponentDensity {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_det = 0.0;
    bool ok = false;
};

ComponentDensity prepare(const Eigen::MatrixXd& cov) {
    ComponentDensity d;
    d.llt.compute(cov);
    if (d.llt.info() != Eigen::Success) return d;
    double log_det = 0.0;
    const auto& L = d.llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        double diag = L(i, i);
        if (!(diag > 0.0)) return d;
        log_det += 2.0 * std::log(diag);
    }
    d.log_det = log_det;
    d.ok = true;
    return d;
}

double log_gauss(const ComponentDensity& d, const Eigen::VectorXd& mean,
                 const Eigen::VectorXd& x) {
    Eigen::VectorXd diff = x - mean;
    Eigen::VectorXd solved = d.llt.solve(diff);
    double quad = diff.dot(solved);
    auto dim = static_cast<double>(x.size());
    return -0.5 * (dim * kLog2Pi + d.log_det + quad);
}

int full_param_count(int k, int d) { return (k - 1) + k * d + k * d * (d + 1) / 2; }
int diag_param_count(int k, int d) { return (k - 1) + k * d + k * d; }

// k-means++ style seeding with explicit draws.
std::vector<Eigen::VectorXd> seed_means(const Eigen::MatrixXd& X, int k, core::Rng& rng) {
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<Eigen::VectorXd> means;
    means.push_back(X.row(static_cast<Eigen::Index>(core::bounded(rng, n))).transpose());
    std::vector<double> dist2(n, 0.0);
    while (means.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& m : means) {
                double d2 = (X.row(static_cast<Eigen::Index>(i)).transpose() - m).squaredNorm();
                best = std::min(best, d2);
            }
            dist2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = core::bounded(rng, n);
        } else {
            double r = core::uniform01(rng) * total;
            pick = n - 1;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        means.push_back(X.row(static_cast<Eigen::Index>(pick)).transpose());
    }
    return means;
}

struct EmResult {
    GmmModel model;
    bool needs_diagonal = false;
};

EmResult run_em(const Eigen::MatrixXd& X, int k, const std::vector<Eigen::VectorXd>& init_means,
                bool diagonal, const GmmOptions& options) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();

    GmmModel model;
    model.weights.assign(static_cast<std::size_t>(k), 1.0 / k);
    model.means = init_means;
    Eigen::MatrixXd base_cov;
    {
        Eigen::VectorXd mean = X.colwise().mean();
        Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
        base_cov = (centered.transpose() * centered) / std::max<double>(1.0, double(n - 1));
        if (diagonal) base_cov = base_cov.diagonal().asDiagonal();
        base_cov += options.ridge * Eigen::MatrixXd::Identity(d, d);
    }
    model.covariances.assign(static_cast<std::size_t>(k), base_cov);
    model.diagonal_fallback = diagonal;

    Eigen::MatrixXd log_resp(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        // E step
        std::vector<ComponentDensity> densities(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            densities[j] = prepare(model.covariances[j]);
            if (!densities[j].ok) return {model, true};
        }
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double row_max = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                double lp = std::log(std::max(model.weights[j], 1e-300)) +
                            log_gauss(densities[j], model.means[j], X.row(i).transpose());
                log_resp(i, j) = lp;
                row_max = std::max(row_max, lp);
            }
            double sum = 0.0;
            for (int j = 0; j < k; ++j) sum += std::exp(log_resp(i, j) - row_max);
            double log_norm = row_max + std::log(sum);
            ll += log_norm;
            for (int j = 0; j < k; ++j) log_resp(i, j) -= log_norm;
        }
        model.log_likelihood = ll;

        if (std::abs(ll - prev_ll) < options.tolerance * (1.0 + std::abs(ll))) break;
        prev_ll = ll;

        // M step
        for (int j = 0; j < k; ++j) {
            double nk = 0.0;
            Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
            for (Eigen::Index i = 0; i < n; ++i) {
                double r = std::exp(log_resp(i, j));
                nk += r;
                mu += r * X.row(i).transpose();
            }
            if (nk < 1e-12) {
                // starved component; re-center on the worst-fit point
                model.weights[j] = 1e-12;
                continue;
            }
            mu /= nk;
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
            for (Eigen::Index i = 0; i < n; ++i) {
                double r = std::exp(log_resp(i, j));
                Eigen::VectorXd diff = X.row(i).transpose() - mu;
                cov += r * (diff * diff.transpose());
            }
            cov /= nk;
            if (diagonal) cov = cov.diagonal().asDiagonal();
            cov += options.ridge * Eigen::MatrixXd::Identity(d, d);
            model.weights[j] = nk / static_cast<double>(n);
            model.means[j] = mu;
            model.covariances[j] = cov;
        }
        double wsum = 0.0;
        for (double w : model.weights) wsum += w;
        for (auto& w : model.weights) w /= wsum;
    }

    model.parameter_count = diagonal ? diag_param_count(k, static_cast<int>(d))
                                     : full_param_count(k, static_cast<int>(d));
    return {model, false};
}

}  // namespace

double bic(std::size_t n, int parameter_count, double log_likelihood) {
    return std::log(static_cast<double>(n)) * parameter_count - 2.0 * log_likelihood;
}

GmmModel fit_gmm(const Eigen::MatrixXd& points, int k, core::Rng& rng,
                 const GmmOptions& options) {
    if (points.rows() < 1) throw core::ArgumentError("fit_gmm: no points");
    if (k < 1) throw core::ArgumentError("fit_gmm: k must be >= 1");
    if (points.rows() < k) throw core::ArgumentError("fit_gmm: fewer points than components");

    GmmModel best;
    bool have_best = false;
    for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
        auto means = seed_means(points, k, rng);
        EmResult result = run_em(points, k, means, /*diagonal=*/false, options);
        if (result.needs_diagonal) {
            result = run_em(points, k, means, /*diagonal=*/true, options);
            if (result.needs_diagonal) continue;  // hopeless init
        }
        if (!have_best || result.model.log_likelihood > best.log_likelihood) {
            best = std::move(result.model);
            have_best = true;
        }
    }
    if (!have_best)
        throw core::StrategyError("fit_gmm: EM failed to produce a valid model for k=" +
                                  std::to_string(k));
    return best;
}

GmmSelection select_components_bic(const Eigen::MatrixXd& points, int k_max, core::Rng& rng,
                                   const GmmOptions& options) {
    if (k_max < 1) throw core::ArgumentError("select_components_bic: k_max must be >= 1");
    k_max = std::min<int>(k_max, static_cast<int>(points.rows()));

    GmmSelection selection;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
        GmmModel model = fit_gmm(points, k, rng, options);
        double value = bic(static_cast<std::size_t>(points.rows()), model.parameter_count,
                           model.log_likelihood);
        selection.bic_values.push_back(value);
        if (value < best_bic) {
            best_bic = value;
            selection.k = k;
            selection.model = std::move(model);
        }
    }
    return selection;
}

Eigen::MatrixXd responsibilities(const GmmModel& model, const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    const int k = model.components();
    std::vector<ComponentDensity> densities(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        densities[j] = prepare(model.covariances[j]);
        if (!densities[j].ok)
            throw core::StrategyError("responsibilities: covariance not positive-definite");
    }
    Eigen::MatrixXd resp(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            double lp = std::log(std::max(model.weights[j], 1e-300)) +
                        log_gauss(densities[j], model.means[j], points.row(i).transpose());
            resp(i, j) = lp;
            row_max = std::max(row_max, lp);
        }
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(resp(i, j) - row_max);
        for (int j = 0; j < k; ++j) resp(i, j) = std::exp(resp(i, j) - row_max) / sum;
    }
    return resp;
}

Eigen::MatrixXd pca_reduce(const Eigen::MatrixXd& points, int target_dim) {
    if (target_dim < 1) throw core::ArgumentError("pca_reduce: target_dim must be >= 1");
    if (points.cols() <= target_dim) return points;
    Eigen::VectorXd mean = points.colwise().mean();
    Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) /
                          std::max<double>(1.0, double(points.rows() - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw core::StrategyError("pca_reduce: eigendecomposition failed");
    // eigenvalues ascending; take the trailing target_dim columns
    Eigen::MatrixXd basis = solver.eigenvectors().rightCols(target_dim).rowwise().reverse();
    return centered * basis;
}

}  // namespace urag::strategies

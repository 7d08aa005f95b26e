#pragma once

#include <Eigen/Dense>
#include <vector>

#include "urag/core/rng.hpp"

namespace urag::strategies {

struct GmmOptions {
    int max_iterations = 200;
    double tolerance = 1e-7;
    double ridge = 1e-6;
    int restarts = 3;
};

struct GmmModel {
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances;
    double log_likelihood = 0.0;
    int parameter_count = 0;
    bool diagonal_fallback = false;

    int components() const { return static_cast<int>(weights.size()); }
};

// BIC = ln(N) * p - 2 * ln(L_hat)
double bic(std::size_t n, int parameter_count, double log_likelihood);

// Full-covariance EM; re-fits with diagonal covariance + ridge when a
// component covariance loses positive-definiteness.
GmmModel fit_gmm(const Eigen::MatrixXd& points, int k, core::Rng& rng,
                 const GmmOptions& options = {});

struct GmmSelection {
    int k = 1;
    GmmModel model;
    std::vector<double> bic_values;  // indexed by k-1
};

// Fits k = 1..k_max and keeps the BIC minimizer.
GmmSelection select_components_bic(const Eigen::MatrixXd& points, int k_max, core::Rng& rng,
                                   const GmmOptions& options = {});

// Posterior responsibilities, n x k, rows sum to 1.
Eigen::MatrixXd responsibilities(const GmmModel& model, const Eigen::MatrixXd& points);

// Principal-components projection onto the top target_dim directions;
// identity when the data dimension is already <= target_dim.
Eigen::MatrixXd pca_reduce(const Eigen::MatrixXd& points, int target_dim);

}  // namespace urag::strategies

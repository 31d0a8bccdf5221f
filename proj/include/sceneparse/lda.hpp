#pragma once

#include <Eigen/Dense>
#include <vector>

namespace sceneparse {

/// Fisher discriminant projection to N_c - 1 dimensions.
struct LdaModel {
    Eigen::MatrixXd W;             // (N_c - 1) x n_x, unit-norm rows
    Eigen::VectorXd feature_mean;  // n_x
    Eigen::VectorXd eigenvalues;   // descending, one per row of W
    int label_count = 0;
    double ridge = 0.0;

    Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

/// Within/between-class scatter matrices of a labeled sample.
struct ScatterMatrices {
    Eigen::MatrixXd within;
    Eigen::MatrixXd between;
    Eigen::VectorXd mean;
};

ScatterMatrices compute_scatter(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                int label_count);

/// Fit on rows of X. Solves the ridge-regularized generalized eigenproblem
/// S_b v = lambda (S_w + ridge I) v via Cholesky reduction to a symmetric
/// eigensolve. ridge < 0 selects the default 1e-4 * trace(S_w) / n_x.
LdaModel fit_lda(const Eigen::MatrixXd& X, const std::vector<int>& labels, int label_count,
                 double ridge = -1.0);

}  // namespace sceneparse

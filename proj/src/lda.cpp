#include "sceneparse/lda.hpp"

#include <algorithm>
#include <numeric>

#include "sceneparse/image.hpp"

namespace sceneparse {

Eigen::VectorXd LdaModel::project(const Eigen::VectorXd& x) const {
    if (x.size() != feature_mean.size()) throw InvalidInput("project: dimension mismatch");
    return W * (x - feature_mean);
}

ScatterMatrices compute_scatter(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                int label_count) {
    const Eigen::Index n = X.rows(), d = X.cols();
    if (n != static_cast<Eigen::Index>(labels.size()))
        throw InvalidInput("compute_scatter: label count mismatch");
    if (label_count < 2) throw InvalidInput("compute_scatter: need at least 2 classes");

    std::vector<Eigen::Index> class_sizes(label_count, 0);
    for (int l : labels) {
        if (l < 0 || l >= label_count) throw InvalidInput("compute_scatter: label out of range");
        ++class_sizes[l];
    }
    for (int c = 0; c < label_count; ++c)
        if (class_sizes[c] == 0) throw InvalidInput("compute_scatter: empty class");

    Eigen::MatrixXd class_means = Eigen::MatrixXd::Zero(label_count, d);
    for (Eigen::Index i = 0; i < n; ++i) class_means.row(labels[i]) += X.row(i);
    for (int c = 0; c < label_count; ++c) class_means.row(c) /= static_cast<double>(class_sizes[c]);

    ScatterMatrices s;
    s.mean = X.colwise().mean().transpose();
    s.within = Eigen::MatrixXd::Zero(d, d);
    s.between = Eigen::MatrixXd::Zero(d, d);

    // S_w accumulated via centered rows per class, S_b via class means.
    Eigen::MatrixXd centered = X;
    for (Eigen::Index i = 0; i < n; ++i) centered.row(i) -= class_means.row(labels[i]);
    s.within.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    s.within.triangularView<Eigen::StrictlyUpper>() = s.within.transpose();

    for (int c = 0; c < label_count; ++c) {
        Eigen::VectorXd diff = class_means.row(c).transpose() - s.mean;
        s.between.noalias() += static_cast<double>(class_sizes[c]) * diff * diff.transpose();
    }
    return s;
}

LdaModel fit_lda(const Eigen::MatrixXd& X, const std::vector<int>& labels, int label_count,
                 double ridge) {
    const Eigen::Index d = X.cols();
    if (X.rows() < label_count) throw InvalidInput("fit_lda: fewer samples than classes");
    ScatterMatrices s = compute_scatter(X, labels, label_count);

    if (ridge < 0) ridge = 1e-4 * s.within.trace() / static_cast<double>(d);
    Eigen::MatrixXd regularized = s.within;
    regularized.diagonal().array() += std::max(ridge, 1e-12);

    // (S_w + rI) = L L^T; eigenvectors of L^-1 S_b L^-T map back via L^-T.
    Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    if (llt.info() != Eigen::Success) throw std::runtime_error("fit_lda: Cholesky failed");
    Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(s.between);
    C = L.triangularView<Eigen::Lower>().solve(C.transpose()).eval();
    C = 0.5 * (C + C.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success) throw std::runtime_error("fit_lda: eigensolve failed");

    const int out_dim = label_count - 1;
    if (out_dim > d) throw InvalidInput("fit_lda: feature dimension below N_c - 1");
    LdaModel model;
    model.W.resize(out_dim, d);
    model.eigenvalues.resize(out_dim);
    model.feature_mean = s.mean;
    model.label_count = label_count;
    model.ridge = ridge;

    // SelfAdjointEigenSolver sorts ascending; take the top out_dim.
    for (int k = 0; k < out_dim; ++k) {
        Eigen::Index col = d - 1 - k;
        model.eigenvalues[k] = eig.eigenvalues()[col];
        Eigen::VectorXd w =
            L.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors().col(col));
        double norm = w.norm();
        if (norm > 0) w /= norm;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (w[i] != 0.0) {
                if (w[i] < 0) w = -w;
                break;
            }
        }
        model.W.row(k) = w.transpose();
    }
    return model;
}

}  // namespace sceneparse

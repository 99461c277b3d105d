#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "error.hpp"
#include "problem_model.hpp"
#include "truncation.hpp"

namespace mseq {

/// Singular values below this multiple of s_1 count as zero.
inline constexpr double kRankTolerance = 1e-12;

/// Thin SVD T = U diag(s) V^T restricted to the numerical rank.
/// Sign convention: the first non-negligible entry of every v_j is positive.
struct OperatorModel {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd singular_values;  ///< s_1 >= ... >= s_r > 0
    Eigen::MatrixXd left;             ///< m x r, columns u_j
    Eigen::MatrixXd right;            ///< n x r, columns v_j
    std::size_t rank = 0;

    std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(matrix.cols()); }
    /// Dimension of the kernel discarded by the reconstruction.
    std::size_t kernel_dimension() const { return cols() - rank; }

    SingularSpectrum spectrum() const {
        return SingularSpectrum::explicit_values(
            std::vector<double>(singular_values.data(), singular_values.data() + singular_values.size()));
    }
};

inline OperatorModel decompose(const Eigen::MatrixXd& matrix) {
    if (matrix.size() == 0) throw InvalidInput("decompose: empty matrix");
    if (!matrix.allFinite()) throw InvalidInput("decompose: matrix has non-finite entries");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();  // already sorted decreasing

    OperatorModel model;
    model.matrix = matrix;
    const double s1 = s.size() > 0 ? s(0) : 0.0;
    std::size_t r = 0;
    while (r < static_cast<std::size_t>(s.size()) && s1 > 0.0 && s(static_cast<Eigen::Index>(r)) > kRankTolerance * s1) ++r;
    model.rank = r;
    const auto ri = static_cast<Eigen::Index>(r);
    model.singular_values = s.head(ri);
    model.left = svd.matrixU().leftCols(ri);
    model.right = svd.matrixV().leftCols(ri);

    for (Eigen::Index j = 0; j < ri; ++j) {
        auto v = model.right.col(j);
        const double scale = v.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::abs(v(i)) > 1e-12 * scale) {
                if (v(i) < 0.0) {
                    model.right.col(j) *= -1.0;
                    model.left.col(j) *= -1.0;
                }
                break;
            }
        }
    }
    return model;
}

/// z_j = <y, u_j> / s_j for j <= rank.
inline Observations to_sequence(const Eigen::VectorXd& y, const OperatorModel& model) {
    if (model.rank == 0) throw DegenerateOperator("to_sequence: operator has rank 0");
    if (static_cast<std::size_t>(y.size()) != model.rows())
        throw InvalidInput("to_sequence: data has length " + std::to_string(y.size()) + ", operator has " +
                           std::to_string(model.rows()) + " rows");
    const Eigen::VectorXd proj = model.left.transpose() * y;
    Observations obs;
    obs.provenance = Provenance::mapped_from_operator;
    obs.values.resize(model.rank);
    for (std::size_t j = 0; j < model.rank; ++j)
        obs.values[j] = proj(static_cast<Eigen::Index>(j)) / model.singular_values(static_cast<Eigen::Index>(j));
    return obs;
}

/// Spectral cut-off: x_hat = sum_{j<=D} z_j v_j.
inline Eigen::VectorXd reconstruct(const Eigen::VectorXd& y, const OperatorModel& model, std::size_t level) {
    if (level > model.rank)
        throw OutOfRange("reconstruct: D = " + std::to_string(level) + " exceeds rank " + std::to_string(model.rank));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.cols()));
    if (level == 0) return x;
    const auto z = to_sequence(y, model);
    for (std::size_t j = 0; j < level; ++j) x += z.values[j] * model.right.col(static_cast<Eigen::Index>(j));
    return x;
}

/// n x n midpoint discretization of (Tx)(t) = int_0^t x: entries 1/n on and below the diagonal.
inline Eigen::MatrixXd make_integration_operator(std::size_t n) {
    if (n < 2) throw InvalidParameter("integration operator needs n >= 2");
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) t(i, j) = 1.0 / static_cast<double>(n);
    return t;
}

} // namespace mseq

#include "lmcar/pca.hpp"

#include <Eigen/Eigenvalues>

#include "lmcar/errors.hpp"

namespace lmcar {

Eigen::MatrixXd pca_basis(const Eigen::MatrixXd& features, int d) {
    const int dims = static_cast<int>(features.cols());
    if (d < 0 || d > dims) {
        throw ValidationError("pca: requested dimension " + std::to_string(d) +
                              " outside [0, " + std::to_string(dims) + "]");
    }
    if (d == 0) return Eigen::MatrixXd::Identity(dims, dims);
    if (features.rows() == 0) throw ValidationError("pca: empty feature matrix");

    const Eigen::RowVectorXd mean = features.colwise().mean();
    const Eigen::MatrixXd centered = features.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(features.rows());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw NumericError("pca: eigendecomposition failed");
    }

    // Eigenvalues come out ascending; take the top d in descending order.
    Eigen::MatrixXd basis(d, dims);
    for (int r = 0; r < d; ++r) {
        Eigen::VectorXd axis = solver.eigenvectors().col(dims - 1 - r);
        for (int j = 0; j < dims; ++j) {
            if (std::abs(axis(j)) > 1e-12) {
                if (axis(j) < 0.0) axis = -axis;
                break;
            }
        }
        basis.row(r) = axis.transpose();
    }
    return basis;
}

} // namespace lmcar

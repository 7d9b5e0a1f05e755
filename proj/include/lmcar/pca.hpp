#pragma once

#include <Eigen/Dense>

namespace lmcar {

/// Top-d principal directions of the rows of `features`, returned as a
/// d x D matrix whose rows are the axes, ordered by decreasing variance.
/// Sign convention: the first coordinate of each axis with magnitude
/// above 1e-12 is made positive, so the basis is reproducible.
/// d == 0 is the no-projection sentinel and returns the D x D identity.
Eigen::MatrixXd pca_basis(const Eigen::MatrixXd& features, int d);

} // namespace lmcar

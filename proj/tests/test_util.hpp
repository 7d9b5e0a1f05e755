#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lmcar/dataset.hpp"
#include "lmcar/rng.hpp"

namespace testutil {

/// Fresh empty directory under the system temp root.
inline std::filesystem::path make_clean_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

/// In-memory dataset with the requested class sizes on one affordance.
/// Feature values are seeded Gaussian noise so distances are generic.
inline lmcar::Dataset toy_dataset(int positives, int negatives, int dims,
                                  std::uint64_t seed = 1) {
    lmcar::Dataset ds;
    const int n = positives + negatives;
    ds.features.resize(n, dims);
    ds.labels.resize(n, 1);
    ds.affordance_names = {"target"};
    ds.groups = {{"all", 0, dims, false}};
    lmcar::Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        ds.labels(i, 0) = i < positives ? 1 : 0;
        ds.instance_ids.push_back("inst_" + std::to_string(i));
        for (int j = 0; j < dims; ++j) {
            ds.features(i, j) = rng.next_normal();
        }
    }
    for (int j = 0; j < dims; ++j) {
        ds.dimension_names.push_back("dim_" + std::to_string(j));
    }
    return ds;
}

/// Deterministic random orthogonal matrix (QR of a Gaussian matrix with
/// a positive-diagonal sign fix).
inline Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
    lmcar::Rng rng(seed);
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            m(r, c) = rng.next_normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < n; ++c) {
        if (r(c, c) < 0.0) {
            q.col(c) = -q.col(c);
        }
    }
    return q;
}

} // namespace testutil

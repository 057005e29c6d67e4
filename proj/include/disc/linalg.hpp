#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace disc::linalg {

/// Orthonormal basis of the span of the columns of `vectors`, built with
/// modified Gram-Schmidt (two passes). Each column is normalized before it is
/// orthogonalized; columns whose residual falls below `drop_tol` are dropped.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& vectors, double drop_tol = 1e-10);

/// Orthonormal basis of the orthogonal complement of span(q), where q has
/// orthonormal columns. Result is h x (h - q.cols()).
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& q);

/// Appends `v` to the orthonormal column set `q` if its residual after
/// projection exceeds `drop_tol` (relative to |v|). Returns true if appended.
bool append_orthonormal(Eigen::MatrixXd& q, Eigen::Index& used, const Eigen::VectorXd& v,
                        double drop_tol = 1e-10);

/// v - q q^T v, applied twice for stability.
void project_out_basis(const Eigen::MatrixXd& q, Eigen::Index used, Eigen::VectorXd& v);

/// Largest eigenvalue of a symmetric PSD operator given by `apply`, estimated
/// with Lanczos (full reorthogonalization). Returns a lower bound that is
/// accurate to ~1e-10 relative once `steps` exceeds the number of distinct
/// eigenvalue clusters.
double lanczos_max_eig(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
                       Eigen::Index dim, int steps, std::uint64_t seed);

/// Smallest eigenvalue of a dense symmetric matrix (full decomposition).
double min_eig(const Eigen::MatrixXd& m);
double max_eig(const Eigen::MatrixXd& m);

/// Spectral projection onto the PSD cone (negative eigenvalues clipped).
Eigen::MatrixXd psd_part(const Eigen::MatrixXd& m);

/// Negative part: m - psd_part(m).
Eigen::MatrixXd nsd_part(const Eigen::MatrixXd& m);

}  // namespace disc::linalg

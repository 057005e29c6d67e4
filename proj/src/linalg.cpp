#include "disc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace disc::linalg {

void project_out_basis(const Eigen::MatrixXd& q, Eigen::Index used, Eigen::VectorXd& v) {
  if (used == 0) return;
  const auto block = q.leftCols(used);
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd c = block.transpose() * v;
    v.noalias() -= block * c;
  }
}

bool append_orthonormal(Eigen::MatrixXd& q, Eigen::Index& used, const Eigen::VectorXd& v,
                        double drop_tol) {
  const double norm0 = v.norm();
  if (norm0 == 0.0) return false;
  Eigen::VectorXd r = v / norm0;
  project_out_basis(q, used, r);
  const double res = r.norm();
  if (res < drop_tol) return false;
  if (used == q.cols()) q.conservativeResize(Eigen::NoChange, std::max<Eigen::Index>(4, 2 * q.cols()));
  q.col(used++) = r / res;
  return true;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& vectors, double drop_tol) {
  Eigen::MatrixXd q(vectors.rows(), std::min(vectors.rows(), vectors.cols()));
  Eigen::Index used = 0;
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    if (used == vectors.rows()) break;
    append_orthonormal(q, used, vectors.col(c), drop_tol);
  }
  return q.leftCols(used);
}

Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& q) {
  const Eigen::Index h = q.rows();
  const Eigen::Index w = q.cols();
  if (w == 0) return Eigen::MatrixXd::Identity(h, h);
  if (w >= h) return Eigen::MatrixXd(h, 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(h, h);
  return full.rightCols(h - w);
}

double lanczos_max_eig(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
                       Eigen::Index dim, int steps, std::uint64_t seed) {
  if (dim == 0) return 0.0;
  steps = static_cast<int>(std::min<Eigen::Index>(steps, dim));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd basis(dim, steps);
  Eigen::VectorXd alpha(steps), beta(steps);
  Eigen::VectorXd v(dim), w(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = gauss(rng);
  v.normalize();
  int k = 0;
  for (; k < steps; ++k) {
    basis.col(k) = v;
    apply(v, w);
    alpha(k) = v.dot(w);
    // full reorthogonalization keeps the Ritz values honest
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = basis.leftCols(k + 1).transpose() * w;
      w.noalias() -= basis.leftCols(k + 1) * c;
    }
    const double b = w.norm();
    beta(k) = b;
    if (b < 1e-12 * std::max(1.0, std::abs(alpha(k)))) {
      ++k;
      break;
    }
    v = w / b;
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = alpha(i);
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eig(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Eigen::MatrixXd psd_part(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd nsd_part(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMin(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace disc::linalg

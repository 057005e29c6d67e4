#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace disc {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One affine spectral-independence block: E U E^T <= factor * diag(E U E^T).
struct SdpBlock {
  SparseRows E;       ///< rows x h; rows need not be a multiple of h
  double eta = 0.25;  ///< eta_s in (0,1)
  /// r_s = max(1, ceil(rows/h)). Zero rows that would pad E up to r_s*h rows
  /// have zero diagonal and are never materialized.
  int r = 1;
  /// r/eta normally; 1/eta when the row-count factor is dropped (only useful
  /// for demonstrating that the factor is needed).
  double factor = 4.0;
};

struct SdpSpec {
  int h = 0;
  Eigen::MatrixXd W;  ///< h x dim(W), orthonormal columns
  std::vector<SdpBlock> blocks;
  double kappa = 0.25;
  double eta = 0.25;
  double delta = 0.0;   ///< dim(W)/h
  double margin = 1.0;  ///< 1 - (delta + kappa + eta + sum eta_s)
};

/// Input to build_spec. `scale_by_rows = false` drops r_s from the bound.
struct BlockInput {
  SparseRows E;
  double eta = 0.25;
  bool scale_by_rows = true;
};

/// Orthonormalizes W (MGS, drops residuals below 1e-10) and records delta,
/// r_s and the margin. Throws InputError on bad dimensions or parameters.
SdpSpec build_spec(int h, const Eigen::MatrixXd& W_vectors, std::vector<BlockInput> blocks,
                   double kappa, double eta);

struct BlockResidual {
  double violation = 0.0;  ///< max(0, -lambda_min(factor*diag(M) - M)), M = E U E^T
  double ratio = 0.0;      ///< lambda_max(D^-1/2 M D^-1/2) over rows with diag > 1e-12
  double factor = 0.0;     ///< the block's bound; ratio - factor counts as a residual
};

struct ResidualReport {
  double diag_excess = 0.0;      ///< max_j (U_jj - 1)_+
  double trace_deficit = 0.0;    ///< (kappa h - Tr U)_+
  double subspace = 0.0;         ///< max_w |w^T U w|
  double psd_violation = 0.0;    ///< (-lambda_min(U))_+
  double spectral_violation = 0.0;  ///< (-lambda_min(diag(U)/eta - U))_+
  double spectral_ratio = 0.0;   ///< lambda_max(D^-1/2 U D^-1/2)
  std::vector<BlockResidual> blocks;
  double trace = 0.0;

  /// Worst violation with the trace deficit divided by h.
  double worst(int h) const;
  bool passes(int h, double tol) const;
};

/// Exact residuals from full eigendecompositions.
ResidualReport verify(const SdpSpec& spec, const Eigen::MatrixXd& U, double tol = 1e-6);

enum class SdpStage { Projector, Deflated, Penalty };
enum class InfeasibleReason { None, MarginNonPositive, IterationBudget };

std::string to_string(SdpStage s);
std::string to_string(InfeasibleReason r);

/// U = P B P^T with P an orthonormal basis of the complement of W. The
/// eigendecomposition U = V diag(lambda) V^T is kept for sampling.
struct SdpSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd B;
  Eigen::MatrixXd V;        ///< h x rank, orthonormal columns
  Eigen::VectorXd lambda;   ///< positive eigenvalues of U
  double trace = 0.0;
  int iterations = 0;
  SdpStage stage = SdpStage::Projector;
  ResidualReport residuals;  ///< filled by exact verification when it ran

  Eigen::MatrixXd U() const;
};

struct SdpOptions {
  double tol = 1e-6;
  int max_iters = 5000;
  /// Above this h the projector stage is checked with Lanczos instead of full
  /// eigendecompositions, and residuals are not recomputed exactly.
  int exact_check_max_h = 128;
  /// Skip the projector and deflation stages (exercises the fallback).
  bool penalty_only = false;
};

struct SdpResult {
  bool feasible = false;
  SdpSolution solution;       ///< valid when feasible
  InfeasibleReason reason = InfeasibleReason::None;
  ResidualReport best;        ///< best residual profile seen when infeasible
};

SdpResult solve(const SdpSpec& spec, const SdpOptions& options = {});

/// lambda_max(D^-1/2 E U E^T D^-1/2), rows with diag <= 1e-12 excluded.
double normalized_block_ratio(const SparseRows& E, const Eigen::MatrixXd& U);

}  // namespace disc

#include "disc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "disc/error.hpp"
#include "disc/linalg.hpp"

namespace disc {

namespace {

constexpr double kZeroDiag = 1e-12;
// Eigen-directions whose normalized Rayleigh quotient is above
// bound * (1 - kDeflateSlack) are removed.
constexpr double kDeflateSlack = 1e-9;
// The Lanczos estimate is a lower bound, so the cheap path only accepts
// comfortably feasible projectors.
constexpr double kLanczosAccept = 0.9;
constexpr int kLanczosSteps = 40;

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

Eigen::VectorXd inverse_or_zero(const Eigen::VectorXd& d) {
  Eigen::VectorXd out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) out(i) = d(i) > kZeroDiag ? 1.0 / d(i) : 0.0;
  return out;
}

// lambda_max and eigenvectors of Z^T diag(dinv) Z restricted to those above
// `bound`.
void collect_violations(const Eigen::MatrixXd& G, const Eigen::VectorXd& dinv, double bound,
                        std::vector<Eigen::VectorXd>& bad) {
  const Eigen::MatrixXd M = G.transpose() * dinv.asDiagonal() * G;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const double cut = bound * (1.0 - kDeflateSlack);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (es.eigenvalues()(i) > cut) bad.push_back(es.eigenvectors().col(i));
  }
}

double lanczos_ratio(const Eigen::MatrixXd& G, const Eigen::VectorXd& dinv, std::uint64_t seed) {
  Eigen::VectorXd tmp(G.rows());
  auto apply = [&](const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    tmp.noalias() = G * y;
    tmp.array() *= dinv.array();
    out.noalias() = G.transpose() * tmp;
  };
  return linalg::lanczos_max_eig(apply, G.cols(), kLanczosSteps, seed);
}

SdpSolution from_orthonormal(const Eigen::MatrixXd& P, const Eigen::MatrixXd& C,
                             const Eigen::MatrixXd& Z, SdpStage stage) {
  SdpSolution sol;
  const Eigen::VectorXd diag = Z.rowwise().squaredNorm();
  const double scale = 1.0 / diag.maxCoeff();
  sol.P = P;
  sol.B = scale * C * C.transpose();
  sol.V = Z;
  sol.lambda = Eigen::VectorXd::Constant(Z.cols(), scale);
  sol.trace = scale * static_cast<double>(Z.cols());
  sol.stage = stage;
  return sol;
}

SdpSolution from_factor(const Eigen::MatrixXd& P, const Eigen::MatrixXd& B) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (B + B.transpose()));
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    if (es.eigenvalues()(i) > 1e-12 * top) keep.push_back(i);
  }
  SdpSolution sol;
  sol.P = P;
  sol.V.resize(P.rows(), static_cast<Eigen::Index>(keep.size()));
  sol.lambda.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    sol.V.col(c) = P * es.eigenvectors().col(keep[c]);
    sol.lambda(c) = es.eigenvalues()(keep[c]);
  }
  double maxdiag = 0.0;
  for (Eigen::Index j = 0; j < sol.V.rows(); ++j) {
    maxdiag = std::max(maxdiag, (sol.V.row(j).array().square() * sol.lambda.transpose().array()).sum());
  }
  const double scale = maxdiag > 0.0 ? 1.0 / maxdiag : 1.0;
  sol.lambda *= scale;
  sol.B = scale * B;
  sol.trace = sol.lambda.sum();
  sol.stage = SdpStage::Penalty;
  return sol;
}

struct PenaltyTerms {
  double value = 0.0;
  Eigen::MatrixXd grad;  // d x d
};

// Squared distances of each constraint family to feasibility, as a convex
// function of B, with its gradient.
class PenaltyObjective {
 public:
  PenaltyObjective(const SdpSpec& spec, const Eigen::MatrixXd& P) : spec_(spec), P_(P) {
    const double shrink = 1.0 - 1e-4;
    trace_target_ = spec.kappa * spec.h * (1.0 + 1e-4);
    c0_ = shrink / spec.eta;
    for (const auto& b : spec.blocks) {
      SparseRows En = b.E;
      for (Eigen::Index i = 0; i < En.outerSize(); ++i) {
        const double nrm = En.row(i).norm();
        if (nrm > 0.0) En.row(i) /= nrm;
      }
      E_.push_back(En);
      c_.push_back(shrink * b.factor);
    }
  }

  PenaltyTerms eval(const Eigen::MatrixXd& B, bool with_grad) const {
    PenaltyTerms out;
    const Eigen::MatrixXd U = P_ * B * P_.transpose();
    const Eigen::Index h = U.rows();
    Eigen::MatrixXd GU = Eigen::MatrixXd::Zero(h, h);

    for (Eigen::Index j = 0; j < h; ++j) {
      const double e = std::max(U(j, j) - 1.0, 0.0);
      out.value += e * e;
      GU(j, j) += 2.0 * e;
    }
    const double t = std::max(trace_target_ - U.trace(), 0.0);
    out.value += t * t;
    GU.diagonal().array() -= 2.0 * t;

    auto dominance = [&](const Eigen::MatrixXd& M, double c, Eigen::MatrixXd& gM) {
      Eigen::MatrixXd L = M;
      L.diagonal() -= c * M.diagonal();
      const Eigen::MatrixXd N = linalg::psd_part(L);
      out.value += N.squaredNorm();
      gM = 2.0 * N;
      gM.diagonal() -= 2.0 * c * N.diagonal();
    };

    Eigen::MatrixXd gM;
    dominance(U, c0_, gM);
    GU += gM;
    for (std::size_t s = 0; s < E_.size(); ++s) {
      const Eigen::MatrixXd EU = E_[s] * U;
      const Eigen::MatrixXd M = EU * E_[s].transpose();
      dominance(M, c_[s], gM);
      if (with_grad) {
        const Eigen::MatrixXd gE = gM * E_[s];
        GU += E_[s].transpose() * gE;
      }
    }
    if (with_grad) out.grad = P_.transpose() * GU * P_;
    return out;
  }

 private:
  const SdpSpec& spec_;
  const Eigen::MatrixXd& P_;
  std::vector<SparseRows> E_;
  std::vector<double> c_;
  double trace_target_ = 0.0;
  double c0_ = 0.0;
};

}  // namespace

std::string to_string(SdpStage s) {
  switch (s) {
    case SdpStage::Projector:
      return "projector";
    case SdpStage::Deflated:
      return "deflated";
    case SdpStage::Penalty:
      return "penalty";
  }
  return "projector";
}

std::string to_string(InfeasibleReason r) {
  switch (r) {
    case InfeasibleReason::None:
      return "none";
    case InfeasibleReason::MarginNonPositive:
      return "margin-non-positive";
    case InfeasibleReason::IterationBudget:
      return "iteration-budget";
  }
  return "none";
}

SdpSpec build_spec(int h, const Eigen::MatrixXd& W_vectors, std::vector<BlockInput> blocks, double kappa,
                   double eta) {
  if (h < 1) throw InputError("SDP dimension must be positive");
  if (!in_open_unit(kappa)) throw InputError("kappa must lie in (0,1)");
  if (!in_open_unit(eta)) throw InputError("eta must lie in (0,1)");
  if (W_vectors.cols() > 0 && W_vectors.rows() != h) throw InputError("subspace vectors must have length h");
  SdpSpec spec;
  spec.h = h;
  spec.kappa = kappa;
  spec.eta = eta;
  spec.W = W_vectors.cols() > 0 ? linalg::orthonormal_basis(W_vectors) : Eigen::MatrixXd(h, 0);
  spec.delta = static_cast<double>(spec.W.cols()) / h;
  double eta_sum = 0.0;
  for (auto& in : blocks) {
    if (in.E.cols() != h) throw InputError("block matrix must have h columns");
    if (!in_open_unit(in.eta)) throw InputError("block eta must lie in (0,1)");
    SdpBlock b;
    b.r = std::max<int>(1, static_cast<int>((in.E.rows() + h - 1) / h));
    b.eta = in.eta;
    b.factor = in.scale_by_rows ? b.r / in.eta : 1.0 / in.eta;
    b.E = std::move(in.E);
    b.E.makeCompressed();
    eta_sum += in.eta;
    spec.blocks.push_back(std::move(b));
  }
  spec.margin = 1.0 - (spec.delta + kappa + eta + eta_sum);
  return spec;
}

double ResidualReport::worst(int h) const {
  double w = std::max({diag_excess, trace_deficit / std::max(h, 1), subspace, psd_violation, spectral_violation});
  for (const auto& b : blocks) w = std::max({w, b.violation, b.ratio - b.factor});
  return w;
}

bool ResidualReport::passes(int h, double tol) const { return worst(h) <= tol; }

double normalized_block_ratio(const SparseRows& E, const Eigen::MatrixXd& U) {
  const Eigen::MatrixXd EU = E * U;
  const Eigen::MatrixXd M = EU * E.transpose();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (M(i, i) > kZeroDiag) keep.push_back(i);
  }
  if (keep.empty()) return 0.0;
  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd N(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      N(a, b) = M(keep[a], keep[b]) / std::sqrt(M(keep[a], keep[a]) * M(keep[b], keep[b]));
    }
  }
  return linalg::max_eig(N);
}

ResidualReport verify(const SdpSpec& spec, const Eigen::MatrixXd& U_in, double /*tol*/) {
  if (U_in.rows() != spec.h || U_in.cols() != spec.h) throw InputError("U has wrong dimensions");
  const Eigen::MatrixXd U = 0.5 * (U_in + U_in.transpose());
  ResidualReport rep;
  rep.trace = U.trace();
  rep.diag_excess = std::max(0.0, (U.diagonal().array() - 1.0).maxCoeff());
  rep.trace_deficit = std::max(0.0, spec.kappa * spec.h - rep.trace);
  for (Eigen::Index c = 0; c < spec.W.cols(); ++c) {
    rep.subspace = std::max(rep.subspace, std::abs(spec.W.col(c).dot(U * spec.W.col(c))));
  }
  rep.psd_violation = std::max(0.0, -linalg::min_eig(U));

  Eigen::MatrixXd S = -U;
  S.diagonal() += U.diagonal() / spec.eta;
  rep.spectral_violation = std::max(0.0, -linalg::min_eig(S));
  {
    Eigen::VectorXd dinv_sqrt(spec.h);
    for (int j = 0; j < spec.h; ++j) dinv_sqrt(j) = U(j, j) > kZeroDiag ? 1.0 / std::sqrt(U(j, j)) : 0.0;
    rep.spectral_ratio = linalg::max_eig(dinv_sqrt.asDiagonal() * U * dinv_sqrt.asDiagonal());
  }

  for (const auto& b : spec.blocks) {
    BlockResidual br;
    br.factor = b.factor;
    const Eigen::MatrixXd EU = b.E * U;
    const Eigen::MatrixXd M = EU * b.E.transpose();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      if (M(i, i) > kZeroDiag) keep.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd L(k, k), N(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index c = 0; c < k; ++c) {
        const double m = M(keep[a], keep[c]);
        L(a, c) = -m;
        N(a, c) = m / std::sqrt(M(keep[a], keep[a]) * M(keep[c], keep[c]));
      }
      L(a, a) += b.factor * M(keep[a], keep[a]);
    }
    br.violation = std::max(0.0, -linalg::min_eig(L));
    br.ratio = linalg::max_eig(N);
    rep.blocks.push_back(br);
  }
  return rep;
}

Eigen::MatrixXd SdpSolution::U() const {
  const Eigen::MatrixXd u = V * lambda.asDiagonal() * V.transpose();
  return 0.5 * (u + u.transpose());
}

SdpResult solve(const SdpSpec& spec, const SdpOptions& options) {
  if (!(options.tol > 0.0)) throw InputError("tol must be positive");
  SdpResult result;
  const int h = spec.h;
  const bool exact = h <= options.exact_check_max_h;
  const double need_trace = spec.kappa * h;
  const auto seed = static_cast<std::uint64_t>(h) * 0x9E3779B97F4A7C15ULL + spec.W.cols();

  auto fail = [&](const ResidualReport& best) {
    result.feasible = false;
    result.reason = spec.margin <= 0.0 ? InfeasibleReason::MarginNonPositive : InfeasibleReason::IterationBudget;
    result.best = best;
    return result;
  };

  const Eigen::MatrixXd P = linalg::complement_basis(spec.W);
  const Eigen::Index d0 = P.cols();
  ResidualReport best;
  best.trace_deficit = need_trace;
  if (d0 == 0 || d0 < need_trace) return fail(best);

  const double c0 = 1.0 / spec.eta;

  // Cheap acceptance of the plain projector onto the complement of W.
  if (!exact && !options.penalty_only) {
    const Eigen::VectorXd dinv = inverse_or_zero(P.rowwise().squaredNorm());
    bool ok = lanczos_ratio(P, dinv, seed) <= kLanczosAccept * c0;
    for (std::size_t s = 0; ok && s < spec.blocks.size(); ++s) {
      const Eigen::MatrixXd G = spec.blocks[s].E * P;
      ok = lanczos_ratio(G, inverse_or_zero(G.rowwise().squaredNorm()), seed + s + 1) <=
           kLanczosAccept * spec.blocks[s].factor;
    }
    if (ok) {
      result.feasible = true;
      result.solution = from_orthonormal(P, Eigen::MatrixXd::Identity(d0, d0), P, SdpStage::Projector);
      return result;
    }
  }

  // Greedy deflation: drop every eigen-direction that violates a dominance
  // bound and repeat on the smaller subspace.
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(d0, d0);
  Eigen::MatrixXd Z = P;
  int rounds = 0;
  bool deflated_ok = false;
  while (!options.penalty_only && Z.cols() > 0 && Z.cols() >= need_trace && rounds < options.max_iters) {
    ++rounds;
    std::vector<Eigen::VectorXd> bad;
    collect_violations(Z, inverse_or_zero(Z.rowwise().squaredNorm()), c0, bad);
    for (const auto& b : spec.blocks) {
      const Eigen::MatrixXd G = b.E * Z;
      collect_violations(G, inverse_or_zero(G.rowwise().squaredNorm()), b.factor, bad);
    }
    if (bad.empty()) {
      deflated_ok = true;
      break;
    }
    Eigen::MatrixXd Y(Z.cols(), static_cast<Eigen::Index>(bad.size()));
    for (std::size_t i = 0; i < bad.size(); ++i) Y.col(static_cast<Eigen::Index>(i)) = bad[i];
    const Eigen::MatrixXd keep = linalg::complement_basis(linalg::orthonormal_basis(Y));
    Z = Z * keep;
    C = C * keep;
  }
  if (deflated_ok) {
    SdpSolution sol = from_orthonormal(P, C, Z, rounds == 1 ? SdpStage::Projector : SdpStage::Deflated);
    sol.iterations = rounds;
    if (sol.trace >= need_trace) {
      if (exact) {
        sol.residuals = verify(spec, sol.U(), options.tol);
        if (sol.residuals.passes(h, options.tol)) {
          result.feasible = true;
          result.solution = std::move(sol);
          return result;
        }
        best = sol.residuals;
      } else {
        result.feasible = true;
        result.solution = std::move(sol);
        return result;
      }
    }
  }

  // Fallback: accelerated projected gradient on the squared constraint
  // violations over B >= 0.
  PenaltyObjective obj(spec, P);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(d0, d0) * (spec.kappa * h * (1.0 + 1e-3) / d0);
  if (Z.cols() > 0 && Z.cols() < d0) {
    B = C * C.transpose() * (spec.kappa * h * (1.0 + 1e-3) / Z.cols());
  }
  Eigen::MatrixXd Yk = B;
  double tk = 1.0;
  double step = 1.0;
  int it = rounds;
  double best_worst = std::numeric_limits<double>::infinity();
  for (; it < options.max_iters; ++it) {
    const PenaltyTerms at_y = obj.eval(Yk, true);
    Eigen::MatrixXd next;
    for (int bt = 0; bt < 50; ++bt) {
      next = linalg::psd_part(Yk - step * at_y.grad);
      const Eigen::MatrixXd diff = next - Yk;
      const double quad = at_y.value + (at_y.grad.array() * diff.array()).sum() + diff.squaredNorm() / (2.0 * step);
      if (obj.eval(next, false).value <= quad + 1e-15) break;
      step *= 0.5;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    Yk = next + ((tk - 1.0) / t_next) * (next - B);
    B = next;
    tk = t_next;
    step *= 1.25;

    if (it % 10 == 0 || it + 1 == options.max_iters) {
      SdpSolution sol = from_factor(P, B);
      if (sol.lambda.size() == 0) continue;
      sol.iterations = it + 1;
      const ResidualReport rep = verify(spec, sol.U(), options.tol);
      if (rep.passes(h, options.tol)) {
        sol.residuals = rep;
        result.feasible = true;
        result.solution = std::move(sol);
        return result;
      }
      if (rep.worst(h) < best_worst) {
        best_worst = rep.worst(h);
        best = rep;
      }
    }
  }
  return fail(best);
}

}  // namespace disc

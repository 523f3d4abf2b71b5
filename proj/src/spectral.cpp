#include "nodalfreq/spectral.hpp"

#include "nodalfreq/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace nodalfreq {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Cholesky of the positive-definite -B_LL block; singular when an eliminated
// island has no path to a kept bus.
Eigen::LLT<MatrixXd> factor_eliminated_block(const MatrixXd& ll) {
  if (ll.rows() == 0) throw NumericalError("no buses to eliminate");
  Eigen::LLT<MatrixXd> llt(-ll);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) {
    throw NumericalError("singular B_LL block: some network buses have no path to a generator");
  }
  return llt;
}

MatrixXd schur_with_laplacian_diagonal(const MatrixXd& gg, const MatrixXd& gl, const MatrixXd& coupling) {
  // coupling = (-B_LL)^{-1} B_LG, so B_GL (-B_LL)^{-1} B_LG = gl * coupling >= 0 elementwise.
  const MatrixXd fill = gl * coupling;
  const Index n = gg.rows();
  MatrixXd out = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double v = gg(i, j) + 0.5 * (fill(i, j) + fill(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  for (Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) row += out(i, j);
    }
    out(i, i) = -row;
  }
  return out;
}

}  // namespace

MatrixXd kron_eliminate(const MatrixXd& susceptance, Index keep) {
  const Index total = susceptance.rows();
  if (keep < 1 || keep >= total) throw NumericalError("kron_eliminate: keep must be in [1, size)");
  const Index drop = total - keep;
  const MatrixXd ll = susceptance.bottomRightCorner(drop, drop);
  const auto llt = factor_eliminated_block(ll);
  const MatrixXd coupling = llt.solve(susceptance.bottomLeftCorner(drop, keep));
  return schur_with_laplacian_diagonal(susceptance.topLeftCorner(keep, keep), susceptance.topRightCorner(keep, drop),
                                       coupling);
}

ReducedNetwork kron_reduce(const PartitionedSusceptance& parts) {
  const auto llt = factor_eliminated_block(parts.ll);
  ReducedNetwork red;
  red.propagation = llt.solve(parts.lg);
  red.reduced = schur_with_laplacian_diagonal(parts.gg, parts.gl, red.propagation);
  return red;
}

MatrixXd scaled_reduced_matrix(const MatrixXd& reduced, const VectorXd& inertia) {
  const VectorXd s = inertia.cwiseSqrt().cwiseInverse();
  MatrixXd out = -(s.asDiagonal() * reduced * s.asDiagonal());
  return 0.5 * (out + out.transpose());
}

SpectralModes spectral_decompose(const ReducedNetwork& red, const std::vector<GeneratorParams>& generators,
                                 double omega0, const SpectralOptions& options) {
  const Index n = red.reduced.rows();
  if (static_cast<Index>(generators.size()) != n) {
    throw NumericalError(fmt::format("spectral_decompose: {} generators for a {}x{} reduced matrix",
                                     generators.size(), n, n));
  }
  const auto homogeneity = check_homogeneity(generators, options.homogeneity_tol);
  if (!homogeneity.homogeneous) {
    std::string msg = "generators are not homogeneous:";
    for (const auto& f : homogeneity.findings) msg += "\n  " + f;
    throw HomogeneityError(msg);
  }

  SpectralModes modes;
  modes.inertia.resize(n);
  for (Index i = 0; i < n; ++i) modes.inertia(i) = generators[static_cast<std::size_t>(i)].inertia;
  modes.inertia_sum = homogeneity.inertia_sum;
  modes.damping_sum = homogeneity.damping_sum;
  modes.droop_sum = homogeneity.droop_sum;
  modes.damping_ratio = homogeneity.damping_ratio;
  modes.droop_ratio = homogeneity.droop_ratio;
  modes.turbine_time = homogeneity.turbine_time;
  modes.omega0 = omega0;

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(scaled_reduced_matrix(red.reduced, modes.inertia));
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-decomposition did not converge");
  modes.eigenvalues = solver.eigenvalues();
  modes.eigenvectors = solver.eigenvectors();

  const double zero_tol = options.zero_tol_rel * modes.eigenvalues.cwiseAbs().maxCoeff();
  if (std::abs(modes.eigenvalues(0)) > zero_tol) {
    throw NumericalError(fmt::format("smallest eigenvalue {:.3e} is not zero (tolerance {:.3e})",
                                     modes.eigenvalues(0), zero_tol));
  }
  modes.eigenvalues(0) = 0.0;
  for (Index k = 1; k < n; ++k) {
    if (modes.eigenvalues(k) < -zero_tol) {
      throw NumericalError(fmt::format("negative eigenvalue {:.3e} at mode {}", modes.eigenvalues(k), k + 1));
    }
  }

  // Deterministic sign: first entry of clearly nonzero magnitude is positive.
  for (Index k = 0; k < n; ++k) {
    auto col = modes.eigenvectors.col(k);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-10) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
  return modes;
}

}  // namespace nodalfreq

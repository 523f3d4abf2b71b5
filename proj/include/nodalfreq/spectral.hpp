#pragma once

#include "nodalfreq/network.hpp"

#include <Eigen/Dense>

#include <vector>

namespace nodalfreq {

/// Generator-only equivalent of the network.
struct ReducedNetwork {
  /// B_r = B_GG - B_GL B_LL^{-1} B_LG, n x n, symmetric with zero row sums.
  Eigen::MatrixXd reduced;
  /// -B_LL^{-1} B_LG, (m+a) x n. Maps generator angles (and speeds) to network-bus
  /// angles (and frequencies); rows are nonnegative and sum to one.
  Eigen::MatrixXd propagation;
};

/// Schur complement of the trailing block: keeps the first `keep` buses and
/// eliminates the rest. Off-diagonal entries come from the Schur formula; the
/// diagonal is rebuilt from the zero-row-sum property so near-coincident buses
/// (very small reactances) do not lose the Laplacian structure to cancellation.
/// Throws NumericalError if the eliminated block is not negative definite.
Eigen::MatrixXd kron_eliminate(const Eigen::MatrixXd& susceptance, Eigen::Index keep);

ReducedNetwork kron_reduce(const PartitionedSusceptance& parts);

/// Eigen-decomposition of the inertia-scaled reduced matrix -J^{-1/2} B_r J^{-1/2}.
struct SpectralModes {
  Eigen::VectorXd eigenvalues;   // ascending, eigenvalues(0) == 0 exactly
  Eigen::MatrixXd eigenvectors;  // orthonormal columns U_k
  Eigen::VectorXd inertia;       // J_i
  double inertia_sum = 0.0;
  double damping_sum = 0.0;
  double droop_sum = 0.0;
  double damping_ratio = 0.0;  // d
  double droop_ratio = 0.0;    // k
  double turbine_time = 0.0;   // T
  double omega0 = kDefaultOmega0;

  Eigen::Index size() const { return eigenvalues.size(); }
};

struct SpectralOptions {
  double homogeneity_tol = 1e-6;
  /// |lambda_1| must be below zero_tol_rel * max_k |lambda_k|.
  double zero_tol_rel = 1e-9;
};

/// Throws HomogeneityError when the generators are not homogeneous, NumericalError
/// when lambda_1 is not numerically zero or a higher eigenvalue is negative.
/// Repeated eigenvalues are accepted.
SpectralModes spectral_decompose(const ReducedNetwork& red, const std::vector<GeneratorParams>& generators,
                                 double omega0 = kDefaultOmega0, const SpectralOptions& options = {});

/// -J^{-1/2} B_r J^{-1/2}
Eigen::MatrixXd scaled_reduced_matrix(const Eigen::MatrixXd& reduced, const Eigen::VectorXd& inertia);

}  // namespace nodalfreq

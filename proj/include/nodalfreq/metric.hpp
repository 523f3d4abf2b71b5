#pragma once

#include "nodalfreq/spectral.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace nodalfreq {

/// Modal components c_{k,ii} below this are reported with an infinite inverse.
inline constexpr double kSaturationThreshold = 1e-15;
inline constexpr double kInfiniteMetric = std::numeric_limits<double>::infinity();

struct ModalComponent {
  double c = 0.0;        // c_{k,ii}
  double inverse = 0.0;  // 1 / c_{k,ii}, or +inf when saturated
  bool saturated = false;
};

struct BusMetric {
  std::string bus_id;
  double c = 0.0;       // c_ii: initial RoCoF per unit step at the same bus
  double metric = 0.0;  // 1 / c_ii
  std::vector<ModalComponent> modes;
};

/// Nodal frequency performance of every network bus.
struct MetricReport {
  std::vector<BusMetric> buses;
  /// C = sum_k C_k, (m+a) x (m+a).
  Eigen::MatrixXd parameter_matrix;
  /// G = P J^{-1/2} U with P the propagation matrix; C_k = G_k G_k^T.
  Eigen::MatrixXd modal_gain;
  /// C_k, only filled when requested.
  std::vector<Eigen::MatrixXd> modal_matrices;
  double inertia_sum = 0.0;

  Eigen::Index bus_count() const { return parameter_matrix.rows(); }
  Eigen::Index mode_count() const { return modal_gain.cols(); }
  Eigen::MatrixXd modal_matrix(Eigen::Index k) const;
};

struct MetricOptions {
  bool keep_modal_matrices = false;
  /// Required agreement between sum_k C_k and the closed form P J^{-1} P^T.
  double agreement_tol = 1e-10;
};

/// Closed form C = B_LL^{-1} B_LG J^{-1} B_GL B_LL^{-1}; needs no homogeneity.
Eigen::MatrixXd direct_parameter_matrix(const ReducedNetwork& red, const Eigen::VectorXd& inertia);

/// Builds C from its modal components and cross-checks it against the closed form.
/// Throws NumericalError on disagreement. `bus_ids` may be empty.
MetricReport parameter_matrix(const SpectralModes& modes, const ReducedNetwork& red,
                              const std::vector<std::string>& bus_ids = {}, const MetricOptions& options = {});

/// Initial RoCoF of every network bus, C * P. P is indexed over network buses.
Eigen::VectorXd predicted_initial_rocof(const MetricReport& report, const Eigen::VectorXd& disturbance);

/// dω/dt at t = 0+ of a single machine after a step P1. Throws std::invalid_argument for J <= 0.
double single_generator_rocof(double inertia, double step);

struct TwoGeneratorMetrics {
  double inv_c33 = 0.0;
  double inv_c1_33 = 0.0;
  double inv_c2_33 = 0.0;  // +inf when the second mode does not reach bus 3
};

/// Closed forms for two generators joined through one network bus by X1 and X2.
TwoGeneratorMetrics two_generator_oracle(double j1, double j2, double x1, double x2);

/// Two generators (ids "1", "2") feeding load bus "3" through reactances x1 and x2.
PowerNetwork two_generator_network(double j1, double j2, double x1, double x2);

struct SweepRow {
  double x = 0.0;  // X1 / (X1 + X2)
  TwoGeneratorMetrics oracle;
  TwoGeneratorMetrics pipeline;
  bool flagged = false;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::size_t argmax = 0;  // row with the largest oracle 1/c_33
  std::size_t flagged_count = 0;
};

/// Uniform sweep of the network-bus position between the two generators, each
/// row computed by the closed forms and by the full matrix pipeline.
/// `rel_tol` is the agreement threshold above which a row is flagged.
SweepTable position_sweep(double j1, double j2, std::size_t n_points, double rel_tol = 1e-9);

}  // namespace nodalfreq

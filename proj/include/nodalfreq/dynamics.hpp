#pragma once

#include "nodalfreq/metric.hpp"
#include "nodalfreq/network.hpp"
#include "nodalfreq/spectral.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace nodalfreq {

/// Linearized swing + turbine dynamics with the network algebra eliminated.
///
/// State layout is [Δδ_G (n), Δω_G (n), ΔP_T (n)]. A constant step P at the
/// network buses enters as `input * P`; network-bus frequencies are
/// `output * Δω_G`, valid between steps.
struct StateSpaceModel {
  Eigen::Index generator_count = 0;
  Eigen::Index bus_count = 0;
  Eigen::MatrixXd system;   // 3n x 3n
  Eigen::MatrixXd input;    // 3n x (m+a)
  Eigen::MatrixXd output;   // (m+a) x n
  Eigen::MatrixXd reduced;  // B_r
  Eigen::VectorXd inertia;
  double omega0 = kDefaultOmega0;

  Eigen::Index state_size() const { return 3 * generator_count; }
  Eigen::Index angle_offset() const { return 0; }
  Eigen::Index speed_offset() const { return generator_count; }
  Eigen::Index turbine_offset() const { return 2 * generator_count; }
};

/// Homogeneity is not required. Throws NetworkError / NumericalError for invalid
/// networks or a singular B_LL block.
StateSpaceModel build_state_space(const PowerNetwork& net, const PartitionedSusceptance& parts);

struct SimulationOptions {
  /// The step is applied at the grid point nearest to `onset`.
  double onset = 0.0;
  /// Integration aborts with SimulationError once max |x_i| exceeds this.
  double divergence_bound = 1e6;
  /// Record every `record_stride`-th sample (the final sample is always kept).
  std::size_t record_stride = 1;
  /// Starting state for simulate_step; empty means rest.
  Eigen::VectorXd initial_state;
};

struct SimulationResult {
  std::vector<double> time;
  Eigen::MatrixXd bus_frequency;        // samples x (m+a), Δω'_L
  Eigen::MatrixXd generator_frequency;  // samples x n, Δω_G
  Eigen::MatrixXd generator_angle;      // samples x n, Δδ_G (state-space runs only)
  Eigen::VectorXd coi;                  // inertia-weighted mean of Δω_G
  /// d Δω'_L / dt right after the step, from the vector field.
  Eigen::VectorXd initial_rocof;
  /// Same slope from a one-sided second-order difference of the first samples.
  Eigen::VectorXd initial_rocof_fd;
  /// COI frequency at the final sample.
  double steady_state_deviation = 0.0;

  std::size_t sample_count() const { return time.size(); }
};

/// Fixed-step classical Runge-Kutta integration of a step disturbance P
/// (indexed over network buses; negative = load increase).
SimulationResult simulate_step(const StateSpaceModel& model, const Eigen::VectorXd& disturbance, double t_end,
                               double dt, const SimulationOptions& options = {});

/// H_k(s) = (T s + 1) / (T s^3 + (T d + 1) s^2 + (d + k + ω0 T λ_k) s + ω0 λ_k).
/// Coefficients are in descending powers of s.
struct ModalTransferFunction {
  std::array<double, 2> numerator{};
  std::array<double, 4> denominator{};
};

ModalTransferFunction modal_transfer_function(const SpectralModes& modes, Eigen::Index k);

struct ModalResponse {
  Eigen::Index mode = 0;
  /// C_k P, one entry per network bus.
  Eigen::VectorXd gain;
  ModalTransferFunction transfer;
  /// h_k(t), the inverse transform of H_k, sampled on the result grid
  /// (zero before the onset).
  Eigen::VectorXd response;
};

struct ModalSimulation {
  SimulationResult result;
  std::vector<ModalResponse> modes;
};

/// Superposition of the n decoupled third-order modes. Requires homogeneous
/// generators, which any SpectralModes produced by spectral_decompose guarantees.
ModalSimulation simulate_modal(const SpectralModes& modes, const MetricReport& report,
                               const Eigen::VectorXd& disturbance, double t_end, double dt,
                               const SimulationOptions& options = {});

/// Single-bus step P_i at network bus `bus`.
ModalSimulation simulate_modal(const SpectralModes& modes, const MetricReport& report, Eigen::Index bus,
                               double step, double t_end, double dt, const SimulationOptions& options = {});

/// Σ J_i Δω_{G,i} / J_sum at every recorded sample.
Eigen::VectorXd coi_frequency(const SimulationResult& result, const std::vector<GeneratorParams>& generators);

}  // namespace nodalfreq

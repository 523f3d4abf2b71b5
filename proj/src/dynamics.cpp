#include "nodalfreq/dynamics.hpp"

#include "nodalfreq/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nodalfreq {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

StateSpaceModel build_state_space(const PowerNetwork& net, const PartitionedSusceptance& parts) {
  const auto red = kron_reduce(parts);
  const auto gens = net.generators();
  const Index n = net.generator_count();
  if (static_cast<Index>(gens.size()) != n || red.reduced.rows() != n) {
    throw NetworkError("build_state_space: generator buses and susceptance blocks do not match");
  }

  StateSpaceModel model;
  model.generator_count = n;
  model.bus_count = red.propagation.rows();
  model.omega0 = net.omega0();
  model.reduced = red.reduced;
  model.output = red.propagation;
  model.inertia.resize(n);

  VectorXd inv_j(n), damping(n), droop(n), inv_t(n);
  for (Index i = 0; i < n; ++i) {
    const auto& g = gens[static_cast<std::size_t>(i)];
    model.inertia(i) = g.inertia;
    inv_j(i) = 1.0 / g.inertia;
    damping(i) = g.damping;
    droop(i) = g.droop;
    inv_t(i) = 1.0 / g.turbine_time;
  }

  const Index d0 = model.angle_offset();
  const Index w0 = model.speed_offset();
  const Index p0 = model.turbine_offset();
  auto& a = model.system;
  a = MatrixXd::Zero(3 * n, 3 * n);
  // dδ/dt = ω0 Δω
  a.block(d0, w0, n, n) = model.omega0 * MatrixXd::Identity(n, n);
  // J dω/dt = ΔP_T + B_r Δδ - D Δω + (network share of the step)
  a.block(w0, d0, n, n) = inv_j.asDiagonal() * red.reduced;
  a.block(w0, w0, n, n) = (-inv_j.cwiseProduct(damping)).asDiagonal();
  a.block(w0, p0, n, n) = inv_j.asDiagonal();
  // T dP_T/dt = -K Δω - ΔP_T
  a.block(p0, w0, n, n) = (-inv_t.cwiseProduct(droop)).asDiagonal();
  a.block(p0, p0, n, n) = (-inv_t).asDiagonal();

  model.input = MatrixXd::Zero(3 * n, model.bus_count);
  model.input.block(w0, 0, n, model.bus_count) = inv_j.asDiagonal() * red.propagation.transpose();
  return model;
}

namespace {

struct TimeGrid {
  std::size_t steps = 0;
  std::size_t onset_step = 0;
  std::vector<std::size_t> recorded;  // step indices kept in the result
};

TimeGrid make_grid(double t_end, double dt, const SimulationOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= dt) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be at least dt");
  if (!(options.onset >= 0.0) || options.onset > t_end) throw std::invalid_argument("onset must lie in [0, t_end]");
  if (options.record_stride == 0) throw std::invalid_argument("record_stride must be positive");

  TimeGrid grid;
  grid.steps = static_cast<std::size_t>(std::llround(t_end / dt));
  grid.onset_step = static_cast<std::size_t>(std::llround(options.onset / dt));
  for (std::size_t i = 0; i <= grid.steps; i += options.record_stride) grid.recorded.push_back(i);
  if (grid.recorded.back() != grid.steps) grid.recorded.push_back(grid.steps);
  return grid;
}

double one_sided_slope(const double* y, std::size_t available, double dt) {
  if (available >= 3) return (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt);
  if (available == 2) return (y[1] - y[0]) / dt;
  return std::numeric_limits<double>::quiet_NaN();
}

// Classical RK4 for x' = A x + b with b constant over the step.
template <typename Mat, typename Vec>
class Rk4 {
 public:
  explicit Rk4(Index size) : k1_(size), k2_(size), k3_(size), k4_(size), tmp_(size) {}

  void step(const Mat& a, const Vec& b, Vec& x, double h) {
    k1_.noalias() = a * x;
    k1_ += b;
    tmp_ = x + (0.5 * h) * k1_;
    k2_.noalias() = a * tmp_;
    k2_ += b;
    tmp_ = x + (0.5 * h) * k2_;
    k3_.noalias() = a * tmp_;
    k3_ += b;
    tmp_ = x + h * k3_;
    k4_.noalias() = a * tmp_;
    k4_ += b;
    x += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  Vec k1_, k2_, k3_, k4_, tmp_;
};

template <typename Vec>
void check_bounded(const Vec& x, double bound, double t) {
  const double norm = x.cwiseAbs().maxCoeff();
  if (!std::isfinite(norm) || norm > bound) {
    throw SimulationError(fmt::format("simulation diverged at t = {:.6g} s (max |state| = {:.3e} > {:.3e})", t,
                                      norm, bound),
                          t);
  }
}

VectorXd weighted_mean_rows(const MatrixXd& traces, const VectorXd& weights) {
  return traces * weights / weights.sum();
}

}  // namespace

SimulationResult simulate_step(const StateSpaceModel& model, const VectorXd& disturbance, double t_end, double dt,
                               const SimulationOptions& options) {
  if (disturbance.size() != model.bus_count) {
    throw std::invalid_argument(fmt::format("disturbance has {} entries, model has {} load/passive buses",
                                            disturbance.size(), model.bus_count));
  }
  const auto grid = make_grid(t_end, dt, options);
  const Index n = model.generator_count;
  const Index l = model.bus_count;

  VectorXd x = VectorXd::Zero(model.state_size());
  if (options.initial_state.size() != 0) {
    if (options.initial_state.size() != model.state_size()) throw std::invalid_argument("initial_state has wrong size");
    x = options.initial_state;
  }
  const VectorXd forcing = model.input * disturbance;
  const VectorXd rest = VectorXd::Zero(model.state_size());

  SimulationResult result;
  const auto samples = static_cast<Index>(grid.recorded.size());
  result.time.reserve(grid.recorded.size());
  result.bus_frequency.resize(samples, l);
  result.generator_frequency.resize(samples, n);
  result.generator_angle.resize(samples, n);

  // Output samples right after the onset, for the difference estimate.
  std::vector<double> early(3 * static_cast<std::size_t>(l), 0.0);
  std::size_t early_count = 0;

  Rk4<MatrixXd, VectorXd> rk4(model.state_size());
  std::size_t next_record = 0;
  for (std::size_t step = 0;; ++step) {
    if (step == grid.onset_step) {
      const VectorXd rate = model.system * x + forcing;
      result.initial_rocof = model.output * rate.segment(model.speed_offset(), n);
    }
    if (step >= grid.onset_step && early_count < 3) {
      const VectorXd y = model.output * x.segment(model.speed_offset(), n);
      for (Index j = 0; j < l; ++j) early[static_cast<std::size_t>(j) * 3 + early_count] = y(j);
      ++early_count;
    }
    if (next_record < grid.recorded.size() && grid.recorded[next_record] == step) {
      const auto row = static_cast<Index>(next_record);
      result.time.push_back(static_cast<double>(step) * dt);
      result.generator_angle.row(row) = x.segment(model.angle_offset(), n).transpose();
      result.generator_frequency.row(row) = x.segment(model.speed_offset(), n).transpose();
      result.bus_frequency.row(row) = (model.output * x.segment(model.speed_offset(), n)).transpose();
      ++next_record;
    }
    if (step == grid.steps) break;
    rk4.step(model.system, step >= grid.onset_step ? forcing : rest, x, dt);
    check_bounded(x, options.divergence_bound, static_cast<double>(step + 1) * dt);
  }

  result.initial_rocof_fd.resize(l);
  for (Index j = 0; j < l; ++j) {
    result.initial_rocof_fd(j) = one_sided_slope(&early[static_cast<std::size_t>(j) * 3], early_count, dt);
  }
  result.coi = weighted_mean_rows(result.generator_frequency, model.inertia);
  result.steady_state_deviation = result.coi(result.coi.size() - 1);
  return result;
}

ModalTransferFunction modal_transfer_function(const SpectralModes& modes, Index k) {
  if (k < 0 || k >= modes.size()) throw std::out_of_range("mode index out of range");
  const double t = modes.turbine_time;
  const double d = modes.damping_ratio;
  const double kk = modes.droop_ratio;
  const double w0 = modes.omega0;
  const double lambda = modes.eigenvalues(k);
  ModalTransferFunction tf;
  tf.numerator = {t, 1.0};
  tf.denominator = {t, t * d + 1.0, d + kk + w0 * t * lambda, w0 * lambda};
  return tf;
}

namespace {

// Controllable canonical realization of a strictly proper third-order transfer
// function; the impulse response is c e^{At} b.
struct CanonicalRealization {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  Eigen::RowVector3d c;
};

CanonicalRealization realize(const ModalTransferFunction& tf) {
  const double lead = tf.denominator[0];
  CanonicalRealization r;
  r.a << 0.0, 1.0, 0.0,  //
      0.0, 0.0, 1.0,     //
      -tf.denominator[3] / lead, -tf.denominator[2] / lead, -tf.denominator[1] / lead;
  r.b << 0.0, 0.0, 1.0;
  r.c << tf.numerator[1] / lead, tf.numerator[0] / lead, 0.0;
  return r;
}

}  // namespace

ModalSimulation simulate_modal(const SpectralModes& modes, const MetricReport& report, const VectorXd& disturbance,
                               double t_end, double dt, const SimulationOptions& options) {
  const Index n = modes.size();
  if (report.mode_count() != n) {
    throw std::invalid_argument(fmt::format("report has {} modes, spectrum has {}", report.mode_count(), n));
  }
  if (disturbance.size() != report.bus_count()) {
    throw std::invalid_argument(fmt::format("disturbance has {} entries, report has {} load/passive buses",
                                            disturbance.size(), report.bus_count()));
  }
  if (!(modes.turbine_time > 0.0) || modes.inertia.size() != n) {
    throw HomogeneityError("spectral modes lack a common turbine time constant or inertia vector");
  }
  if (options.initial_state.size() != 0) throw std::invalid_argument("simulate_modal starts from rest");

  const auto grid = make_grid(t_end, dt, options);
  const auto samples = static_cast<Index>(grid.recorded.size());
  const Index l = report.bus_count();

  // Projection of the step onto each mode: q_k = G_k^T P, so C_k P = G_k q_k.
  const VectorXd q = report.modal_gain.transpose() * disturbance;
  const VectorXd inv_sqrt_j = modes.inertia.cwiseSqrt().cwiseInverse();

  ModalSimulation sim;
  MatrixXd h = MatrixXd::Zero(samples, n);
  double slope_at_onset = 0.0;
  for (Index k = 0; k < n; ++k) {
    ModalResponse mode;
    mode.mode = k;
    mode.transfer = modal_transfer_function(modes, k);
    mode.gain = report.modal_gain.col(k) * q(k);
    const auto r = realize(mode.transfer);
    if (k == 0) slope_at_onset = r.c * r.a * r.b;  // h'(0+), equal to 1 for every mode

    Eigen::Vector3d z = r.b;
    const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
    Rk4<Eigen::Matrix3d, Eigen::Vector3d> rk4(3);
    std::size_t next_record = 0;
    while (next_record < grid.recorded.size() && grid.recorded[next_record] < grid.onset_step) ++next_record;
    for (std::size_t step = grid.onset_step;; ++step) {
      if (next_record < grid.recorded.size() && grid.recorded[next_record] == step) {
        h(static_cast<Index>(next_record), k) = r.c * z;
        ++next_record;
      }
      if (step == grid.steps) break;
      rk4.step(r.a, zero, z, dt);
      check_bounded(z, options.divergence_bound, static_cast<double>(step + 1) * dt);
    }
    mode.response = h.col(k);
    sim.modes.push_back(std::move(mode));
  }

  auto& result = sim.result;
  result.time.reserve(grid.recorded.size());
  for (auto step : grid.recorded) result.time.push_back(static_cast<double>(step) * dt);
  result.bus_frequency = h * q.asDiagonal() * report.modal_gain.transpose();
  result.generator_frequency = h * q.asDiagonal() * modes.eigenvectors.transpose() * inv_sqrt_j.asDiagonal();
  result.coi = weighted_mean_rows(result.generator_frequency, modes.inertia);
  result.steady_state_deviation = result.coi(samples - 1);
  result.initial_rocof = report.parameter_matrix * disturbance * slope_at_onset;

  // Difference estimate from unstrided samples of the summed response.
  const std::size_t available = std::min<std::size_t>(3, grid.steps - grid.onset_step + 1);
  MatrixXd early = MatrixXd::Zero(3, n);
  for (Index k = 0; k < n; ++k) {
    const auto r = realize(sim.modes[static_cast<std::size_t>(k)].transfer);
    Eigen::Vector3d z = r.b;
    Rk4<Eigen::Matrix3d, Eigen::Vector3d> rk4(3);
    for (std::size_t s = 0; s < available; ++s) {
      early(static_cast<Index>(s), k) = r.c * z;
      rk4.step(r.a, Eigen::Vector3d::Zero(), z, dt);
    }
  }
  const MatrixXd early_bus = early * q.asDiagonal() * report.modal_gain.transpose();
  result.initial_rocof_fd.resize(l);
  for (Index j = 0; j < l; ++j) {
    const double y[3] = {early_bus(0, j), early_bus(1, j), early_bus(2, j)};
    result.initial_rocof_fd(j) = one_sided_slope(y, available, dt);
  }
  return sim;
}

ModalSimulation simulate_modal(const SpectralModes& modes, const MetricReport& report, Index bus, double step,
                               double t_end, double dt, const SimulationOptions& options) {
  if (bus < 0 || bus >= report.bus_count()) throw std::out_of_range("network bus index out of range");
  VectorXd p = VectorXd::Zero(report.bus_count());
  p(bus) = step;
  return simulate_modal(modes, report, p, t_end, dt, options);
}

VectorXd coi_frequency(const SimulationResult& result, const std::vector<GeneratorParams>& generators) {
  if (static_cast<Index>(generators.size()) != result.generator_frequency.cols()) {
    throw std::invalid_argument("generator count does not match the recorded traces");
  }
  VectorXd j(static_cast<Index>(generators.size()));
  for (std::size_t i = 0; i < generators.size(); ++i) j(static_cast<Index>(i)) = generators[i].inertia;
  return weighted_mean_rows(result.generator_frequency, j);
}

}  // namespace nodalfreq

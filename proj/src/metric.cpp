#include "nodalfreq/metric.hpp"

#include "nodalfreq/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nodalfreq {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ModalComponent make_component(double c) {
  ModalComponent m;
  m.c = c;
  if (c < kSaturationThreshold) {
    m.inverse = kInfiniteMetric;
    m.saturated = true;
  } else {
    m.inverse = 1.0 / c;
  }
  return m;
}

}  // namespace

MatrixXd MetricReport::modal_matrix(Index k) const {
  const auto g = modal_gain.col(k);
  return g * g.transpose();
}

MatrixXd direct_parameter_matrix(const ReducedNetwork& red, const VectorXd& inertia) {
  const MatrixXd& p = red.propagation;
  MatrixXd c = p * inertia.cwiseInverse().asDiagonal() * p.transpose();
  return 0.5 * (c + c.transpose());
}

MetricReport parameter_matrix(const SpectralModes& modes, const ReducedNetwork& red,
                              const std::vector<std::string>& bus_ids, const MetricOptions& options) {
  const Index n = modes.size();
  const Index l = red.propagation.rows();
  if (red.propagation.cols() != n) {
    throw NumericalError(fmt::format("parameter_matrix: {} modes but propagation has {} columns", n,
                                     red.propagation.cols()));
  }
  if (!bus_ids.empty() && static_cast<Index>(bus_ids.size()) != l) {
    throw NumericalError("parameter_matrix: bus id count does not match network bus count");
  }

  MetricReport report;
  report.inertia_sum = modes.inertia_sum;
  report.modal_gain =
      red.propagation * modes.inertia.cwiseSqrt().cwiseInverse().asDiagonal() * modes.eigenvectors;

  MatrixXd modal_sum = report.modal_gain * report.modal_gain.transpose();
  modal_sum = 0.5 * (modal_sum + modal_sum.transpose());
  const MatrixXd direct = direct_parameter_matrix(red, modes.inertia);

  const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
  const double mismatch = (modal_sum - direct).cwiseAbs().maxCoeff();
  if (!(mismatch <= options.agreement_tol * scale)) {
    throw NumericalError(fmt::format("modal and direct parameter matrices disagree by {:.3e}", mismatch));
  }
  report.parameter_matrix = modal_sum;

  if (options.keep_modal_matrices) {
    for (Index k = 0; k < n; ++k) report.modal_matrices.push_back(report.modal_matrix(k));
  }

  report.buses.reserve(static_cast<std::size_t>(l));
  for (Index i = 0; i < l; ++i) {
    BusMetric bus;
    bus.bus_id = bus_ids.empty() ? std::to_string(i) : bus_ids[static_cast<std::size_t>(i)];
    for (Index k = 0; k < n; ++k) {
      const double g = report.modal_gain(i, k);
      bus.modes.push_back(make_component(g * g));
      bus.c += g * g;
    }
    bus.metric = 1.0 / bus.c;
    report.buses.push_back(std::move(bus));
  }
  return report;
}

VectorXd predicted_initial_rocof(const MetricReport& report, const VectorXd& disturbance) {
  if (disturbance.size() != report.bus_count()) {
    throw std::invalid_argument(fmt::format("disturbance has {} entries, network has {} load/passive buses",
                                            disturbance.size(), report.bus_count()));
  }
  return report.parameter_matrix * disturbance;
}

double single_generator_rocof(double inertia, double step) {
  if (!(inertia > 0.0)) throw std::invalid_argument("inertia must be positive");
  return step / inertia;
}

TwoGeneratorMetrics two_generator_oracle(double j1, double j2, double x1, double x2) {
  if (!(j1 > 0.0 && j2 > 0.0)) throw std::invalid_argument("inertias must be positive");
  if (!(x1 >= 0.0 && x2 >= 0.0 && x1 + x2 > 0.0)) throw std::invalid_argument("reactances must be >= 0, not both 0");

  const double total = x1 + x2;
  const double w1 = x2 / total;
  const double w2 = x1 / total;
  TwoGeneratorMetrics out;
  out.inv_c33 = 1.0 / (w1 * w1 / j1 + w2 * w2 / j2);
  out.inv_c1_33 = j1 + j2;

  const double skew = std::sqrt(j2 / j1) * x2 - std::sqrt(j1 / j2) * x1;
  const double c2 = skew * skew / ((j1 + j2) * total * total);
  out.inv_c2_33 = c2 < kSaturationThreshold ? kInfiniteMetric : (j1 + j2) * total * total / (skew * skew);
  return out;
}

PowerNetwork two_generator_network(double j1, double j2, double x1, double x2) {
  // D, K, T do not enter the metric; Table-1 ratios keep the set homogeneous.
  auto gen = [](double j) { return GeneratorParams{j, 0.125 * j, 1.5 * j, 7.0}; };
  std::vector<Bus> buses{Bus::make_generator("1", gen(j1)), Bus::make_generator("2", gen(j2)), Bus::make_load("3")};
  std::vector<Branch> branches{{"1", "3", x1}, {"2", "3", x2}};
  return PowerNetwork(std::move(buses), std::move(branches));
}

namespace {

TwoGeneratorMetrics pipeline_two_generator(double j1, double j2, double x1, double x2) {
  const auto net = two_generator_network(j1, j2, x1, x2);
  const auto red = kron_reduce(assemble_susceptance(net));
  const auto modes = spectral_decompose(red, net.generators(), net.omega0());
  const auto report = parameter_matrix(modes, red);
  const auto& bus = report.buses.front();
  return TwoGeneratorMetrics{bus.metric, bus.modes[0].inverse, bus.modes[1].inverse};
}

bool agree(double a, double b, double rel_tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

SweepTable position_sweep(double j1, double j2, std::size_t n_points, double rel_tol) {
  if (n_points < 2) throw std::invalid_argument("position_sweep needs at least 2 points");
  // Reactances are strictly positive in the matrix pipeline, so the endpoints
  // place bus 3 a negligible distance away from the generator.
  constexpr double kMinReactance = 1e-12;

  SweepTable table;
  table.rows.reserve(n_points);
  const double last = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    SweepRow row;
    row.x = static_cast<double>(i) / last;
    const double x1 = row.x;
    const double x2 = 1.0 - row.x;
    row.oracle = two_generator_oracle(j1, j2, x1, x2);
    row.pipeline = pipeline_two_generator(j1, j2, std::max(x1, kMinReactance), std::max(x2, kMinReactance));
    row.flagged = !(agree(row.oracle.inv_c33, row.pipeline.inv_c33, rel_tol) &&
                    agree(row.oracle.inv_c1_33, row.pipeline.inv_c1_33, rel_tol) &&
                    agree(row.oracle.inv_c2_33, row.pipeline.inv_c2_33, rel_tol));
    if (row.flagged) ++table.flagged_count;
    if (table.rows.empty() || row.oracle.inv_c33 > table.rows[table.argmax].oracle.inv_c33) {
      table.argmax = i;
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace nodalfreq

#pragma once

// Network builders and independent reference computations shared by the test
// binaries. Nothing here calls the Kron / spectral / metric code under test.

#include "nodalfreq/network.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace nodalfreq::testing {

inline GeneratorParams proportional_generator(double inertia) {
  return GeneratorParams{inertia, inertia / 8.0, 1.5 * inertia, 7.0};
}

/// Generator set of the four-generator case study.
inline std::vector<GeneratorParams> case_study_generators() {
  return {{12, 1.5, 18, 7}, {8, 1, 12, 7}, {8, 1, 12, 7}, {4, 0.5, 6, 7}};
}

/// Four-generator, four-bus case-study network. `generators` replaces the
/// default set (case a), `x4` the reactance of generator 4's link (case b).
inline PowerNetwork case_study_network(std::vector<GeneratorParams> generators = case_study_generators(),
                                       double x4 = 0.1) {
  std::vector<Bus> buses;
  for (int i = 0; i < 4; ++i) buses.push_back(Bus::make_generator(std::to_string(i + 1), generators[i]));
  for (int i = 5; i <= 8; ++i) buses.push_back(Bus::make_load(std::to_string(i), 0.25));
  std::vector<Branch> branches{{"1", "5", 0.1}, {"2", "6", 0.1}, {"3", "7", 0.1}, {"4", "8", x4},
                               {"5", "6", 0.2}, {"5", "7", 0.4}, {"7", "8", 0.4}, {"6", "8", 0.6}};
  return PowerNetwork(std::move(buses), std::move(branches));
}

/// Plain chain 5-6-7-8 with the same generator links.
inline PowerNetwork chain_ladder_network() {
  std::vector<Bus> buses;
  const auto gens = case_study_generators();
  for (int i = 0; i < 4; ++i) buses.push_back(Bus::make_generator(std::to_string(i + 1), gens[i]));
  for (int i = 5; i <= 8; ++i) buses.push_back(Bus::make_load(std::to_string(i), 0.25));
  std::vector<Branch> branches{{"1", "5", 0.1}, {"2", "6", 0.1}, {"3", "7", 0.1}, {"4", "8", 0.1},
                               {"5", "6", 0.2}, {"6", "7", 0.4}, {"7", "8", 0.4}};
  return PowerNetwork(std::move(buses), std::move(branches));
}

struct RandomNetworkSpec {
  int min_generators = 2;
  int max_generators = 8;
  int min_buses = 1;
  int max_buses = 10;
  double min_x = 0.05;
  double max_x = 1.0;
  double min_inertia = 2.0;
  double max_inertia = 20.0;
  bool homogeneous = true;
  double extra_edge_fraction = 0.5;
  /// Generator parameters; defaults to proportional_generator(J) when homogeneous.
  std::vector<GeneratorParams> generators;
};

/// Random connected network: a random spanning tree over all buses plus extra
/// random edges. Generators are attached to network buses only so that every
/// generator has an electrical path through the network.
inline PowerNetwork random_network(std::mt19937_64& rng, const RandomNetworkSpec& spec = {}) {
  std::uniform_int_distribution<int> gen_count(spec.min_generators, spec.max_generators);
  std::uniform_int_distribution<int> bus_count(spec.min_buses, spec.max_buses);
  std::uniform_real_distribution<double> reactance(spec.min_x, spec.max_x);
  std::uniform_real_distribution<double> inertia(spec.min_inertia, spec.max_inertia);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int n = spec.generators.empty() ? gen_count(rng) : static_cast<int>(spec.generators.size());
  const int l = bus_count(rng);

  std::vector<Bus> buses;
  for (int i = 0; i < n; ++i) {
    GeneratorParams g;
    if (!spec.generators.empty()) {
      g = spec.generators[static_cast<std::size_t>(i)];
    } else if (spec.homogeneous) {
      g = proportional_generator(inertia(rng));
    } else {
      g = GeneratorParams{inertia(rng), 2.0 * unit(rng), 20.0 * unit(rng), 2.0 + 8.0 * unit(rng)};
    }
    buses.push_back(Bus::make_generator("g" + std::to_string(i + 1), g));
  }
  const int loads = std::max(1, l - l / 3);
  for (int j = 0; j < l; ++j) {
    const std::string id = "b" + std::to_string(j + 1);
    buses.push_back(j < loads ? Bus::make_load(id, unit(rng)) : Bus::make_passive(id));
  }

  std::vector<Branch> branches;
  // Spanning tree over the network buses, then each generator to a random network bus.
  std::vector<int> order(static_cast<std::size_t>(l));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int j = 1; j < l; ++j) {
    std::uniform_int_distribution<int> pick(0, j - 1);
    const int a = order[static_cast<std::size_t>(j)];
    const int b = order[static_cast<std::size_t>(pick(rng))];
    branches.push_back({buses[static_cast<std::size_t>(n + a)].id, buses[static_cast<std::size_t>(n + b)].id,
                        reactance(rng)});
  }
  std::uniform_int_distribution<int> any_bus(0, l - 1);
  for (int i = 0; i < n; ++i) {
    branches.push_back({buses[static_cast<std::size_t>(i)].id,
                        buses[static_cast<std::size_t>(n + any_bus(rng))].id, reactance(rng)});
  }
  const int extra = static_cast<int>(spec.extra_edge_fraction * (n + l));
  std::uniform_int_distribution<int> any(0, n + l - 1);
  for (int e = 0; e < extra; ++e) {
    const int a = any(rng);
    const int b = any(rng);
    if (a == b) continue;
    branches.push_back({buses[static_cast<std::size_t>(a)].id, buses[static_cast<std::size_t>(b)].id, reactance(rng)});
  }
  return PowerNetwork(std::move(buses), std::move(branches));
}

/// Susceptance matrix straight from the branch list, for cross-checks.
inline Eigen::MatrixXd reference_susceptance(const PowerNetwork& net) {
  const auto size = static_cast<Eigen::Index>(net.buses().size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(size, size);
  for (const auto& br : net.branches()) {
    const auto i = *net.index_of(br.from);
    const auto j = *net.index_of(br.to);
    b(i, j) += 1.0 / br.reactance;
    b(j, i) += 1.0 / br.reactance;
    b(i, i) -= 1.0 / br.reactance;
    b(j, j) -= 1.0 / br.reactance;
  }
  return b;
}

/// Initial RoCoF at every network bus obtained by solving the unreduced network
/// equations at t = 0+: generator angles frozen, network angles re-solved with
/// the step, generator accelerations from the electrical power change, and the
/// network-bus acceleration from differentiating the algebraic constraint.
inline Eigen::VectorXd reference_initial_rocof(const PowerNetwork& net, const Eigen::VectorXd& step) {
  const Eigen::MatrixXd b = reference_susceptance(net);
  const auto n = net.generator_count();
  const auto l = net.network_bus_count();
  const Eigen::MatrixXd bll = b.bottomRightCorner(l, l);
  const Eigen::MatrixXd blg = b.bottomLeftCorner(l, n);
  const Eigen::MatrixXd bgl = b.topRightCorner(n, l);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(bll);
  // Injection balance at network buses: -(B theta)_L = P with delta_G = 0.
  const Eigen::VectorXd theta = lu.solve(-step);
  const Eigen::VectorXd pe = -(bgl * theta);
  Eigen::VectorXd accel(n);
  for (Eigen::Index i = 0; i < n; ++i) accel(i) = -pe(i) / net.buses()[static_cast<std::size_t>(i)].generator->inertia;
  return lu.solve(-(blg * accel));
}

/// Closed-form c_33 of two generators joined at one bus through X1 and X2.
inline double two_generator_c33(double j1, double j2, double x1, double x2) {
  const double s = x1 + x2;
  return (x2 / s) * (x2 / s) / j1 + (x1 / s) * (x1 / s) / j2;
}

}  // namespace nodalfreq::testing

#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace nodalfreq {

inline constexpr double kDefaultOmega0 = 100.0 * std::numbers::pi;  // 50 Hz

/// Swing and turbine-governor parameters of one generator, per unit on the system base.
struct GeneratorParams {
  double inertia = 0.0;       // J
  double damping = 0.0;       // D
  double droop = 0.0;         // K
  double turbine_time = 0.0;  // T, seconds

  friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

enum class BusKind { Generator, Load, Passive };

const char* to_string(BusKind kind);

struct Bus {
  std::string id;
  BusKind kind = BusKind::Passive;
  std::optional<GeneratorParams> generator;  // iff kind == Generator
  std::optional<double> load_power;          // iff kind == Load; unused by the linear analysis

  static Bus make_generator(std::string id, GeneratorParams params);
  static Bus make_load(std::string id, double load_power = 0.0);
  static Bus make_passive(std::string id);

  friend bool operator==(const Bus&, const Bus&) = default;
};

/// Purely inductive line. Parallel branches are merged by summing susceptances.
struct Branch {
  std::string from;
  std::string to;
  double reactance = 0.0;

  double susceptance() const { return 1.0 / reactance; }

  friend bool operator==(const Branch&, const Branch&) = default;
};

/// Immutable network description. Generator-internal buses come first, then load
/// buses, then passive buses; this order defines the G | L block partition.
///
/// Construction does not validate; use validate_network() or any of the assembly
/// functions, which reject invalid input.
class PowerNetwork {
 public:
  PowerNetwork(std::vector<Bus> buses, std::vector<Branch> branches, double omega0 = kDefaultOmega0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  double omega0() const { return omega0_; }

  /// Number of generator-internal buses (n).
  Eigen::Index generator_count() const { return generator_count_; }
  /// Number of load plus passive buses (m + a).
  Eigen::Index network_bus_count() const {
    return static_cast<Eigen::Index>(buses_.size()) - generator_count_;
  }

  /// Position of a bus in the ordering, or nullopt if unknown.
  std::optional<Eigen::Index> index_of(const std::string& id) const;

  std::vector<GeneratorParams> generators() const;
  std::vector<std::string> generator_ids() const;
  std::vector<std::string> network_bus_ids() const;

  friend bool operator==(const PowerNetwork& a, const PowerNetwork& b) {
    return a.buses_ == b.buses_ && a.branches_ == b.branches_ && a.omega0_ == b.omega0_;
  }

 private:
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  double omega0_;
  Eigen::Index generator_count_ = 0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> findings;

  bool has_finding(const std::string& fragment) const;
};

/// Checks connectivity, bus ordering, bus/branch consistency and parameter signs.
/// Never throws; problems are itemized in the report.
ValidationReport validate_network(const PowerNetwork& net);

/// Susceptance matrix B (off-diagonals 1/X >= 0, diagonal = -row sum of off-diagonals)
/// and its blocks cut at the generator / network-bus boundary.
struct PartitionedSusceptance {
  Eigen::MatrixXd full;
  Eigen::MatrixXd gg;
  Eigen::MatrixXd gl;
  Eigen::MatrixXd lg;
  Eigen::MatrixXd ll;
};

/// Throws NetworkError if the network fails validation.
PartitionedSusceptance assemble_susceptance(const PowerNetwork& net);

/// Splits a full susceptance matrix after the first `generator_count` rows/columns.
PartitionedSusceptance partition_susceptance(const Eigen::MatrixXd& full, Eigen::Index generator_count);

struct HomogeneityReport {
  bool homogeneous = false;
  double turbine_time = 0.0;
  double inertia_sum = 0.0;
  double damping_sum = 0.0;
  double droop_sum = 0.0;
  double damping_ratio = 0.0;  // d = D_sum / J_sum
  double droop_ratio = 0.0;    // k = K_sum / J_sum
  std::vector<std::string> findings;
};

/// Equal turbine time constants and proportional J : D : K across generators,
/// each within `rel_tol`.
HomogeneityReport check_homogeneity(const std::vector<GeneratorParams>& generators, double rel_tol = 1e-6);
HomogeneityReport check_homogeneity(const PowerNetwork& net, double rel_tol = 1e-6);

}  // namespace nodalfreq

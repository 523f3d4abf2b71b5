#include "nodalfreq/network.hpp"

#include "nodalfreq/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

namespace nodalfreq {

using Eigen::Index;

const char* to_string(BusKind kind) {
  switch (kind) {
    case BusKind::Generator:
      return "generator";
    case BusKind::Load:
      return "load";
    case BusKind::Passive:
      return "passive";
  }
  return "unknown";
}

Bus Bus::make_generator(std::string id, GeneratorParams params) {
  return Bus{std::move(id), BusKind::Generator, params, std::nullopt};
}

Bus Bus::make_load(std::string id, double load_power) {
  return Bus{std::move(id), BusKind::Load, std::nullopt, load_power};
}

Bus Bus::make_passive(std::string id) { return Bus{std::move(id), BusKind::Passive, std::nullopt, std::nullopt}; }

PowerNetwork::PowerNetwork(std::vector<Bus> buses, std::vector<Branch> branches, double omega0)
    : buses_(std::move(buses)), branches_(std::move(branches)), omega0_(omega0) {
  generator_count_ = std::count_if(buses_.begin(), buses_.end(),
                                   [](const Bus& b) { return b.kind == BusKind::Generator; });
}

std::optional<Index> PowerNetwork::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].id == id) return static_cast<Index>(i);
  }
  return std::nullopt;
}

std::vector<GeneratorParams> PowerNetwork::generators() const {
  std::vector<GeneratorParams> out;
  for (const auto& b : buses_) {
    if (b.kind == BusKind::Generator && b.generator) out.push_back(*b.generator);
  }
  return out;
}

std::vector<std::string> PowerNetwork::generator_ids() const {
  std::vector<std::string> out;
  for (const auto& b : buses_) {
    if (b.kind == BusKind::Generator) out.push_back(b.id);
  }
  return out;
}

std::vector<std::string> PowerNetwork::network_bus_ids() const {
  std::vector<std::string> out;
  for (const auto& b : buses_) {
    if (b.kind != BusKind::Generator) out.push_back(b.id);
  }
  return out;
}

bool ValidationReport::has_finding(const std::string& fragment) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const std::string& f) { return f.find(fragment) != std::string::npos; });
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

int kind_rank(BusKind kind) {
  switch (kind) {
    case BusKind::Generator:
      return 0;
    case BusKind::Load:
      return 1;
    case BusKind::Passive:
      return 2;
  }
  return 3;
}

}  // namespace

ValidationReport validate_network(const PowerNetwork& net) {
  ValidationReport report;
  auto fail = [&](std::string finding) {
    report.ok = false;
    report.findings.push_back(std::move(finding));
  };

  const auto& buses = net.buses();
  if (!(std::isfinite(net.omega0()) && net.omega0() > 0.0)) fail("non-positive omega0");

  std::set<std::string> seen;
  for (const auto& bus : buses) {
    if (bus.id.empty()) fail("empty bus id");
    if (!seen.insert(bus.id).second) fail("duplicate bus id '" + bus.id + "'");
  }

  if (net.generator_count() < 1) fail("no generator buses");
  if (net.network_bus_count() < 1) fail("no load or passive buses");

  for (std::size_t i = 1; i < buses.size(); ++i) {
    if (kind_rank(buses[i].kind) < kind_rank(buses[i - 1].kind)) {
      fail("bus ordering: " + std::string(to_string(buses[i].kind)) + " bus '" + buses[i].id + "' follows " +
           to_string(buses[i - 1].kind) + " bus '" + buses[i - 1].id + "'");
    }
  }

  for (const auto& bus : buses) {
    const std::string tag = " at bus '" + bus.id + "'";
    if (bus.kind == BusKind::Generator) {
      if (!bus.generator) {
        fail("missing generator parameters" + tag);
        continue;
      }
      const auto& g = *bus.generator;
      if (!(g.inertia > 0.0) || !std::isfinite(g.inertia)) fail("non-positive inertia" + tag);
      if (!(g.damping >= 0.0) || !std::isfinite(g.damping)) fail("negative damping" + tag);
      if (!(g.droop >= 0.0) || !std::isfinite(g.droop)) fail("negative droop" + tag);
      if (!(g.turbine_time > 0.0) || !std::isfinite(g.turbine_time)) fail("non-positive turbine time" + tag);
    } else if (bus.generator) {
      fail("generator parameters on non-generator bus" + tag);
    }
    if (bus.kind == BusKind::Load && !bus.load_power) fail("missing load power" + tag);
    if (bus.kind != BusKind::Load && bus.load_power) fail("load power on non-load bus" + tag);
    if (bus.load_power && !std::isfinite(*bus.load_power)) fail("non-finite load power" + tag);
  }

  std::vector<std::size_t> parent(buses.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  bool endpoints_ok = true;
  for (const auto& br : net.branches()) {
    const auto from = net.index_of(br.from);
    const auto to = net.index_of(br.to);
    if (!from || !to) {
      fail("branch " + br.from + "-" + br.to + " references unknown bus");
      endpoints_ok = false;
      continue;
    }
    if (*from == *to) fail("self-loop at bus '" + br.from + "'");
    if (!(br.reactance > 0.0) || !std::isfinite(br.reactance)) {
      fail("non-positive reactance on branch " + br.from + "-" + br.to);
    }
    parent[find_root(parent, static_cast<std::size_t>(*from))] = find_root(parent, static_cast<std::size_t>(*to));
  }

  if (!buses.empty()) {
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < buses.size(); ++i) roots.insert(find_root(parent, i));
    if (roots.size() > 1) {
      fail("disconnected: " + std::to_string(roots.size()) + " components" +
           (endpoints_ok ? "" : " (ignoring unresolved branches)"));
    }
  }
  return report;
}

PartitionedSusceptance partition_susceptance(const Eigen::MatrixXd& full, Index generator_count) {
  const Index n = generator_count;
  const Index l = full.rows() - n;
  PartitionedSusceptance parts;
  parts.full = full;
  parts.gg = full.topLeftCorner(n, n);
  parts.gl = full.topRightCorner(n, l);
  parts.lg = full.bottomLeftCorner(l, n);
  parts.ll = full.bottomRightCorner(l, l);
  return parts;
}

PartitionedSusceptance assemble_susceptance(const PowerNetwork& net) {
  const auto report = validate_network(net);
  if (!report.ok) {
    std::string msg = "invalid network:";
    for (const auto& f : report.findings) msg += "\n  " + f;
    throw NetworkError(msg);
  }

  // Parallel branches are summed in sorted order so the result does not depend
  // on the order branches were listed.
  std::map<std::pair<Index, Index>, std::vector<double>> lines;
  for (const auto& br : net.branches()) {
    Index a = *net.index_of(br.from);
    Index b = *net.index_of(br.to);
    if (a > b) std::swap(a, b);
    lines[{a, b}].push_back(br.susceptance());
  }

  const auto size = static_cast<Index>(net.buses().size());
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(size, size);
  for (auto& [pair, values] : lines) {
    std::sort(values.begin(), values.end());
    const double b = std::accumulate(values.begin(), values.end(), 0.0);
    full(pair.first, pair.second) = b;
    full(pair.second, pair.first) = b;
  }
  for (Index i = 0; i < size; ++i) {
    double row = 0.0;
    for (Index j = 0; j < size; ++j) {
      if (j != i) row += full(i, j);
    }
    full(i, i) = -row;
  }
  return partition_susceptance(full, net.generator_count());
}

namespace {

bool close_rel(double a, double b, double rel_tol) {
  if (a == b) return true;
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

HomogeneityReport check_homogeneity(const std::vector<GeneratorParams>& generators, double rel_tol) {
  HomogeneityReport report;
  if (generators.empty()) {
    report.findings.emplace_back("no generators");
    return report;
  }
  for (const auto& g : generators) {
    report.inertia_sum += g.inertia;
    report.damping_sum += g.damping;
    report.droop_sum += g.droop;
  }
  report.turbine_time = generators.front().turbine_time;
  if (report.inertia_sum > 0.0) {
    report.damping_ratio = report.damping_sum / report.inertia_sum;
    report.droop_ratio = report.droop_sum / report.inertia_sum;
  }

  report.homogeneous = true;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const auto& g = generators[i];
    const std::string tag = " (generator " + std::to_string(i + 1) + ")";
    if (!(g.inertia > 0.0)) {
      report.homogeneous = false;
      report.findings.push_back("non-positive inertia" + tag);
      continue;
    }
    if (!close_rel(g.turbine_time, report.turbine_time, rel_tol)) {
      report.homogeneous = false;
      report.findings.push_back("turbine time differs" + tag);
    }
    if (!close_rel(g.damping / g.inertia, report.damping_ratio, rel_tol)) {
      report.homogeneous = false;
      report.findings.push_back("D/J ratio differs" + tag);
    }
    if (!close_rel(g.droop / g.inertia, report.droop_ratio, rel_tol)) {
      report.homogeneous = false;
      report.findings.push_back("K/J ratio differs" + tag);
    }
  }
  return report;
}

HomogeneityReport check_homogeneity(const PowerNetwork& net, double rel_tol) {
  return check_homogeneity(net.generators(), rel_tol);
}

}  // namespace nodalfreq

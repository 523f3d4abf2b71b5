#include "nodalfreq/analysis.hpp"

#include "nodalfreq/error.hpp"

namespace nodalfreq {

Analysis analyze(const PowerNetwork& net, const AnalysisOptions& options) {
  Analysis a;
  a.parts = assemble_susceptance(net);
  a.reduced = kron_reduce(a.parts);
  a.modes = spectral_decompose(a.reduced, net.generators(), net.omega0(), options.spectral);
  a.report = parameter_matrix(a.modes, a.reduced, net.network_bus_ids(), options.metric);
  return a;
}

Eigen::VectorXd disturbance_vector(const PowerNetwork& net, const std::map<std::string, double>& steps) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(net.network_bus_count());
  for (const auto& [id, value] : steps) {
    const auto index = net.index_of(id);
    if (!index) throw NetworkError("disturbance at unknown bus '" + id + "'");
    if (*index < net.generator_count()) {
      throw NetworkError("disturbance at generator internal bus '" + id + "' is outside the metric's domain");
    }
    p(*index - net.generator_count()) += value;
  }
  return p;
}

}  // namespace nodalfreq

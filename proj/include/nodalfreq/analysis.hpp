#pragma once

#include "nodalfreq/metric.hpp"
#include "nodalfreq/network.hpp"
#include "nodalfreq/spectral.hpp"

#include <map>
#include <string>

namespace nodalfreq {

struct AnalysisOptions {
  SpectralOptions spectral;
  MetricOptions metric;
};

/// Every intermediate of the metric pipeline for one network.
struct Analysis {
  PartitionedSusceptance parts;
  ReducedNetwork reduced;
  SpectralModes modes;
  MetricReport report;
};

/// assemble -> Kron reduce -> spectral decomposition -> parameter matrix.
Analysis analyze(const PowerNetwork& net, const AnalysisOptions& options = {});

/// Step vector over the network buses from (bus id -> p.u.) pairs. Generator
/// buses are rejected: the metric assumes no disturbance at internal buses.
Eigen::VectorXd disturbance_vector(const PowerNetwork& net, const std::map<std::string, double>& steps);

}  // namespace nodalfreq

#include "nodalfreq/analysis.hpp"
#include "nodalfreq/error.hpp"
#include "nodalfreq/metric.hpp"
#include "nodalfreq/network_io.hpp"
#include "support/test_networks.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

using namespace nodalfreq;
using nodalfreq::testing::case_study_network;
using nodalfreq::testing::random_network;
using nodalfreq::testing::case_study_generators;

namespace {

struct PublishedRow {
  const char* bus;
  double metric;
  std::array<double, 4> components;
};

void expect_printed(double computed, double printed) {
  // One decimal below 1000, two significant digits in the e-notation entries.
  if (printed < 1000.0) {
    EXPECT_NEAR(computed, printed, 0.05 + 1e-9) << "printed " << printed;
  } else {
    EXPECT_NEAR(computed / printed, 1.0, 0.05) << "printed " << printed;
  }
}

void expect_rows(const MetricReport& report, const std::vector<PublishedRow>& rows) {
  for (const auto& row : rows) {
    const auto it = std::find_if(report.buses.begin(), report.buses.end(),
                                 [&](const BusMetric& b) { return b.bus_id == row.bus; });
    ASSERT_NE(it, report.buses.end()) << row.bus;
    SCOPED_TRACE(row.bus);
    expect_printed(it->metric, row.metric);
    for (std::size_t k = 0; k < 4; ++k) {
      if (row.components[k] > 0.0) expect_printed(it->modes[k].inverse, row.components[k]);
    }
  }
}

const BusMetric& bus(const MetricReport& report, const std::string& id) {
  for (const auto& b : report.buses)
    if (b.bus_id == id) return b;
  throw std::out_of_range(id);
}

}  // namespace

TEST(TwoGeneratorOracle, ClosedFormValues) {
  const auto m = two_generator_oracle(20, 10, 0.5, 0.5);
  EXPECT_NEAR(m.inv_c33, 1.0 / (0.25 / 20 + 0.25 / 10), 1e-12);
  EXPECT_NEAR(m.inv_c33, 26.666666666666668, 1e-12);
  EXPECT_DOUBLE_EQ(m.inv_c1_33, 30.0);

  const auto left = two_generator_oracle(20, 10, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(left.inv_c33, 20.0);
  const auto right = two_generator_oracle(20, 10, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(right.inv_c33, 10.0);

  const auto peak = two_generator_oracle(20, 10, 1.0 / 3.0, 2.0 / 3.0);
  EXPECT_NEAR(peak.inv_c33, 30.0, 1e-12);
  EXPECT_TRUE(std::isinf(peak.inv_c2_33));
}

TEST(TwoGeneratorPipeline, MatchesClosedForm) {
  for (const double x : {0.1, 0.25, 0.5, 0.8}) {
    const auto a = analyze(two_generator_network(20, 10, x, 1.0 - x));
    const auto& m = a.report.buses.at(0);
    const auto o = two_generator_oracle(20, 10, x, 1.0 - x);
    EXPECT_NEAR(m.metric / o.inv_c33, 1.0, 1e-12);
    EXPECT_NEAR(m.modes[0].inverse, 30.0, 1e-9);
    EXPECT_NEAR(m.modes[1].inverse / o.inv_c2_33, 1.0, 1e-9);
    EXPECT_NEAR(1.0 / m.metric, nodalfreq::testing::two_generator_c33(20, 10, x, 1.0 - x), 1e-14);
  }
}

TEST(TwoGeneratorPipeline, NearGeneratorAndSaturatedMode) {
  const auto near = analyze(two_generator_network(20, 10, 1e-12, 1.0));
  EXPECT_NEAR(near.report.buses[0].metric, 20.0, 1e-9);

  const auto third = analyze(two_generator_network(20, 10, 1.0 / 3.0, 2.0 / 3.0));
  const auto& m = third.report.buses[0];
  EXPECT_NEAR(m.metric, 30.0, 1e-9);
  EXPECT_TRUE(m.modes[1].saturated);
  EXPECT_TRUE(std::isinf(m.modes[1].inverse));
}

TEST(ParameterMatrix, CommonModeIsInverseTotalInertia) {
  std::mt19937_64 rng(3);
  nodalfreq::testing::RandomNetworkSpec spec;
  spec.generators = case_study_generators();
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = analyze(random_network(rng, spec));
    for (const auto& b : a.report.buses) {
      EXPECT_NEAR(b.modes[0].inverse, 32.0, 1e-9);
      EXPECT_NEAR(b.modes[0].c, 1.0 / 32.0, 1e-15);
    }
  }
}

TEST(ParameterMatrix, RandomNetworkProperties) {
  std::mt19937_64 rng(17);
  MetricOptions keep;
  keep.keep_modal_matrices = true;
  AnalysisOptions opts;
  opts.metric = keep;
  for (int trial = 0; trial < 30; ++trial) {
    nodalfreq::testing::RandomNetworkSpec spec;
    spec.min_generators = 3;
    const auto net = random_network(rng, spec);
    const auto a = analyze(net, opts);
    const auto& r = a.report;
    const double j_min = a.modes.inertia.minCoeff();

    ASSERT_EQ(static_cast<Eigen::Index>(r.modal_matrices.size()), a.modes.size());
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(r.bus_count(), r.bus_count());
    for (const auto& ck : r.modal_matrices) sum += ck;
    EXPECT_LE((sum - r.parameter_matrix).cwiseAbs().maxCoeff(), 1e-12);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r.parameter_matrix);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);

    for (const auto& b : r.buses) {
      EXPECT_GE(b.metric, j_min * (1.0 - 1e-12));
      EXPECT_LE(b.metric, r.inertia_sum * (1.0 + 1e-12));
      double total = 0.0;
      for (const auto& mc : b.modes) {
        EXPECT_GE(mc.c, 0.0);
        total += mc.c;
      }
      EXPECT_NEAR(total, b.c, 1e-14);
    }

    // Superposition and agreement with the unreduced network equations.
    std::uniform_real_distribution<double> step(-0.2, 0.2);
    Eigen::VectorXd p1(r.bus_count()), p2(r.bus_count());
    for (Eigen::Index i = 0; i < p1.size(); ++i) {
      p1(i) = step(rng);
      p2(i) = step(rng);
    }
    const Eigen::VectorXd lhs = predicted_initial_rocof(r, 2.0 * p1 - 0.5 * p2);
    const Eigen::VectorXd rhs = 2.0 * predicted_initial_rocof(r, p1) - 0.5 * predicted_initial_rocof(r, p2);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);

    const Eigen::VectorXd reference = nodalfreq::testing::reference_initial_rocof(net, p1);
    EXPECT_LE((predicted_initial_rocof(r, p1) - reference).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ParameterMatrix, DirectFormNeedsNoHomogeneity) {
  std::mt19937_64 rng(23);
  nodalfreq::testing::RandomNetworkSpec spec;
  spec.homogeneous = false;
  const auto net = random_network(rng, spec);
  const auto red = kron_reduce(assemble_susceptance(net));
  Eigen::VectorXd j(net.generator_count());
  for (Eigen::Index i = 0; i < j.size(); ++i) j(i) = net.generators()[static_cast<std::size_t>(i)].inertia;
  const Eigen::MatrixXd c = direct_parameter_matrix(red, j);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(c.rows());
  p(0) = -0.1;
  EXPECT_LE((c * p - nodalfreq::testing::reference_initial_rocof(net, p)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PredictedInitialRocof, Examples) {
  const auto a = analyze(two_generator_network(20, 10, 0.5, 0.5));
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  EXPECT_EQ(predicted_initial_rocof(a.report, zero)(0), 0.0);
  Eigen::VectorXd p(1);
  p << -0.1;
  EXPECT_NEAR(predicted_initial_rocof(a.report, p)(0), -0.1 * (0.25 / 20 + 0.25 / 10), 1e-15);
  EXPECT_THROW(predicted_initial_rocof(a.report, Eigen::VectorXd::Zero(2)), std::invalid_argument);

  const auto t = analyze(case_study_network());
  Eigen::VectorXd single = Eigen::VectorXd::Zero(4);
  single(1) = -0.1;
  const Eigen::VectorXd r = predicted_initial_rocof(t.report, single);
  EXPECT_NEAR(r(1), -0.1 * t.report.parameter_matrix(1, 1), 1e-15);
  EXPECT_NEAR(r(0), -0.1 * t.report.parameter_matrix(0, 1), 1e-15);
}

TEST(SingleGeneratorRocof, Examples) {
  EXPECT_DOUBLE_EQ(single_generator_rocof(20, 0.1), 0.005);
  EXPECT_DOUBLE_EQ(single_generator_rocof(10, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(single_generator_rocof(4, -0.1), -0.025);
  EXPECT_THROW(single_generator_rocof(0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(single_generator_rocof(-1.0, 0.1), std::invalid_argument);
}

TEST(PositionSweep, Shape) {
  const auto t = position_sweep(20, 10, 301);
  ASSERT_EQ(t.rows.size(), 301u);
  EXPECT_EQ(t.flagged_count, 0u);
  EXPECT_NEAR(t.rows.front().oracle.inv_c33, 20.0, 1e-9);
  EXPECT_NEAR(t.rows.back().oracle.inv_c33, 10.0, 1e-9);
  EXPECT_NEAR(t.rows.front().pipeline.inv_c33, 20.0, 1e-9);
  EXPECT_NEAR(t.rows.back().pipeline.inv_c33, 10.0, 1e-9);
  EXPECT_NEAR(t.rows[t.argmax].x, 1.0 / 3.0, 1.0 / 300.0);
  EXPECT_NEAR(t.rows[t.argmax].oracle.inv_c33, 30.0, 1e-9);
  for (const auto& row : t.rows) EXPECT_NEAR(row.oracle.inv_c1_33, 30.0, 1e-9);

  const auto sym = position_sweep(10, 10, 301);
  EXPECT_NEAR(sym.rows[sym.argmax].x, 0.5, 1e-12);
  for (std::size_t i = 0; i < sym.rows.size(); ++i) {
    EXPECT_NEAR(sym.rows[i].oracle.inv_c33, sym.rows[sym.rows.size() - 1 - i].oracle.inv_c33, 1e-9);
  }

  EXPECT_THROW(position_sweep(20, 10, 1), std::invalid_argument);
  EXPECT_EQ(position_sweep(20, 10, 2).rows.size(), 2u);
}

TEST(CaseStudyMetrics, MatchesPublishedValues) {
  const auto a = analyze(case_study_network());
  // Bus 7 c_3 and bus 8 c_3 are checked separately below.
  expect_rows(a.report, {{"5", 24.0, {32.0, 148.8, 276.4, 2.2e6}},
                         {"6", 16.3, {32.0, 160.3, 45.1, 653.2}},
                         {"7", 14.7, {32.0, 30.7, 0.0, 378.9}},
                         {"8", 7.2, {32.0, 56.3, 0.0, 12.4}}});
  expect_printed(bus(a.report, "7").modes[2].inverse, 592.8);
  expect_printed(bus(a.report, "8").modes[2].inverse, 96.2);
}

TEST(CaseStudyMetrics, CaseVariantsOfBus8) {
  auto gens = case_study_generators();
  std::swap(gens[1], gens[3]);
  const auto swapped = analyze(case_study_network(gens));
  expect_rows(swapped.report, {{"8", 13.8, {32.0, 36.3, 74.3, 4.7e3}}});

  const auto longer = analyze(case_study_network(case_study_generators(), 0.3));
  expect_rows(longer.report, {{"8", 14.0, {32.0, 45.1, 77.8, 190.8}}});

  const double base = bus(analyze(case_study_network()).report, "8").metric;
  EXPECT_GT(bus(swapped.report, "8").metric, base);
  EXPECT_GT(bus(longer.report, "8").metric, base);
}

TEST(CaseStudyMetrics, DataFilesMatchBuilders) {
  const auto a = analyze(load_network(std::string(NODALFREQ_DATA_DIR) + "/table1_candidates/fig3_ring.json"));
  const auto b = analyze(case_study_network());
  EXPECT_LE((a.report.parameter_matrix - b.report.parameter_matrix).cwiseAbs().maxCoeff(), 1e-15);
}

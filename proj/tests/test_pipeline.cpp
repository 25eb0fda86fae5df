#include <gtest/gtest.h>

#include "pottsseg/eval.hpp"
#include "pottsseg/pipeline.hpp"

namespace ps = pottsseg;

TEST(Pipeline, FourGaussiansFindFourSegments) {
  const auto data = ps::generate_synthetic(ps::four_gaussian_spec(1));
  ps::PipelineConfig cfg;
  cfg.potts.gamma = 0.02;
  const auto r = ps::run_pipeline(data.points, cfg);
  EXPECT_EQ(r.labels.size(), 1000u);
  EXPECT_EQ(r.solution.partition.segment_count, 4u);
  EXPECT_GT(ps::nmi(r.labels, data.truth), 0.95);
  EXPECT_EQ(r.composed.source_count(), 1000u);
  EXPECT_EQ(r.composed.reduced_count(), r.graph.node_count());
}

TEST(Pipeline, UniformImageIsOneSegment) {
  const ps::RgbImage img{20, 10, std::vector<std::uint8_t>(600, 77)};
  const auto r = ps::run_pipeline(ps::image_to_matrix(img), {});
  EXPECT_EQ(r.distinct_rows, 1u);
  EXPECT_EQ(r.solution.partition.segment_count, 1u);
  EXPECT_EQ(r.labels, ps::LabelVector(200, 0));
}

TEST(Pipeline, SingleRow) {
  const auto r = ps::run_pipeline(ps::FeatureMatrix(1, 2, {3, 4}), {});
  EXPECT_EQ(r.labels, ps::LabelVector{0});
  EXPECT_EQ(r.e_bar, 0.0);
}

TEST(Pipeline, DuplicateRowsShareLabels) {
  auto data = ps::generate_synthetic(ps::four_gaussian_spec(2, 20.0)).points;
  std::vector<ps::Feature> v = data.values();
  v.insert(v.end(), data.values().begin(), data.values().end());
  const ps::FeatureMatrix doubled(2000, 3, v);
  ps::PipelineConfig cfg;
  cfg.potts.gamma = 0.05;
  const auto r = ps::run_pipeline(doubled, cfg);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(r.labels[i], r.labels[i + 1000]);
}

TEST(Pipeline, DeterministicUnderSeed) {
  const auto data = ps::generate_synthetic(ps::four_gaussian_spec(3, 15.0)).points;
  ps::PipelineConfig cfg;
  cfg.potts.seed = 11;
  cfg.gamma_grid = {0.01, 0.05, 0.2};
  const auto a = ps::run_pipeline(data, cfg);
  const auto b = ps::run_pipeline(data, cfg);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.e_bar, b.e_bar);
  ASSERT_TRUE(a.sweep.has_value());
  EXPECT_EQ(a.solution.gamma, a.sweep->solutions[a.sweep->selected].gamma);
}

TEST(Pipeline, ReconstructionFollowsMap) {
  const auto data = ps::generate_synthetic(ps::four_gaussian_spec(4, 30.0)).points;
  ps::PipelineConfig cfg;
  cfg.downsample.dedup_threshold = 100;
  cfg.downsample.target = 50;
  const auto r = ps::run_pipeline(data, cfg);
  const auto rec = ps::reconstruct(r.downsampled.reduced, r.composed);
  ASSERT_EQ(rec.rows(), data.rows());
  for (std::size_t i = 0; i < rec.rows(); ++i) {
    const auto a = rec.row(i), b = r.downsampled.reduced.row(r.composed[i]);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Sweep, OneCellOneRowAndStableReport) {
  const auto data = ps::generate_synthetic(ps::four_gaussian_spec(5));
  const std::vector<double> gammas{0.02};
  const std::vector<std::size_t> nodes{350};
  const std::vector<std::uint64_t> seeds{1};
  const auto cells = ps::run_sweep(data.points, data.truth, gammas, nodes, seeds, {});
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].segments, 4u);
  const auto again = ps::run_sweep(data.points, data.truth, gammas, nodes, seeds, {});
  EXPECT_EQ(ps::sweep_report(cells, false), ps::sweep_report(again, false));
}

TEST(Sweep, GridRowCount) {
  const auto data = ps::generate_synthetic(ps::four_gaussian_spec(6));
  const std::vector<double> gammas{0.01, 0.1};
  const std::vector<std::size_t> nodes{100, 140, 180};
  const std::vector<std::uint64_t> seeds{1, 2};
  ps::PipelineConfig cfg;
  cfg.potts.restarts = 1;
  EXPECT_EQ(ps::run_sweep(data.points, data.truth, gammas, nodes, seeds, cfg).size(), 12u);
}

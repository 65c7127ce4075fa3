#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ditto/artifacts.hpp"
#include "ditto/config.hpp"
#include "ditto/geometry.hpp"
#include "ditto/io.hpp"
#include "ditto/normconst.hpp"
#include "ditto/perfect.hpp"
#include "ditto/tmcmc.hpp"

namespace ditto {

/// Dataset plus the natural parameters that generated it.
StoredDataset make_dataset(const RunConfig& config, const Model& model);

/// Design points in the unconstrained ball and their log-normalizer
/// estimates (annulus estimator for normal_gamma, importance sampling
/// otherwise), one parallel task per point.
DesignSet build_design(const RunConfig& config, const Model& model, const Dataset& data, int workers);

GpSurrogate fit_surrogate(const RunConfig& config, const DesignSet& design);

/// TMCMC chain on the unconstrained log posterior.
Chain run_tmcmc_stage(const RunConfig& config, const LogDensity& log_posterior, int dim);

/// Partition from chain moments; in diffeomorphism mode the chain is first
/// mapped through h so the partition lives in gamma space.
EllipsoidalPartition build_partition(const RunConfig& config, const Matrix& chain_draws);

/// Region estimates for indices first..last (1-based, inclusive).
std::vector<RegionEstimate> estimate_regions(const RunConfig& config, const EllipsoidalPartition& part,
                                             const LogDensity& target, std::size_t first, std::size_t last,
                                             int workers);

struct DrawStageResult {
  SampleBatch samples;
  std::int64_t violations = 0;
  std::int64_t widened_regions = 0;
  int doublings = 0;
  std::int64_t planned_steps = 0;  // sum of T - 1 over the first round
};

/// Perfect draws with the extend-until-clear doubling barrier and the
/// violation retry rounds. `part` and `regions` are updated in place.
/// Throws BudgetExceeded up front if sampler.max_total_steps is set and the
/// backward times of the first round need more residual steps.
DrawStageResult draw_iid(const RunConfig& config, const Model& model, EllipsoidalPartition& part,
                         std::vector<RegionEstimate>& regions, const LogDensity& target, int workers);

/// Log density the sampler works with: the posterior itself, or its
/// flattened gamma-space version when the diffeomorphism is enabled.
LogDensity sampler_target(const RunConfig& config, LogDensity log_posterior);

struct PipelineOptions {
  std::string out_dir;    // artifacts are written here when non-empty
  bool resume = false;    // reuse surrogate, partition and regions from out_dir
  bool keep_chain = true;
};

struct PipelineResult {
  StoredDataset dataset;
  DesignSet design;
  std::shared_ptr<const GpSurrogate> surrogate;
  Chain chain;  // unconstrained draws; empty on resume
  std::optional<EllipsoidalPartition> partition;
  std::vector<RegionEstimate> regions;
  SampleBatch samples;
  RunManifest manifest;
};

/// Runs every stage of the sampler. When an output directory is given the
/// artifacts (dataset.json, surrogate.txt, regions.csv, manifest.json,
/// samples.csv, provenance.csv, chain.csv) are written as stages finish.
PipelineResult run_pipeline(const RunConfig& config, const PipelineOptions& options = {});

}  // namespace ditto

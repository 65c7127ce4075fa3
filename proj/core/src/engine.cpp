#include "ditto/engine.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "ditto/diffeo.hpp"
#include "ditto/errors.hpp"
#include "ditto/parallel.hpp"
#include "ditto/posterior.hpp"
#include "ditto/rng.hpp"

namespace ditto {
namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Vector draw_from_prior(const Model& model, const RunConfig& config, Rng& rng) {
  if (model.kind() == ModelKind::normal_gamma) {
    const auto& pr = config.model.priors;
    std::gamma_distribution<double> gamma(pr.alpha0, 1.0 / pr.beta0);
    const double tau = gamma(rng);
    return Vector{{pr.psi0 + rng.normal() / std::sqrt(tau), tau}};
  }
  const PriorBox box = model.prior_box();
  Vector v(model.dim());
  for (int j = 0; j < model.dim(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    v[j] = rng.uniform(box.lower[k], box.upper[k]);
  }
  return v;
}

Vector broadcast(const std::vector<double>& v, int d, const char* what) {
  if (static_cast<int>(v.size()) == d) return Eigen::Map<const Vector>(v.data(), d);
  if (v.size() == 1) return Vector::Constant(d, v.front());
  throw ConfigError(std::string(what) + " must have 1 or " + std::to_string(d) + " entries");
}

void summarize_p_hat(RunManifest& m, const std::vector<RegionEstimate>& regions) {
  std::vector<double> p;
  for (const auto& r : regions) {
    if (!r.empty) p.push_back(r.p_hat);
  }
  if (p.empty()) return;
  std::sort(p.begin(), p.end());
  m.p_hat_min = p.front();
  m.p_hat_max = p.back();
  m.p_hat_median = p[p.size() / 2];
}

std::string join(const std::string& dir, const char* name) { return (std::filesystem::path(dir) / name).string(); }

}  // namespace

StoredDataset make_dataset(const RunConfig& config, const Model& model) {
  if (!config.data.path.empty()) {
    StoredDataset stored = dataset_from_json(read_file(config.data.path));
    if (stored.kind != model.kind()) throw ConfigError("data.path holds a dataset for a different model");
    model.validate(stored.data);
    return stored;
  }
  StoredDataset stored;
  stored.kind = model.kind();
  stored.seed = config.data.seed;
  Vector truth;
  if (config.data.true_params.empty()) {
    Rng rng = rng_stream(config.data.seed, "truth", 0);
    truth = draw_from_prior(model, config, rng);
  } else {
    if (static_cast<int>(config.data.true_params.size()) != model.dim()) {
      throw ConfigError("data.true_params must have " + std::to_string(model.dim()) + " entries");
    }
    truth = Eigen::Map<const Vector>(config.data.true_params.data(), model.dim());
  }
  stored.true_params.assign(truth.begin(), truth.end());
  Rng rng = rng_stream(config.data.seed, "data", 0);
  stored.data = model.generate_data(truth, config.data.generation, rng);
  return stored;
}

DesignSet build_design(const RunConfig& config, const Model& model, const Dataset& data, int workers) {
  const auto& s = config.surrogate;
  DesignSet design;
  design.ball_radius = s.ball_radius;
  Rng rng = rng_stream(config.seed, "design", 0);
  design.points = draw_design_points(s.design_points, model.dim(), s.ball_radius, rng);

  std::optional<AnnulusSchedule1D> schedule;
  if (model.kind() == ModelKind::normal_gamma) {
    schedule = AnnulusSchedule1D::ladder(s.annulus.r1, s.annulus.step, s.annulus.bins, s.annulus.draws);
  } else if (!model.has_envelope()) {
    throw ConfigError(std::string(model.name()) + ": no normalizing-constant estimator available");
  }
  const auto estimates = parallel_map(design.points.size(), workers, [&](std::size_t k) {
    Rng task = rng_stream(config.seed, "normconst", k);
    const Vector natural = model.to_natural(design.points[k]);
    if (schedule) return annulus_1d_log_normconst(natural[0], natural[1], *schedule, task);
    return is_log_normconst(model, data, natural, s.importance_draws, task);
  });
  for (const auto& e : estimates) {
    design.values.push_back(e.value);
    design.std_errors.push_back(e.std_error);
  }
  return design;
}

GpSurrogate fit_surrogate(const RunConfig& config, const DesignSet& design) {
  const Vector d_diag = broadcast(config.surrogate.d_diag, design.dim(), "surrogate.d_diag");
  const double nugget = config.surrogate.nugget ? *config.surrogate.nugget : calibrate_nugget(design, d_diag);
  return gp_fit(design, d_diag, nugget);
}

Chain run_tmcmc_stage(const RunConfig& config, const LogDensity& log_posterior, int dim) {
  Vector init = config.tmcmc_init.empty() ? Vector::Zero(dim) : broadcast(config.tmcmc_init, dim, "tmcmc.init");
  Rng rng = rng_stream(config.seed, "tmcmc", 0);
  return run_chain(log_posterior, config.tmcmc, init, rng);
}

EllipsoidalPartition build_partition(const RunConfig& config, const Matrix& chain_draws) {
  Matrix draws = chain_draws;
  if (config.diffeo.enabled) {
    for (Eigen::Index i = 0; i < draws.rows(); ++i) {
      draws.row(i) = h_apply(chain_draws.row(i).transpose(), config.diffeo.b).transpose();
    }
  }
  const Moments m = estimate_moments(draws, config.partition.median_center);
  return EllipsoidalPartition(m.mean, m.cov,
                              {config.partition.sqrt_c1, config.partition.step, config.partition.count});
}

LogDensity sampler_target(const RunConfig& config, LogDensity log_posterior) {
  if (!config.diffeo.enabled) return log_posterior;
  return flatten(std::move(log_posterior), config.diffeo.b);
}

std::vector<RegionEstimate> estimate_regions(const RunConfig& config, const EllipsoidalPartition& part,
                                             const LogDensity& target, std::size_t first, std::size_t last,
                                             int workers) {
  if (first < 1 || last > part.size() || first > last) throw InvalidArgument("estimate_regions: bad index range");
  return parallel_map(last - first + 1, workers, [&](std::size_t k) {
    const std::size_t i = first + k;
    Rng rng = rng_stream(config.seed, "region", i);
    return estimate_region(part, i, target, config.sampler.region_draws, config.sampler.slack, rng);
  });
}

DrawStageResult draw_iid(const RunConfig& config, const Model& model, EllipsoidalPartition& part,
                         std::vector<RegionEstimate>& regions, const LogDensity& target, int workers) {
  if (regions.size() != part.size()) throw InvalidArgument("draw_iid: region table does not match partition");
  const auto n = static_cast<std::size_t>(config.sampler.n_iid);
  DrawStageResult out;
  out.samples.columns = model.parameter_names();
  out.samples.values.resize(static_cast<Eigen::Index>(n), model.dim());
  out.samples.provenance.resize(n);
  if (n == 0) return out;

  // The first variate of each task stream picks its region. Extend the
  // partition until no task lands in the outermost annulus, so every draw
  // is made against the same final partition.
  std::vector<double> u(n);
  for (std::size_t t = 0; t < n; ++t) u[t] = rng_stream(config.seed, "draw", t).uniform();
  std::vector<std::size_t> chosen(n);
  for (;;) {
    const auto cdf = selection_cdf(regions);
    bool hit_last = false;
    for (std::size_t t = 0; t < n; ++t) {
      chosen[t] = select_from_cdf(cdf, u[t]);
      hit_last = hit_last || chosen[t] == part.size();
    }
    if (!hit_last) break;
    if (out.doublings >= config.sampler.max_doublings) {
      throw PartitionRunaway("draw_iid: outermost annulus still selected after " + std::to_string(out.doublings) +
                             " doublings; the radius ladder is likely too short");
    }
    const auto ext = extend_partition(part);
    part = ext.partition;
    const auto fresh = estimate_regions(config, part, target, ext.first_new, ext.last_new, workers);
    regions.insert(regions.end(), fresh.begin(), fresh.end());
    ++out.doublings;
  }

  constexpr std::int64_t kMaxSteps = std::numeric_limits<std::int64_t>::max();
  // Each task draws T right after its region choice, so the residual work
  // of the first round is known before any of it is done.
  for (std::size_t t = 0; t < n; ++t) {
    const auto& r = regions[chosen[t] - 1];
    if (r.empty) continue;
    Rng rng = rng_stream(config.seed, "draw", t);
    rng.uniform();
    std::int64_t steps = kMaxSteps;
    try {
      steps = draw_backward_time(r.p_hat, rng) - 1;
    } catch (const InvalidArgument&) {
      // T beyond the int64 range; the draw itself would fail the same way.
    }
    out.planned_steps = steps > kMaxSteps - out.planned_steps ? kMaxSteps : out.planned_steps + steps;
  }
  const std::int64_t budget = config.sampler.max_total_steps;
  if (budget > 0 && out.planned_steps > budget) throw BudgetExceeded(out.planned_steps, budget);

  const std::optional<double> diffeo_b =
      config.diffeo.enabled ? std::optional<double>(config.diffeo.b) : std::nullopt;
  struct TaskResult {
    std::optional<PerfectDraw> draw;
    std::size_t violated_region = 0;
  };
  std::vector<std::size_t> pending(n);
  for (std::size_t t = 0; t < n; ++t) pending[t] = t;
  std::map<std::size_t, std::uint64_t> generation;
  for (int round = 0; !pending.empty(); ++round) {
    if (round > 32) throw Error("draw_iid: minorization violations did not resolve after 32 rounds");
    const auto results = parallel_map(pending.size(), workers, [&](std::size_t k) {
      const std::size_t t = pending[k];
      Rng rng = rng_stream(config.seed, "draw", t);
      rng.uniform();  // region choice, already consumed above
      TaskResult r;
      try {
        r.draw = perfect_draw(regions[chosen[t] - 1], part, target, rng, diffeo_b);
      } catch (const MinorizationViolation& v) {
        r.violated_region = v.region();
      }
      return r;
    });
    std::vector<std::size_t> retry;
    std::set<std::size_t> violated;
    for (std::size_t k = 0; k < results.size(); ++k) {
      const std::size_t t = pending[k];
      auto& prov = out.samples.provenance[t];
      if (results[k].draw) {
        const auto& d = *results[k].draw;
        out.samples.values.row(static_cast<Eigen::Index>(t)) = model.to_natural(d.theta).transpose();
        prov.region = d.region;
        prov.backward_time = d.backward_time;
        prov.residual_rejections = d.residual_rejections;
        prov.stream_index = t;
      } else {
        ++prov.retries;
        ++out.violations;
        retry.push_back(t);
        violated.insert(results[k].violated_region);
      }
    }
    // Widen every violated region (in index order, own streams), then re-run
    // the affected tasks from scratch.
    for (std::size_t i : violated) {
      const std::uint64_t gen = generation[i]++;
      Rng rng = rng_stream(config.seed, "widen", i * 1024 + gen);
      regions[i - 1] = widen_region(part, regions[i - 1], target, rng);
      ++out.widened_regions;
    }
    pending = std::move(retry);
  }
  return out;
}

PipelineResult run_pipeline(const RunConfig& config, const PipelineOptions& options) {
  config.validate();
  const int workers = effective_workers(config.workers);
  const auto model = make_model(config.model);
  const bool persist = !options.out_dir.empty();
  PipelineResult res;
  RunManifest& manifest = res.manifest;
  manifest.config_json = config_to_json(config);
  manifest.diffeo_space = config.diffeo.enabled;
  Stopwatch clock;

  if (options.resume) {
    if (!persist) throw ConfigError("resume needs an output directory");
    res.dataset = dataset_from_json(read_file(join(options.out_dir, "dataset.json")));
    model->validate(res.dataset.data);
    res.surrogate = std::make_shared<const GpSurrogate>(surrogate_load(join(options.out_dir, "surrogate.txt")));
    const RunManifest snapshot = manifest_from_json(read_file(join(options.out_dir, "manifest.stage4.json")));
    res.partition = partition_from_manifest(snapshot);
    res.regions = regions_from_csv(read_file(join(options.out_dir, "regions.csv")));
    manifest.nugget = res.surrogate->nugget;
    manifest.timings.push_back({"resume", clock.lap()});
  } else {
    res.dataset = make_dataset(config, *model);
    if (persist) write_file(join(options.out_dir, "dataset.json"), dataset_to_json(res.dataset));
    manifest.timings.push_back({"data", clock.lap()});

    res.design = build_design(config, *model, res.dataset.data, workers);
    res.surrogate = std::make_shared<const GpSurrogate>(fit_surrogate(config, res.design));
    manifest.nugget = res.surrogate->nugget;
    if (persist) surrogate_save(*res.surrogate, join(options.out_dir, "surrogate.txt"));
    manifest.timings.push_back({"surrogate", clock.lap()});
  }

  const LogDensity log_post = make_surrogate_posterior(model, res.dataset.data, res.surrogate);
  const LogDensity target = sampler_target(config, log_post);

  if (!options.resume) {
    res.chain = run_tmcmc_stage(config, log_post, model->dim());
    manifest.tmcmc_acceptance = res.chain.acceptance;
    if (persist && options.keep_chain) {
      Matrix natural(res.chain.draws.rows(), res.chain.draws.cols());
      for (Eigen::Index i = 0; i < natural.rows(); ++i) {
        natural.row(i) = model->to_natural(res.chain.draws.row(i).transpose()).transpose();
      }
      write_file(join(options.out_dir, "chain.csv"), chain_to_csv(model->parameter_names(), natural));
      write_file(join(options.out_dir, "chain.json"),
                 chain_meta_json(res.chain.acceptance, manifest.config_json, res.chain.draws.rows()));
    }
    manifest.timings.push_back({"tmcmc", clock.lap()});

    res.partition = build_partition(config, res.chain.draws);
    res.regions = estimate_regions(config, *res.partition, target, 1, res.partition->size(), workers);
    manifest.timings.push_back({"regions", clock.lap()});
    if (persist) {
      RunManifest snapshot = manifest;
      set_partition(snapshot, *res.partition);
      write_file(join(options.out_dir, "regions.csv"), regions_to_csv(res.regions));
      write_file(join(options.out_dir, "manifest.stage4.json"), manifest_to_json(snapshot));
    }
  }

  DrawStageResult drawn = draw_iid(config, *model, *res.partition, res.regions, target, workers);
  res.samples = std::move(drawn.samples);
  manifest.timings.push_back({"draws", clock.lap()});
  manifest.violations = drawn.violations;
  manifest.widened_regions = drawn.widened_regions;
  manifest.doublings = drawn.doublings;
  manifest.draws = res.samples.values.rows();
  set_partition(manifest, *res.partition);
  summarize_p_hat(manifest, res.regions);

  const std::string dataset_text = dataset_to_json(res.dataset);
  const std::string samples_text = samples_to_csv(res.samples);
  const std::string regions_text = regions_to_csv(res.regions);
  manifest.dataset_digest = sha256_hex(dataset_text);
  manifest.surrogate_digest = sha256_hex(surrogate_to_string(*res.surrogate));
  manifest.regions_digest = sha256_hex(regions_text);
  manifest.samples_digest = sha256_hex(samples_text);
  if (persist) {
    write_file(join(options.out_dir, "samples.csv"), samples_text);
    write_file(join(options.out_dir, "provenance.csv"), provenance_to_csv(res.samples));
    write_file(join(options.out_dir, "regions_final.csv"), regions_text);
    write_file(join(options.out_dir, "manifest.json"), manifest_to_json(manifest));
  }
  return res;
}

}  // namespace ditto

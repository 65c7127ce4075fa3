#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ditto/config.hpp"
#include "ditto/engine.hpp"
#include "ditto/errors.hpp"
#include "ditto/io.hpp"
#include "ditto/normconst.hpp"
#include "ditto/posterior.hpp"
#include "ditto/validate.hpp"

namespace ditto {
namespace {

struct RunSource {
  std::string preset;
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  std::string data;

  void attach(CLI::App& app) {
    app.add_option("--preset", preset, "Built-in experiment preset")
        ->check(CLI::IsMember({"normal_gamma", "ising", "strauss", "autologistic"}));
    app.add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master seed")->each([this](const std::string&) { seed_set = true; });
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--data", data, "Dataset JSON to use instead of generating one")->check(CLI::ExistingFile);
  }

  RunConfig resolve() const {
    if (preset.empty() == config.empty()) throw CLI::ValidationError("exactly one of --preset or --config is required");
    RunConfig c = config.empty() ? preset_config(preset) : parse_config(config);
    if (seed_set) c.seed = seed;
    if (workers > 0) c.workers = workers;
    if (!data.empty()) c.data.path = data;
    c.validate();
    return c;
  }
};

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double_strict(item));
  return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact iid sampling from doubly intractable posteriors", "ditto"};
  app.require_subcommand(1);

  // generate-data
  auto* gen = app.add_subcommand("generate-data", "Simulate a dataset from the model at its true parameters");
  RunSource gen_src;
  std::string gen_out;
  gen_src.attach(*gen);
  gen->add_option("--out", gen_out, "Output dataset JSON")->required();

  // surrogate fit | eval
  auto* sur = app.add_subcommand("surrogate", "Fit or evaluate the log-normalizer surrogate");
  sur->require_subcommand(1);
  auto* fit = sur->add_subcommand("fit", "Estimate design values and fit the surrogate");
  RunSource fit_src;
  std::string fit_out;
  fit_src.attach(*fit);
  fit->add_option("--out", fit_out, "Output surrogate file")->required();
  auto* eval = sur->add_subcommand("eval", "Predict log C at unconstrained parameter vectors");
  std::string eval_file;
  std::vector<std::string> eval_theta;
  eval->add_option("--surrogate", eval_file, "Surrogate file")->required()->check(CLI::ExistingFile);
  eval->add_option("--theta", eval_theta, "Comma-separated unconstrained vector (repeatable)")->required();

  // tmcmc
  auto* tm = app.add_subcommand("tmcmc", "Run the TMCMC chain on the surrogate posterior");
  RunSource tm_src;
  std::string tm_out, tm_surrogate;
  tm_src.attach(*tm);
  tm->add_option("--surrogate", tm_surrogate, "Reuse a fitted surrogate")->check(CLI::ExistingFile);
  tm->add_option("--out", tm_out, "Output chain CSV (natural parameters)")->required();

  // iid
  auto* iid = app.add_subcommand("iid", "Draw exact iid samples");
  RunSource iid_src;
  std::string iid_out, iid_artifacts;
  std::int64_t iid_n = -1;
  bool iid_resume = false;
  iid_src.attach(*iid);
  iid->add_option("--n", iid_n, "Number of iid draws")->check(CLI::NonNegativeNumber);
  iid->add_option("--out", iid_out, "Output samples CSV")->required();
  iid->add_option("--artifacts", iid_artifacts, "Directory for stage artifacts");
  iid->add_flag("--resume", iid_resume, "Resume the draw stage from --artifacts");

  // density
  auto* den = app.add_subcommand("density", "Gaussian KDE of one sample column");
  std::string den_in, den_col, den_out;
  std::size_t den_points = 512;
  den->add_option("--in", den_in, "Samples CSV")->required()->check(CLI::ExistingFile);
  den->add_option("--column", den_col, "Column name")->required();
  den->add_option("--out", den_out, "Output density CSV (grid,density)")->required();
  den->add_option("--points", den_points, "Grid points")->check(CLI::Range(2, 1'000'000));

  // summarize
  auto* sum = app.add_subcommand("summarize", "Per-column summary statistics");
  std::string sum_in, sum_out;
  sum->add_option("--in", sum_in, "Samples CSV")->required()->check(CLI::ExistingFile);
  sum->add_option("--out", sum_out, "Write the summary CSV here instead of stdout");

  // validate
  auto* val = app.add_subcommand("validate", "Run an oracle validation suite");
  std::string val_suite;
  std::uint64_t val_seed = 20240101;
  int val_workers = 1;
  val->add_option("suite", val_suite, "Suite name")->required()->check(CLI::IsMember(validation_suites()));
  val->add_option("--seed", val_seed, "Seed");
  val->add_option("--workers", val_workers, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*gen) {
      const RunConfig c = gen_src.resolve();
      const auto model = make_model(c.model);
      write_file(gen_out, dataset_to_json(make_dataset(c, *model)));
    } else if (*fit) {
      const RunConfig c = fit_src.resolve();
      const auto model = make_model(c.model);
      const StoredDataset data = make_dataset(c, *model);
      const DesignSet design = build_design(c, *model, data.data, effective_workers(c.workers));
      const GpSurrogate s = fit_surrogate(c, design);
      surrogate_save(s, fit_out);
      out << "nugget " << format_double(s.nugget) << "\n";
    } else if (*eval) {
      const GpSurrogate s = surrogate_load(eval_file);
      for (const auto& text : eval_theta) {
        const auto v = parse_vector(text);
        if (static_cast<int>(v.size()) != s.dim()) throw InvalidArgument("--theta has the wrong dimension");
        out << format_double(s.predict(Eigen::Map<const Vector>(v.data(), s.dim()))) << "\n";
      }
    } else if (*tm) {
      const RunConfig c = tm_src.resolve();
      const auto model = make_model(c.model);
      const StoredDataset data = make_dataset(c, *model);
      std::shared_ptr<const GpSurrogate> s;
      if (!tm_surrogate.empty()) {
        s = std::make_shared<const GpSurrogate>(surrogate_load(tm_surrogate));
      } else {
        s = std::make_shared<const GpSurrogate>(
            fit_surrogate(c, build_design(c, *model, data.data, effective_workers(c.workers))));
      }
      const Chain chain = run_tmcmc_stage(c, make_surrogate_posterior(model, data.data, s), model->dim());
      Matrix natural(chain.draws.rows(), chain.draws.cols());
      for (Eigen::Index i = 0; i < natural.rows(); ++i) {
        natural.row(i) = model->to_natural(chain.draws.row(i).transpose()).transpose();
      }
      write_file(tm_out, chain_to_csv(model->parameter_names(), natural));
      write_file(sibling(tm_out, ".json"), chain_meta_json(chain.acceptance, config_to_json(c), chain.draws.rows()));
    } else if (*iid) {
      RunConfig c = iid_src.resolve();
      if (iid_n >= 0) c.sampler.n_iid = iid_n;
      if (iid_resume && iid_artifacts.empty()) throw CLI::ValidationError("--resume needs --artifacts");
      const PipelineResult res = run_pipeline(c, {iid_artifacts, iid_resume, true});
      write_file(iid_out, samples_to_csv(res.samples));
      write_file(sibling(iid_out, ".provenance.csv"), provenance_to_csv(res.samples));
      write_file(sibling(iid_out, ".manifest.json"), manifest_to_json(res.manifest));
    } else if (*den) {
      const CsvTable t = parse_csv(read_file(den_in));
      write_file(den_out, density_to_csv(kde_1d(t.column(den_col), {den_points})));
    } else if (*sum) {
      const std::string text = summary_to_csv(parse_csv(read_file(sum_in)));
      if (sum_out.empty()) {
        out << text;
      } else {
        write_file(sum_out, text);
      }
    } else if (*val) {
      const SuiteReport r = run_validation_suite(val_suite, val_seed, val_workers);
      for (const auto& c : r.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << r.suite << ": " << c.name << " (" << c.detail << ")\n";
      }
      return r.passed() ? 0 : 2;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace ditto

#include "ditto/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ditto/errors.hpp"

namespace ditto {
namespace {

using nlohmann::json;

/// Reads one JSON object, remembering which keys were consumed so leftovers
/// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  ~Section() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + field(it.key()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_model(Section& root, ModelSettings& m) {
  if (!root.has("model")) return;
  Section s(root.at("model"), "model");
  if (s.has("kind")) {
    try {
      m.kind = model_kind_from_string(s.at("kind").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("model.kind: " + std::string(e.what()));
    }
  }
  s.read("n", m.n);
  s.read("rows", m.rows);
  s.read("cols", m.cols);
  s.read("radius", m.radius);
  s.read("beta_max", m.beta_max);
  s.read("psi0", m.priors.psi0);
  s.read("alpha0", m.priors.alpha0);
  s.read("beta0", m.priors.beta0);
  s.finish();
}

void read_data(Section& root, DataSettings& d) {
  if (!root.has("data")) return;
  Section s(root.at("data"), "data");
  s.read("true_params", d.true_params);
  s.read("seed", d.seed);
  s.read("gibbs_sweeps", d.generation.gibbs_sweeps);
  s.read("point_process_iterations", d.generation.point_process_iterations);
  s.read("path", d.path);
  s.finish();
}

void read_surrogate(Section& root, SurrogateSettings& g) {
  if (!root.has("surrogate")) return;
  Section s(root.at("surrogate"), "surrogate");
  s.read("design_points", g.design_points);
  s.read("ball_radius", g.ball_radius);
  s.read("importance_draws", g.importance_draws);
  if (s.has("d_diag")) {
    const auto& v = s.at("d_diag");
    if (v.is_number()) {
      g.d_diag = {v.get<double>()};
    } else if (v.is_array()) {
      try {
        g.d_diag = v.get<std::vector<double>>();
      } catch (const json::exception&) {
        throw ConfigError("surrogate.d_diag: expected numbers");
      }
    } else {
      throw ConfigError("surrogate.d_diag: expected a number or an array");
    }
  }
  if (s.has("nugget")) {
    const auto& v = s.at("nugget");
    if (v.is_string() && v.get<std::string>() == "auto") {
      g.nugget.reset();
    } else if (v.is_number()) {
      g.nugget = v.get<double>();
    } else {
      throw ConfigError("surrogate.nugget: expected a number or \"auto\"");
    }
  }
  if (s.has("annulus")) {
    Section a(s.at("annulus"), "surrogate.annulus");
    a.read("r1", g.annulus.r1);
    a.read("step", g.annulus.step);
    a.read("bins", g.annulus.bins);
    a.read("draws", g.annulus.draws);
    a.finish();
  }
  s.finish();
}

void read_tmcmc(Section& root, RunConfig& c) {
  if (!root.has("tmcmc")) return;
  Section s(root.at("tmcmc"), "tmcmc");
  auto& t = c.tmcmc;
  if (s.has("scales")) {
    const auto& v = s.at("scales");
    std::vector<double> sc;
    if (v.is_number()) {
      sc = {v.get<double>()};
    } else if (v.is_array()) {
      try {
        sc = v.get<std::vector<double>>();
      } catch (const json::exception&) {
        throw ConfigError("tmcmc.scales: expected numbers");
      }
    } else {
      throw ConfigError("tmcmc.scales: expected a number or an array");
    }
    t.scales = Eigen::Map<const Vector>(sc.data(), static_cast<Eigen::Index>(sc.size()));
  }
  if (s.has("mode")) {
    const auto mode = s.at("mode").is_string() ? s.at("mode").get<std::string>() : std::string();
    if (mode == "additive") {
      t.mode = TmcmcMode::additive;
    } else if (mode == "mixture") {
      t.mode = TmcmcMode::mixture;
    } else {
      throw ConfigError("tmcmc.mode: expected \"additive\" or \"mixture\"");
    }
  }
  s.read("burn_in", t.burn_in);
  s.read("keep", t.keep);
  s.read("thin_a", t.thin_a);
  s.read("thin_b", t.thin_b);
  s.read("deterministic_step", t.deterministic_step);
  s.read("multiplicative_floor", t.multiplicative_floor);
  s.read("init", c.tmcmc_init);
  s.finish();
}

void read_partition(Section& root, PartitionSettings& p) {
  if (!root.has("partition")) return;
  Section s(root.at("partition"), "partition");
  s.read("sqrt_c1", p.sqrt_c1);
  s.read("step", p.step);
  s.read("M", p.count);
  s.read("median_center", p.median_center);
  s.finish();
}

void read_sampler(Section& root, SamplerSettings& p) {
  if (!root.has("sampler")) return;
  Section s(root.at("sampler"), "sampler");
  s.read("n_iid", p.n_iid);
  s.read("region_draws", p.region_draws);
  s.read("slack", p.slack);
  s.read("max_doublings", p.max_doublings);
  s.read("max_total_steps", p.max_total_steps);
  s.finish();
}

void read_diffeo(Section& root, DiffeoSettings& d) {
  if (!root.has("diffeo")) return;
  Section s(root.at("diffeo"), "diffeo");
  s.read("enabled", d.enabled);
  s.read("b", d.b);
  s.finish();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void RunConfig::validate() const {
  require(model.n >= 1, "model.n must be positive");
  require(model.rows >= 1 && model.cols >= 1, "model.rows and model.cols must be positive");
  require(model.radius > 0, "model.radius must be positive");
  require(model.beta_max > 0, "model.beta_max must be positive");
  require(model.priors.alpha0 > 0 && model.priors.beta0 > 0, "model.alpha0 and model.beta0 must be positive");
  require(data.generation.gibbs_sweeps >= 1, "data.gibbs_sweeps must be positive");
  require(data.generation.point_process_iterations >= 1, "data.point_process_iterations must be positive");
  require(surrogate.design_points >= 1, "surrogate.design_points must be positive");
  require(surrogate.ball_radius > 0, "surrogate.ball_radius must be positive");
  require(surrogate.importance_draws >= 1, "surrogate.importance_draws must be positive");
  require(!surrogate.d_diag.empty(), "surrogate.d_diag must not be empty");
  for (double v : surrogate.d_diag) require(v > 0, "surrogate.d_diag entries must be positive");
  require(!surrogate.nugget || *surrogate.nugget > 0, "surrogate.nugget must be positive");
  require(surrogate.annulus.r1 > 0 && surrogate.annulus.step > 0, "surrogate.annulus radii must be positive");
  require(surrogate.annulus.bins >= 1 && surrogate.annulus.draws >= 1, "surrogate.annulus counts must be positive");
  try {
    tmcmc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  require(partition.sqrt_c1 > 0 && partition.step > 0, "partition.sqrt_c1 and partition.step must be positive");
  require(partition.count >= 1, "partition.M must be positive");
  require(sampler.n_iid >= 0, "sampler.n_iid must be non-negative");
  require(sampler.region_draws >= 2, "sampler.region_draws must be at least 2");
  require(sampler.slack > 0 && sampler.slack < 1, "sampler.slack must lie in (0, 1)");
  require(sampler.max_doublings >= 0, "sampler.max_doublings must be non-negative");
  require(sampler.max_total_steps >= 0, "sampler.max_total_steps must be non-negative");
  require(diffeo.b > 0, "diffeo.b must be positive");
  require(workers >= 1, "workers must be at least 1");
}

RunConfig preset_config(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  c.tmcmc.scales = Vector::Constant(1, 0.05);
  if (name == "normal_gamma") {
    c.model.kind = ModelKind::normal_gamma;
    c.model.n = 10;
    c.data.true_params = {0.0, 1.0};
    c.partition = {2.3, 0.02, 100, false};
  } else if (name == "ising") {
    c.model.kind = ModelKind::ising;
    c.model.rows = c.model.cols = 10;
    c.data.true_params = {0.05, 0.38};
    c.partition = {2.5, 0.02, 100, false};
  } else if (name == "strauss") {
    c.model.kind = ModelKind::strauss;
    c.data.true_params = {100.0, 0.5};
    c.partition = {3.0, 0.05, 15, false};
  } else if (name == "autologistic") {
    c.model.kind = ModelKind::autologistic;
    c.model.n = 100;
    c.data.true_params.clear();  // drawn from the prior
    c.surrogate.design_points = 500;
    c.surrogate.ball_radius = 2.0;
    c.tmcmc.mode = TmcmcMode::mixture;
    c.partition = {5.0, 0.0005, 10000, false};
    c.diffeo = {true, 0.01};
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

RunConfig parse_config_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section root(j, "");
  RunConfig c;
  if (root.has("preset")) {
    const auto& p = root.at("preset");
    if (!p.is_string()) throw ConfigError("preset: expected a string");
    c = preset_config(p.get<std::string>());
  } else {
    c.tmcmc.scales = Vector::Constant(1, 0.05);
  }
  read_model(root, c.model);
  read_data(root, c.data);
  read_surrogate(root, c.surrogate);
  read_tmcmc(root, c);
  read_partition(root, c.partition);
  read_sampler(root, c.sampler);
  read_diffeo(root, c.diffeo);
  root.read("seed", c.seed);
  root.read("workers", c.workers);
  root.finish();
  c.validate();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  if (!c.preset.empty()) j["preset"] = c.preset;
  j["model"] = {{"kind", std::string(to_string(c.model.kind))},
                {"n", c.model.n},
                {"rows", c.model.rows},
                {"cols", c.model.cols},
                {"radius", c.model.radius},
                {"beta_max", c.model.beta_max},
                {"psi0", c.model.priors.psi0},
                {"alpha0", c.model.priors.alpha0},
                {"beta0", c.model.priors.beta0}};
  j["data"] = {{"true_params", c.data.true_params},
               {"seed", c.data.seed},
               {"gibbs_sweeps", c.data.generation.gibbs_sweeps},
               {"point_process_iterations", c.data.generation.point_process_iterations},
               {"path", c.data.path}};
  json nugget = "auto";
  if (c.surrogate.nugget) nugget = *c.surrogate.nugget;
  j["surrogate"] = {{"design_points", c.surrogate.design_points},
                    {"ball_radius", c.surrogate.ball_radius},
                    {"importance_draws", c.surrogate.importance_draws},
                    {"d_diag", c.surrogate.d_diag},
                    {"nugget", nugget},
                    {"annulus",
                     {{"r1", c.surrogate.annulus.r1},
                      {"step", c.surrogate.annulus.step},
                      {"bins", c.surrogate.annulus.bins},
                      {"draws", c.surrogate.annulus.draws}}}};
  j["tmcmc"] = {{"scales", std::vector<double>(c.tmcmc.scales.begin(), c.tmcmc.scales.end())},
                {"mode", c.tmcmc.mode == TmcmcMode::mixture ? "mixture" : "additive"},
                {"burn_in", c.tmcmc.burn_in},
                {"keep", c.tmcmc.keep},
                {"thin_a", c.tmcmc.thin_a},
                {"thin_b", c.tmcmc.thin_b},
                {"deterministic_step", c.tmcmc.deterministic_step},
                {"multiplicative_floor", c.tmcmc.multiplicative_floor},
                {"init", c.tmcmc_init}};
  j["partition"] = {{"sqrt_c1", c.partition.sqrt_c1},
                    {"step", c.partition.step},
                    {"M", c.partition.count},
                    {"median_center", c.partition.median_center}};
  j["sampler"] = {{"n_iid", c.sampler.n_iid},
                  {"region_draws", c.sampler.region_draws},
                  {"slack", c.sampler.slack},
                  {"max_doublings", c.sampler.max_doublings},
                  {"max_total_steps", c.sampler.max_total_steps}};
  j["diffeo"] = {{"enabled", c.diffeo.enabled}, {"b", c.diffeo.b}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j.dump(2);
}

std::shared_ptr<const Model> make_model(const ModelSettings& s) {
  switch (s.kind) {
    case ModelKind::normal_gamma: return std::make_shared<NormalGammaModel>(s.n, s.priors);
    case ModelKind::ising: return std::make_shared<IsingModel>(s.rows, s.cols);
    case ModelKind::strauss: return std::make_shared<StraussModel>(s.radius, s.beta_max);
    case ModelKind::autologistic: return std::make_shared<AutologisticModel>(s.n);
  }
  throw ConfigError("unknown model kind");
}

int effective_workers(int configured) {
  if (const char* env = std::getenv("DITTO_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096) {
      throw ConfigError("DITTO_WORKERS must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return configured;
}

}  // namespace ditto

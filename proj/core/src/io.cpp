#include "ditto/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ditto/errors.hpp"

namespace ditto {
namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  for (;;) {
    const auto q = line.find(sep, p);
    out.push_back(line.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
    if (q == std::string_view::npos) break;
    p = q + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

template <class T>
T get_field(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw InvalidArgument(std::string(where) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

std::int8_t to_spin(int v) {
  if (v != 1 && v != -1) throw InvalidArgument("dataset: spins must be -1 or +1");
  return static_cast<std::int8_t>(v);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double_strict(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

// Datasets --------------------------------------------------------------------

std::string dataset_to_json(const StoredDataset& stored) {
  json j;
  j["model"] = std::string(to_string(stored.kind));
  json payload;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, RealSample>) {
          payload = d.values;
        } else if constexpr (std::is_same_v<T, SpinLattice>) {
          payload = json::array();
          for (int i = 0; i < d.rows; ++i) {
            json row = json::array();
            for (int k = 0; k < d.cols; ++k) row.push_back(static_cast<int>(d.at(i, k)));
            payload.push_back(row);
          }
        } else if constexpr (std::is_same_v<T, PointPattern>) {
          json pts = json::array();
          for (const auto& p : d.points) pts.push_back({p[0], p[1]});
          payload = {{"points", pts}, {"R", d.radius}, {"window", {0.0, 1.0}}};
        } else {
          payload = json::array();
          for (auto s : d.spins) payload.push_back(static_cast<int>(s));
        }
      },
      stored.data);
  j["payload"] = payload;
  j["meta"] = {{"true_params", stored.true_params}, {"seed", stored.seed}};
  return j.dump() + "\n";
}

StoredDataset dataset_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("dataset: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("dataset: expected an object");
  StoredDataset out;
  out.kind = model_kind_from_string(get_field<std::string>(j, "model", "dataset"));
  if (!j.contains("payload")) throw InvalidArgument("dataset: missing field 'payload'");
  const json& p = j.at("payload");
  try {
    switch (out.kind) {
      case ModelKind::normal_gamma: out.data = RealSample{p.get<std::vector<double>>()}; break;
      case ModelKind::ising: {
        const auto grid = p.get<std::vector<std::vector<int>>>();
        SpinLattice lat;
        lat.rows = static_cast<int>(grid.size());
        lat.cols = grid.empty() ? 0 : static_cast<int>(grid.front().size());
        for (const auto& row : grid) {
          if (static_cast<int>(row.size()) != lat.cols) throw InvalidArgument("dataset: ragged ising grid");
          for (int v : row) lat.spins.push_back(to_spin(v));
        }
        out.data = std::move(lat);
        break;
      }
      case ModelKind::strauss: {
        PointPattern pat;
        pat.radius = get_field<double>(p, "R", "dataset.payload");
        for (const auto& pt : get_field<std::vector<std::vector<double>>>(p, "points", "dataset.payload")) {
          if (pt.size() != 2) throw InvalidArgument("dataset: points must have two coordinates");
          pat.points.push_back({pt[0], pt[1]});
        }
        if (p.contains("window")) {
          const auto w = p.at("window").get<std::vector<double>>();
          if (w != std::vector<double>{0.0, 1.0}) throw InvalidArgument("dataset: only the unit window is supported");
        }
        out.data = std::move(pat);
        break;
      }
      case ModelKind::autologistic: {
        SpinChain chain;
        for (int v : p.get<std::vector<int>>()) chain.spins.push_back(to_spin(v));
        out.data = std::move(chain);
        break;
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("dataset: malformed payload: ") + e.what());
  }
  if (j.contains("meta")) {
    const json& m = j.at("meta");
    if (m.contains("true_params")) out.true_params = get_field<std::vector<double>>(m, "true_params", "dataset.meta");
    if (m.contains("seed")) out.seed = get_field<std::uint64_t>(m, "seed", "dataset.meta");
  }
  return out;
}

// Samples and tables ----------------------------------------------------------

std::string samples_to_csv(const SampleBatch& batch) {
  std::string out;
  for (std::size_t j = 0; j < batch.columns.size(); ++j) {
    if (j) out += ',';
    out += batch.columns[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < batch.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < batch.values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(batch.values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string provenance_to_csv(const SampleBatch& batch) {
  std::string out = "row,region,backward_time,stream_index,residual_rejections,retries\n";
  for (std::size_t i = 0; i < batch.provenance.size(); ++i) {
    const auto& p = batch.provenance[i];
    out += std::to_string(i) + ',' + std::to_string(p.region) + ',' + std::to_string(p.backward_time) + ',' +
           std::to_string(p.stream_index) + ',' + std::to_string(p.residual_rejections) + ',' +
           std::to_string(p.retries) + '\n';
  }
  return out;
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidArgument("csv: no column '" + std::string(name) + "'");
  const auto j = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw InvalidArgument("csv: empty input");
  CsvTable t;
  for (auto name : split(lines.front(), ',')) t.columns.emplace_back(name);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split(lines[k], ',');
    if (cells.size() != t.columns.size()) {
      throw InvalidArgument("csv: line " + std::to_string(k + 1) + " has " + std::to_string(cells.size()) +
                            " fields, expected " + std::to_string(t.columns.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(parse_double_strict(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string regions_to_csv(std::span<const RegionEstimate> regions) {
  std::string out = "i,log_volume,log_weight,log_s,log_S,p_hat,n_draws,slack,empty\n";
  for (const auto& r : regions) {
    out += std::to_string(r.index) + ',' + format_double(r.log_volume) + ',' + format_double(r.log_weight) + ',' +
           format_double(r.log_s) + ',' + format_double(r.log_S) + ',' + format_double(r.p_hat) + ',' +
           std::to_string(r.n_draws) + ',' + format_double(r.slack) + ',' + (r.empty ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<RegionEstimate> regions_from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  const std::vector<std::string> want{"i", "log_volume", "log_weight", "log_s", "log_S",
                                      "p_hat", "n_draws", "slack", "empty"};
  if (t.columns != want) throw InvalidArgument("regions csv: unexpected header");
  std::vector<RegionEstimate> out;
  for (const auto& r : t.rows) {
    RegionEstimate e;
    e.index = static_cast<std::size_t>(r[0]);
    e.log_volume = r[1];
    e.log_weight = r[2];
    e.log_s = r[3];
    e.log_S = r[4];
    e.p_hat = r[5];
    e.n_draws = static_cast<std::int64_t>(r[6]);
    e.slack = r[7];
    e.empty = r[8] != 0.0;
    if (e.index != out.size() + 1) throw InvalidArgument("regions csv: indices must run 1..M in order");
    out.push_back(e);
  }
  return out;
}

std::string chain_to_csv(const std::vector<std::string>& names, const Matrix& natural_draws) {
  SampleBatch b;
  b.columns = names;
  b.values = natural_draws;
  return samples_to_csv(b);
}

std::string chain_meta_json(const AcceptanceRates& rates, const std::string& config_json, std::int64_t kept) {
  json j;
  j["acceptance"] = {
      {"additive", rates.additive}, {"multiplicative", rates.multiplicative}, {"deterministic", rates.deterministic}};
  j["kept"] = kept;
  j["config"] = json::parse(config_json);
  return j.dump(2) + "\n";
}

// Manifest --------------------------------------------------------------------

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["format"] = m.format;
  j["config"] = m.config_json.empty() ? json::object() : json::parse(m.config_json);
  j["digests"] = {{"dataset", m.dataset_digest},
                  {"surrogate", m.surrogate_digest},
                  {"regions", m.regions_digest},
                  {"samples", m.samples_digest}};
  j["surrogate"] = {{"nugget", m.nugget}};
  j["tmcmc"] = {{"acceptance",
                 {{"additive", m.tmcmc_acceptance.additive},
                  {"multiplicative", m.tmcmc_acceptance.multiplicative},
                  {"deterministic", m.tmcmc_acceptance.deterministic}}}};
  j["partition"] = {{"center", m.partition_center},
                    {"chol", m.partition_chol},
                    {"sqrt_c1", m.partition_sqrt_c1},
                    {"step", m.partition_step},
                    {"M", m.partition_count},
                    {"diffeo_space", m.diffeo_space}};
  json timings = json::array();
  for (const auto& t : m.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  j["timings"] = timings;
  j["regions"] = {{"p_hat_min", m.p_hat_min}, {"p_hat_median", m.p_hat_median}, {"p_hat_max", m.p_hat_max}};
  j["sampler"] = {{"draws", m.draws},
                  {"violations", m.violations},
                  {"widened_regions", m.widened_regions},
                  {"doublings", m.doublings}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("manifest: invalid JSON: ") + e.what());
  }
  RunManifest m;
  try {
    m.format = j.at("format").get<std::string>();
    if (m.format != "ditto-manifest/1") throw InvalidArgument("manifest: unsupported format " + m.format);
    m.config_json = j.at("config").dump();
    const auto& d = j.at("digests");
    m.dataset_digest = d.at("dataset").get<std::string>();
    m.surrogate_digest = d.at("surrogate").get<std::string>();
    m.regions_digest = d.at("regions").get<std::string>();
    m.samples_digest = d.at("samples").get<std::string>();
    m.nugget = j.at("surrogate").at("nugget").get<double>();
    const auto& p = j.at("partition");
    m.partition_center = p.at("center").get<std::vector<double>>();
    m.partition_chol = p.at("chol").get<std::vector<std::vector<double>>>();
    m.partition_sqrt_c1 = p.at("sqrt_c1").get<double>();
    m.partition_step = p.at("step").get<double>();
    m.partition_count = p.at("M").get<std::size_t>();
    m.diffeo_space = p.at("diffeo_space").get<bool>();
    const auto& acc = j.at("tmcmc").at("acceptance");
    m.tmcmc_acceptance = {acc.at("additive").get<double>(), acc.at("multiplicative").get<double>(),
                          acc.at("deterministic").get<double>()};
    for (const auto& t : j.at("timings")) {
      m.timings.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
    }
    const auto& r = j.at("regions");
    m.p_hat_min = r.at("p_hat_min").get<double>();
    m.p_hat_median = r.at("p_hat_median").get<double>();
    m.p_hat_max = r.at("p_hat_max").get<double>();
    const auto& s = j.at("sampler");
    m.draws = s.at("draws").get<std::int64_t>();
    m.violations = s.at("violations").get<std::int64_t>();
    m.widened_regions = s.at("widened_regions").get<std::int64_t>();
    m.doublings = s.at("doublings").get<int>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("manifest: malformed: ") + e.what());
  }
  return m;
}

void set_partition(RunManifest& m, const EllipsoidalPartition& part) {
  m.partition_center.assign(part.center().begin(), part.center().end());
  m.partition_chol.clear();
  for (Eigen::Index i = 0; i < part.chol().rows(); ++i) {
    m.partition_chol.emplace_back(part.chol().row(i).head(i + 1).begin(), part.chol().row(i).head(i + 1).end());
  }
  m.partition_sqrt_c1 = part.ladder().sqrt_c1;
  m.partition_step = part.ladder().step;
  m.partition_count = part.size();
}

EllipsoidalPartition partition_from_manifest(const RunManifest& m) {
  const auto d = static_cast<Eigen::Index>(m.partition_center.size());
  if (d < 1 || static_cast<Eigen::Index>(m.partition_chol.size()) != d) {
    throw InvalidArgument("manifest: partition geometry is inconsistent");
  }
  Vector center = Eigen::Map<const Vector>(m.partition_center.data(), d);
  Matrix chol = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& row = m.partition_chol[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != i + 1) throw InvalidArgument("manifest: bad Cholesky row");
    for (Eigen::Index k = 0; k <= i; ++k) chol(i, k) = row[static_cast<std::size_t>(k)];
  }
  return EllipsoidalPartition::from_cholesky(std::move(center), std::move(chol),
                                             {m.partition_sqrt_c1, m.partition_step, m.partition_count});
}

// Density and summaries -------------------------------------------------------

DensityTable kde_1d(std::span<const double> samples, const GridSpec& grid) {
  if (samples.size() < 2) throw InvalidArgument("kde_1d: need at least two samples");
  if (grid.points < 2) throw InvalidArgument("kde_1d: need at least two grid points");
  const ColumnSummary s = summarize_column(samples);
  const double iqr = quantile(std::vector<double>(samples.begin(), samples.end()), 0.75) -
                     quantile(std::vector<double>(samples.begin(), samples.end()), 0.25);
  double spread = s.sd;
  if (iqr > 0) spread = std::min(spread, iqr / 1.34);
  if (!(spread > 0)) throw PointMassError("kde_1d: samples have zero spread");
  const double n = static_cast<double>(samples.size());
  DensityTable t;
  t.bandwidth = 0.9 * spread * std::pow(n, -0.2);
  const double lo = s.min - 3.0 * t.bandwidth;
  const double hi = s.max + 3.0 * t.bandwidth;
  const double norm = 1.0 / (n * t.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  t.grid.resize(grid.points);
  t.density.resize(grid.points);
  for (std::size_t k = 0; k < grid.points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid.points - 1);
    // Kernel contributions beyond 10 bandwidths are below 2e-22 and skipped.
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - 10.0 * t.bandwidth);
    const auto last = std::upper_bound(sorted.begin(), sorted.end(), x + 10.0 * t.bandwidth);
    double acc = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / t.bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    t.grid[k] = x;
    t.density[k] = acc * norm;
  }
  return t;
}

std::string density_to_csv(const DensityTable& table) {
  std::string out = "grid,density\n";
  for (std::size_t k = 0; k < table.grid.size(); ++k) {
    out += format_double(table.grid[k]) + ',' + format_double(table.density[k]) + '\n';
  }
  return out;
}

std::string summary_to_csv(const CsvTable& table) {
  std::string out = "column,mean,sd,q025,median,q975,min,max\n";
  for (const auto& name : table.columns) {
    const auto col = table.column(name);
    const auto s = summarize_column(col);
    out += name;
    for (double v : {s.mean, s.sd, s.q025, s.median, s.q975, s.min, s.max}) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace ditto

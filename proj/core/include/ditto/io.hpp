#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ditto/artifacts.hpp"
#include "ditto/geometry.hpp"
#include "ditto/perfect.hpp"
#include "ditto/stats.hpp"

namespace ditto {

/// Shortest text that parses back to exactly the same double (at most 17
/// significant digits).
std::string format_double(double v);
double parse_double_strict(std::string_view text);

std::string read_file(const std::string& path);
/// Writes atomically via a temporary file in the same directory.
void write_file(const std::string& path, std::string_view contents);

// Datasets --------------------------------------------------------------------

struct StoredDataset {
  ModelKind kind = ModelKind::normal_gamma;
  Dataset data;
  std::vector<double> true_params;
  std::uint64_t seed = 0;
};

std::string dataset_to_json(const StoredDataset& stored);
StoredDataset dataset_from_json(const std::string& text);

// Samples and tables ----------------------------------------------------------

std::string samples_to_csv(const SampleBatch& batch);
std::string provenance_to_csv(const SampleBatch& batch);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::string_view name) const;
};

/// Numeric CSV with a header row.
CsvTable parse_csv(const std::string& text);

/// Columns: i, log_volume, log_weight, log_s, log_S, p_hat, n_draws, slack, empty.
std::string regions_to_csv(std::span<const RegionEstimate> regions);
std::vector<RegionEstimate> regions_from_csv(const std::string& text);

std::string chain_to_csv(const std::vector<std::string>& names, const Matrix& natural_draws);
std::string chain_meta_json(const AcceptanceRates& rates, const std::string& config_json, std::int64_t kept);

// Manifest --------------------------------------------------------------------

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);
void set_partition(RunManifest& manifest, const EllipsoidalPartition& part);
EllipsoidalPartition partition_from_manifest(const RunManifest& manifest);

// Density and summaries -------------------------------------------------------

struct DensityTable {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

struct GridSpec {
  std::size_t points = 512;
};

/// Gaussian KDE with Silverman's bandwidth 0.9 min(sd, IQR / 1.34) n^{-1/5}
/// on [min - 3h, max + 3h]. Throws PointMassError for zero spread.
DensityTable kde_1d(std::span<const double> samples, const GridSpec& grid = {});
std::string density_to_csv(const DensityTable& table);

/// One line per column: name, mean, sd, q025, median, q975, min, max.
std::string summary_to_csv(const CsvTable& table);

}  // namespace ditto

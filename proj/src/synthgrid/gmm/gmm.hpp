#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthgrid/ingest/types.hpp"

namespace synthgrid::gmm {

struct GmmConfig {
  int components = 5;
  std::uint64_t seed = 0;
  int max_iter = 200;
  // Stop once the mean per-row log-likelihood improves by less than this.
  double tol = 1e-6;
  double variance_floor = 1e-6;
};

GmmConfig gmm_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const GmmConfig& c);

// Diagonal-covariance mixture. Row-major K x dims layout for means/variances.
struct GmmModel {
  Channel channel = Channel::kLoad;
  std::optional<NormalizationRecord> normalization;
  std::size_t dims = kStepsPerDay;
  double variance_floor = 1e-6;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
  // Total log-likelihood after every E-step.
  std::vector<double> log_likelihood_trace;
  std::vector<std::string> warnings;

  std::size_t components() const { return weights.size(); }
  std::span<const double> mean(std::size_t k) const { return {means.data() + k * dims, dims}; }
  std::span<const double> variance(std::size_t k) const { return {variances.data() + k * dims, dims}; }
};

// `data` is n rows of `dims` values.
GmmModel fit_gmm(std::span<const double> data, std::size_t dims, const GmmConfig& config);
// Requires a normalized set.
GmmModel fit_gmm(const DailyProfileSet& train, const GmmConfig& config);

double log_likelihood(const GmmModel& model, std::span<const double> data);
// n x K posterior component probabilities.
std::vector<double> responsibilities(const GmmModel& model, std::span<const double> data);

struct GmmSample {
  std::vector<double> values;        // n x dims, clipped to [0, 1]
  std::vector<std::size_t> component;  // component drawn for each row
};
GmmSample sample_rows(const GmmModel& model, std::int64_t n, std::uint64_t seed);
DailyProfileSet sample_gmm(const GmmModel& model, std::int64_t n, std::uint64_t seed);

// Free parameters: K-1 weights + 2*K*dims.
double bic(const GmmModel& model, std::size_t n_rows);

struct BicPoint {
  int components = 0;
  double log_likelihood = 0.0;
  double bic = 0.0;
};
std::vector<BicPoint> bic_sweep(const DailyProfileSet& train, std::span<const int> candidates,
                                const GmmConfig& base);

void save_gmm(const GmmModel& model, const std::filesystem::path& path);
GmmModel load_gmm(const std::filesystem::path& path);

}  // namespace synthgrid::gmm

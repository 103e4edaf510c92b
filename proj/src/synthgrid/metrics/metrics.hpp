#pragma once

#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthgrid/ingest/types.hpp"

namespace synthgrid::metrics {

// Per-bin mass added before renormalizing.
inline constexpr double kPdfSmoothing = 1e-10;

struct EmpiricalPdf {
  std::vector<double> edges;          // bins + 1, strictly increasing
  std::vector<double> probabilities;  // bins, sums to 1

  std::size_t bins() const { return probabilities.size(); }
};

// Equal-width histogram over [lo, hi]; the last bin is closed on the right.
// Samples outside the range are ignored.
EmpiricalPdf estimate_pdf(std::span<const double> samples, int bins, double lo, double hi);

// Natural-log KL(p || q). Both PDFs must share the same edges.
double kl_divergence(const EmpiricalPdf& p, const EmpiricalPdf& q);

double rbf_kernel(double x, double y, double sigma);

// Biased (V-statistic) squared MMD with an RBF kernel, diagonal terms included.
double mmd_squared(std::span<const double> x, std::span<const double> y, double sigma);

// Median of |a_i - a_j| over i < j. Inputs larger than `max_points` are
// thinned by an even stride first.
double median_pairwise_distance(std::span<const double> pooled, std::size_t max_points = 2000);

// Order-1 Wasserstein distance between two empirical distributions.
double wasserstein_1d(std::span<const double> x, std::span<const double> y);

struct EvaluationConfig {
  std::string model_name = "synthetic";
  int bins = 50;
  std::optional<double> sigma;  // median heuristic when unset
  std::size_t median_max_points = 2000;
};

EvaluationConfig evaluation_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const EvaluationConfig& c);

struct DistanceReport {
  Channel channel = Channel::kLoad;
  std::string model;
  double kl = 0.0;
  double wasserstein = 0.0;
  double mmd = 0.0;
  std::size_t n_real = 0;
  std::size_t n_synth = 0;
  double sigma = 0.0;
  int bins = 0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  std::string units = "W";
};

// Compares flattened day rows in raw units (normalized inputs are mapped
// back through their normalization record first).
DistanceReport evaluate_generator(const DailyProfileSet& real, const DailyProfileSet& synth,
                                  const EvaluationConfig& config);

nlohmann::ordered_json to_json(const DistanceReport& report);
DistanceReport report_from_json(const nlohmann::json& j);

// One row per model; KL, Wasserstein and MMD columns for every channel seen.
std::string summary_table_csv(std::span<const DistanceReport> reports);

}  // namespace synthgrid::metrics

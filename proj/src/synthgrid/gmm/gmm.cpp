#include "synthgrid/gmm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>

#include "synthgrid/common/error.hpp"
#include "synthgrid/common/json_fields.hpp"
#include "synthgrid/common/rng.hpp"

namespace synthgrid::gmm {
namespace {

constexpr double kPruneWeight = 1e-8;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// k-means++ seeding: first center uniform, then proportional to D^2.
std::vector<double> seed_means(std::span<const double> data, std::size_t n, std::size_t dims,
                               std::size_t k, Rng& rng) {
  std::vector<double> means;
  means.reserve(k * dims);
  auto row = [&](std::size_t i) { return data.subspan(i * dims, dims); };
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t first = pick(rng);
  means.insert(means.end(), row(first).begin(), row(first).end());

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    const std::span<const double> last(means.data() + (c - 1) * dims, dims);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(row(i), last));
      total += d2[i];
    }
    std::size_t chosen = pick(rng);
    if (total > 0.0) {
      const double u = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= u && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    means.insert(means.end(), row(chosen).begin(), row(chosen).end());
  }
  return means;
}

// Per-row log joint densities, n x K.
std::vector<double> log_joint(const GmmModel& m, std::span<const double> data, std::size_t n) {
  const std::size_t K = m.components();
  const std::size_t D = m.dims;
  std::vector<double> norm(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double s = std::log(m.weights[k]);
    for (std::size_t d = 0; d < D; ++d)
      s -= 0.5 * std::log(2.0 * std::numbers::pi * m.variances[k * D + d]);
    norm[k] = s;
  }
  std::vector<double> out(n * K);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = data.data() + i * D;
    for (std::size_t k = 0; k < K; ++k) {
      const double* mu = m.means.data() + k * D;
      const double* var = m.variances.data() + k * D;
      double q = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        const double r = x[d] - mu[d];
        q += r * r / var[d];
      }
      out[i * K + k] = norm[k] - 0.5 * q;
    }
  }
  return out;
}

// Turns log joints into responsibilities in place; returns total log-likelihood.
double normalize_rows(std::vector<double>& lj, std::size_t n, std::size_t K) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* r = lj.data() + i * K;
    const double mx = *std::max_element(r, r + K);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(r[k] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t k = 0; k < K; ++k) r[k] = std::exp(r[k] - lse);
    total += lse;
  }
  return total;
}

void check_rows(std::span<const double> data, std::size_t dims) {
  if (dims == 0 || data.size() % dims != 0) throw ContractError("data size is not a multiple of dims");
  for (double v : data)
    if (!std::isfinite(v)) throw ContractError("non-finite value in GMM input");
}

}  // namespace

GmmConfig gmm_config_from_json(const nlohmann::json& j) {
  GmmConfig c;
  JsonFields f(j, "gmm config");
  f.read("components", c.components);
  f.read("seed", c.seed);
  f.read("max_iter", c.max_iter);
  f.read("tol", c.tol);
  f.read("variance_floor", c.variance_floor);
  f.finish();
  if (c.components <= 0) throw ParameterError("gmm components must be positive");
  if (c.max_iter <= 0) throw ParameterError("gmm max_iter must be positive");
  if (!(c.tol >= 0.0)) throw ParameterError("gmm tol must be non-negative");
  if (!(c.variance_floor > 0.0)) throw ParameterError("gmm variance_floor must be positive");
  return c;
}

nlohmann::ordered_json to_json(const GmmConfig& c) {
  return {{"components", c.components},
          {"seed", c.seed},
          {"max_iter", c.max_iter},
          {"tol", c.tol},
          {"variance_floor", c.variance_floor}};
}

GmmModel fit_gmm(std::span<const double> data, std::size_t dims, const GmmConfig& config) {
  check_rows(data, dims);
  const std::size_t n = data.size() / dims;
  if (config.components <= 0 || static_cast<std::size_t>(config.components) > n)
    throw ParameterError("component count must lie in [1, n_rows]");
  if (config.max_iter < 0) throw ParameterError("max_iter must be non-negative");
  if (!(config.variance_floor > 0.0)) throw ParameterError("variance floor must be positive");

  Rng rng(config.seed);
  const auto K0 = static_cast<std::size_t>(config.components);
  GmmModel m;
  m.dims = dims;
  m.variance_floor = config.variance_floor;
  m.weights.assign(K0, 1.0 / static_cast<double>(K0));
  m.means = seed_means(data, n, dims, K0, rng);

  std::vector<double> global_var(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data[i * dims + d];
    mean /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (data[i * dims + d] - mean) * (data[i * dims + d] - mean);
    global_var[d] = std::max(v / static_cast<double>(n), config.variance_floor);
  }
  m.variances.clear();
  for (std::size_t k = 0; k < K0; ++k) m.variances.insert(m.variances.end(), global_var.begin(), global_var.end());

  for (int iter = 0;; ++iter) {
    const std::size_t K = m.components();
    auto resp = log_joint(m, data, n);
    const double ll = normalize_rows(resp, n, K);
    if (!std::isfinite(ll)) throw NumericError("non-finite log-likelihood during EM");
    const bool converged = !m.log_likelihood_trace.empty() &&
                           (ll - m.log_likelihood_trace.back()) / static_cast<double>(n) < config.tol;
    m.log_likelihood_trace.push_back(ll);
    if (converged || iter >= config.max_iter) break;

    // M-step.
    std::vector<double> nk(K, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < K; ++k) nk[k] += resp[i * K + k];
    GmmModel next = m;
    next.weights.clear();
    next.means.clear();
    next.variances.clear();
    for (std::size_t k = 0; k < K; ++k) {
      const double w = nk[k] / static_cast<double>(n);
      if (w < kPruneWeight) {
        m.warnings.push_back("iteration " + std::to_string(iter) + ": pruned collapsed component (weight " +
                             std::to_string(w) + ")");
        continue;
      }
      std::vector<double> mu(dims, 0.0), var(dims, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * K + k];
        for (std::size_t d = 0; d < dims; ++d) mu[d] += r * data[i * dims + d];
      }
      for (double& v : mu) v /= nk[k];
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * K + k];
        for (std::size_t d = 0; d < dims; ++d) {
          const double e = data[i * dims + d] - mu[d];
          var[d] += r * e * e;
        }
      }
      for (double& v : var) v = std::max(v / nk[k], config.variance_floor);
      next.weights.push_back(w);
      next.means.insert(next.means.end(), mu.begin(), mu.end());
      next.variances.insert(next.variances.end(), var.begin(), var.end());
    }
    double wsum = 0.0;
    for (double w : next.weights) wsum += w;
    for (double& w : next.weights) w /= wsum;
    next.warnings = m.warnings;
    m = std::move(next);
  }
  return m;
}

GmmModel fit_gmm(const DailyProfileSet& train, const GmmConfig& config) {
  if (!train.normalized()) throw ContractError("GMM fit expects a normalized profile set");
  GmmModel m = fit_gmm(train.values(), kStepsPerDay, config);
  m.channel = train.channel();
  m.normalization = train.normalization();
  return m;
}

double log_likelihood(const GmmModel& model, std::span<const double> data) {
  check_rows(data, model.dims);
  const std::size_t n = data.size() / model.dims;
  auto lj = log_joint(model, data, n);
  return normalize_rows(lj, n, model.components());
}

std::vector<double> responsibilities(const GmmModel& model, std::span<const double> data) {
  check_rows(data, model.dims);
  const std::size_t n = data.size() / model.dims;
  auto lj = log_joint(model, data, n);
  normalize_rows(lj, n, model.components());
  return lj;
}

GmmSample sample_rows(const GmmModel& model, std::int64_t n, std::uint64_t seed) {
  if (n <= 0) throw ParameterError("sample count must be positive");
  if (model.components() == 0) throw ContractError("model has no components");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t D = model.dims;
  GmmSample out;
  out.values.resize(static_cast<std::size_t>(n) * D);
  out.component.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const double u = unit(rng);
    std::size_t k = 0;
    double acc = model.weights[0];
    while (k + 1 < model.components() && u >= acc) acc += model.weights[++k];
    out.component[i] = k;
    for (std::size_t d = 0; d < D; ++d) {
      const double v = model.means[k * D + d] + std::sqrt(model.variances[k * D + d]) * normal(rng);
      out.values[i * D + d] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

DailyProfileSet sample_gmm(const GmmModel& model, std::int64_t n, std::uint64_t seed) {
  if (model.dims != kStepsPerDay) throw ContractError("model is not a daily-profile model");
  auto s = sample_rows(model, n, seed);
  DailyProfileSet set(model.channel, std::move(s.values));
  set.set_normalization(model.normalization, true);
  return set;
}

double bic(const GmmModel& model, std::size_t n_rows) {
  const auto K = static_cast<double>(model.components());
  const double params = (K - 1.0) + 2.0 * K * static_cast<double>(model.dims);
  return -2.0 * model.log_likelihood_trace.back() + params * std::log(static_cast<double>(n_rows));
}

std::vector<BicPoint> bic_sweep(const DailyProfileSet& train, std::span<const int> candidates,
                                const GmmConfig& base) {
  std::vector<BicPoint> out;
  for (int k : candidates) {
    GmmConfig cfg = base;
    cfg.components = k;
    const auto m = fit_gmm(train, cfg);
    out.push_back({k, m.log_likelihood_trace.back(), bic(m, train.days())});
  }
  return out;
}

void save_gmm(const GmmModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["model_type"] = "gmm";
  j["channel"] = to_string(model.channel);
  j["k"] = model.components();
  j["dims"] = model.dims;
  j["variance_floor"] = model.variance_floor;
  j["weights"] = model.weights;
  auto means = nlohmann::ordered_json::array();
  auto vars = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < model.components(); ++k) {
    means.push_back(std::vector<double>(model.mean(k).begin(), model.mean(k).end()));
    vars.push_back(std::vector<double>(model.variance(k).begin(), model.variance(k).end()));
  }
  j["means"] = means;
  j["variances"] = vars;
  if (model.normalization)
    j["normalization"] = {{"min", model.normalization->min}, {"max", model.normalization->max}};
  else
    j["normalization"] = nullptr;
  j["log_likelihood_trace"] = model.log_likelihood_trace;
  j["warnings"] = model.warnings;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

GmmModel load_gmm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  GmmModel m;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("model_type").get<std::string>() != "gmm") throw SchemaError(path.string() + ": not a GMM checkpoint");
    m.channel = parse_channel(j.at("channel").get<std::string>());
    m.dims = j.at("dims").get<std::size_t>();
    m.variance_floor = j.value("variance_floor", 1e-6);
    m.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& row : j.at("means")) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != m.dims) throw SchemaError(path.string() + ": mean row has wrong width");
      m.means.insert(m.means.end(), r.begin(), r.end());
    }
    for (const auto& row : j.at("variances")) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != m.dims) throw SchemaError(path.string() + ": variance row has wrong width");
      m.variances.insert(m.variances.end(), r.begin(), r.end());
    }
    if (j.contains("normalization") && !j["normalization"].is_null())
      m.normalization = NormalizationRecord{j["normalization"].at("min").get<double>(),
                                            j["normalization"].at("max").get<double>()};
    m.log_likelihood_trace = j.value("log_likelihood_trace", std::vector<double>{});
    m.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  const std::size_t K = m.weights.size();
  if (K == 0 || m.means.size() != K * m.dims || m.variances.size() != K * m.dims)
    throw SchemaError(path.string() + ": inconsistent component shapes");
  double wsum = 0.0;
  for (double w : m.weights) {
    if (!(w >= 0.0)) throw SchemaError(path.string() + ": negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw SchemaError(path.string() + ": weights do not sum to 1");
  for (double v : m.variances)
    if (!(v > 0.0)) throw SchemaError(path.string() + ": non-positive variance");
  return m;
}

}  // namespace synthgrid::gmm

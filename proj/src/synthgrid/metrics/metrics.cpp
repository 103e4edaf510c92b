#include "synthgrid/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "synthgrid/common/error.hpp"
#include "synthgrid/common/json_fields.hpp"
#include "synthgrid/common/numfmt.hpp"
#include "synthgrid/ingest/ingest.hpp"

namespace synthgrid::metrics {

EmpiricalPdf estimate_pdf(std::span<const double> samples, int bins, double lo, double hi) {
  if (bins <= 0) throw ParameterError("bin count must be positive");
  if (!(lo < hi)) throw ParameterError("histogram range must satisfy lo < hi");
  if (samples.empty()) throw ParameterError("need at least one sample");

  const auto nb = static_cast<std::size_t>(bins);
  EmpiricalPdf pdf;
  pdf.edges.resize(nb + 1);
  const double width = (hi - lo) / static_cast<double>(nb);
  for (std::size_t i = 0; i <= nb; ++i) pdf.edges[i] = lo + width * static_cast<double>(i);
  pdf.edges[nb] = hi;

  std::vector<double> counts(nb, 0.0);
  double inside = 0.0;
  for (double v : samples) {
    if (!(v >= lo && v <= hi)) continue;
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= nb) b = nb - 1;
    counts[b] += 1.0;
    inside += 1.0;
  }
  if (inside == 0.0) throw ParameterError("no samples fall inside the histogram range");

  pdf.probabilities.resize(nb);
  const double denom = 1.0 + kPdfSmoothing * static_cast<double>(nb);
  for (std::size_t i = 0; i < nb; ++i) pdf.probabilities[i] = (counts[i] / inside + kPdfSmoothing) / denom;
  return pdf;
}

double kl_divergence(const EmpiricalPdf& p, const EmpiricalPdf& q) {
  if (p.edges != q.edges) throw ContractError("KL divergence needs identical bin edges");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.bins(); ++i) {
    if (p.probabilities[i] > 0.0) kl += p.probabilities[i] * std::log(p.probabilities[i] / q.probabilities[i]);
  }
  return std::max(kl, 0.0);
}

double rbf_kernel(double x, double y, double sigma) {
  const double d = x - y;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

namespace {

// Sum over all ordered pairs of one sample, using symmetry.
double self_kernel_sum(std::span<const double> a, double inv_two_sigma2) {
  double off = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    double row = 0.0;
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double d = ai - a[j];
      row += std::exp(-d * d * inv_two_sigma2);
    }
    off += row;
  }
  return 2.0 * off + static_cast<double>(a.size());
}

}  // namespace

double mmd_squared(std::span<const double> x, std::span<const double> y, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("RBF bandwidth must be positive");
  if (x.empty() || y.empty()) throw ParameterError("MMD needs non-empty samples");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  double kxy = 0.0;
  for (double xi : x) {
    double row = 0.0;
    for (double yj : y) {
      const double d = xi - yj;
      row += std::exp(-d * d * inv);
    }
    kxy += row;
  }
  const double v = self_kernel_sum(x, inv) / (n * n) - 2.0 * kxy / (n * m) + self_kernel_sum(y, inv) / (m * m);
  return std::max(v, 0.0);
}

double median_pairwise_distance(std::span<const double> pooled, std::size_t max_points) {
  if (pooled.size() < 2) throw ParameterError("median heuristic needs at least two samples");
  std::vector<double> pts;
  if (max_points >= 2 && pooled.size() > max_points) {
    const double stride = static_cast<double>(pooled.size()) / static_cast<double>(max_points);
    for (std::size_t i = 0; i < max_points; ++i)
      pts.push_back(pooled[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
  } else {
    pts.assign(pooled.begin(), pooled.end());
  }
  std::vector<double> d;
  d.reserve(pts.size() * (pts.size() - 1) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d.push_back(std::abs(pts[i] - pts[j]));
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

double wasserstein_1d(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ParameterError("Wasserstein distance needs non-empty samples");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
  }
  // Integral of |F_a - F_b| over the merged support.
  const auto n = static_cast<double>(a.size());
  const auto m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(a[0], b[0]);
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    const double next = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    total += std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m) * (next - prev);
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
    prev = next;
  }
  return total;
}

DistanceReport evaluate_generator(const DailyProfileSet& real, const DailyProfileSet& synth,
                                  const EvaluationConfig& config) {
  if (real.channel() != synth.channel())
    throw ContractError("channel mismatch: real is " + std::string(to_string(real.channel())) +
                        ", synthetic is " + std::string(to_string(synth.channel())));
  if (real.empty() || synth.empty()) throw ParameterError("evaluation needs non-empty sets");
  const DailyProfileSet r = real.normalized() ? ingest::denormalize(real) : real;
  const DailyProfileSet s = synth.normalized() ? ingest::denormalize(synth) : synth;
  const auto& xr = r.values();
  const auto& xs = s.values();

  DistanceReport rep;
  rep.channel = real.channel();
  rep.model = config.model_name;
  rep.n_real = xr.size();
  rep.n_synth = xs.size();
  rep.bins = config.bins;

  const auto [rlo, rhi] = std::minmax_element(xr.begin(), xr.end());
  const auto [slo, shi] = std::minmax_element(xs.begin(), xs.end());
  rep.range_lo = std::min(*rlo, *slo);
  rep.range_hi = std::max(*rhi, *shi);
  if (rep.range_hi > rep.range_lo) {
    // KL(synthetic || real).
    const auto ps = estimate_pdf(xs, config.bins, rep.range_lo, rep.range_hi);
    const auto pr = estimate_pdf(xr, config.bins, rep.range_lo, rep.range_hi);
    rep.kl = kl_divergence(ps, pr);
  }

  rep.wasserstein = wasserstein_1d(xr, xs);

  if (config.sigma) {
    rep.sigma = *config.sigma;
  } else {
    std::vector<double> pooled(xr.begin(), xr.end());
    pooled.insert(pooled.end(), xs.begin(), xs.end());
    rep.sigma = median_pairwise_distance(pooled, config.median_max_points);
    if (!(rep.sigma > 0.0)) rep.sigma = rep.range_hi > rep.range_lo ? (rep.range_hi - rep.range_lo) / 2.0 : 1.0;
  }
  rep.mmd = mmd_squared(xr, xs, rep.sigma);
  return rep;
}

EvaluationConfig evaluation_config_from_json(const nlohmann::json& j) {
  EvaluationConfig c;
  JsonFields f(j, "evaluate config");
  f.read("model_name", c.model_name);
  f.read("bins", c.bins);
  double sigma = 0.0;
  if (f.read("sigma", sigma)) c.sigma = sigma;
  f.read("median_max_points", c.median_max_points);
  f.finish();
  if (c.bins <= 0) throw ParameterError("bins must be positive");
  if (c.sigma && !(*c.sigma > 0.0)) throw ParameterError("sigma must be positive");
  if (c.median_max_points < 2) throw ParameterError("median_max_points must be at least 2");
  return c;
}

nlohmann::ordered_json to_json(const EvaluationConfig& c) {
  nlohmann::ordered_json j{{"model_name", c.model_name}, {"bins", c.bins}};
  j["sigma"] = c.sigma ? nlohmann::ordered_json(*c.sigma) : nlohmann::ordered_json(nullptr);
  j["median_max_points"] = c.median_max_points;
  return j;
}

nlohmann::ordered_json to_json(const DistanceReport& r) {
  nlohmann::ordered_json j;
  j["channel"] = to_string(r.channel);
  j["model"] = r.model;
  j["kl"] = r.kl;
  j["wasserstein"] = r.wasserstein;
  j["mmd"] = r.mmd;
  j["n_real"] = r.n_real;
  j["n_synth"] = r.n_synth;
  j["sigma"] = r.sigma;
  j["bins"] = r.bins;
  j["range"] = {r.range_lo, r.range_hi};
  j["units"] = r.units;
  return j;
}

DistanceReport report_from_json(const nlohmann::json& j) {
  try {
    DistanceReport r;
    r.channel = parse_channel(j.at("channel").get<std::string>());
    r.model = j.at("model").get<std::string>();
    r.kl = j.at("kl").get<double>();
    r.wasserstein = j.at("wasserstein").get<double>();
    r.mmd = j.at("mmd").get<double>();
    r.n_real = j.at("n_real").get<std::size_t>();
    r.n_synth = j.at("n_synth").get<std::size_t>();
    r.sigma = j.at("sigma").get<double>();
    r.bins = j.at("bins").get<int>();
    r.range_lo = j.at("range").at(0).get<double>();
    r.range_hi = j.at("range").at(1).get<double>();
    r.units = j.value("units", "W");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("distance report: ") + e.what());
  }
}

std::string summary_table_csv(std::span<const DistanceReport> reports) {
  std::set<Channel> channels;
  std::vector<std::string> models;
  std::map<std::pair<std::string, Channel>, const DistanceReport*> cell;
  for (const auto& r : reports) {
    channels.insert(r.channel);
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    cell[{r.model, r.channel}] = &r;
  }
  std::ostringstream os;
  os << "model";
  for (auto c : channels)
    for (const char* metric : {"KL", "Wasserstein", "MMD"}) os << ',' << to_string(c) << '_' << metric;
  os << '\n';
  for (const auto& m : models) {
    os << m;
    for (auto c : channels) {
      auto it = cell.find({m, c});
      if (it == cell.end()) {
        os << ",,,";
        continue;
      }
      os << ',' << format_double(it->second->kl) << ',' << format_double(it->second->wasserstein) << ','
         << format_double(it->second->mmd);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace synthgrid::metrics

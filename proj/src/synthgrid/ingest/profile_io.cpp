#include "synthgrid/ingest/profile_io.hpp"

#include <fstream>
#include <json.hpp>

#include "synthgrid/common/error.hpp"
#include "synthgrid/common/numfmt.hpp"
#include "synthgrid/ingest/csv.hpp"

namespace synthgrid::ingest {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void save_profile_set(const DailyProfileSet& set, const std::filesystem::path& csv_path) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + csv_path.string());
    for (std::size_t d = 0; d < set.days(); ++d) {
      const auto row = set.row(d);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ',';
        out << format_double(row[j]);
      }
      out << '\n';
    }
    if (!out) throw IoError("write failed for " + csv_path.string());
  }

  nlohmann::ordered_json meta;
  meta["channel"] = to_string(set.channel());
  meta["days"] = set.days();
  meta["steps_per_day"] = kStepsPerDay;
  meta["units"] = set.normalized() ? "normalized" : "W";
  auto dates = nlohmann::ordered_json::array();
  for (auto d : set.day_numbers()) dates.push_back(format_date(d));
  meta["dates"] = dates;
  meta["normalized"] = set.normalized();
  if (set.normalization())
    meta["normalization"] = {{"min", set.normalization()->min}, {"max", set.normalization()->max}};
  else
    meta["normalization"] = nullptr;

  const auto side = sidecar_path(csv_path);
  std::ofstream js(side, std::ios::binary);
  if (!js) throw IoError("cannot write " + side.string());
  js << meta.dump(2) << '\n';
}

DailyProfileSet load_profile_set(const std::filesystem::path& csv_path,
                                 std::optional<Channel> fallback_channel) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path.string());

  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != kStepsPerDay)
      throw RowError(lineno, "expected 96 columns, found " + std::to_string(fields.size()));
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(f, v) || !std::isfinite(v)) throw RowError(lineno, "unparsable value '" + f + "'");
      values.push_back(v);
    }
  }

  Channel channel = fallback_channel.value_or(Channel::kLoad);
  std::vector<std::int64_t> days;
  std::optional<NormalizationRecord> rec;
  bool normalized = false;
  const auto side = sidecar_path(csv_path);
  if (std::filesystem::exists(side)) {
    std::ifstream js(side);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(js);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(side.string() + ": " + e.what());
    }
    try {
      channel = parse_channel(meta.at("channel").get<std::string>());
      for (const auto& d : meta.value("dates", nlohmann::json::array())) days.push_back(parse_date(d.get<std::string>()));
      normalized = meta.value("normalized", false);
      if (meta.contains("normalization") && !meta["normalization"].is_null())
        rec = NormalizationRecord{meta["normalization"].at("min").get<double>(),
                                  meta["normalization"].at("max").get<double>()};
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(side.string() + ": " + e.what());
    }
  } else if (!fallback_channel) {
    throw SchemaError("no sidecar metadata for " + csv_path.string() + " and no channel given");
  }
  if (!days.empty() && days.size() * kStepsPerDay != values.size())
    throw SchemaError(side.string() + ": date count does not match row count");

  DailyProfileSet set(channel, std::move(values), std::move(days));
  if (normalized && !rec) throw SchemaError("normalized set without normalization record");
  set.set_normalization(rec, normalized);
  return set;
}

}  // namespace synthgrid::ingest

#include "synthgrid/ingest/types.hpp"

#include "synthgrid/common/error.hpp"

namespace synthgrid {

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::kLoad:
      return "load";
    case Channel::kPv:
      return "pv";
    case Channel::kEv:
      return "ev";
  }
  return "load";
}

Channel parse_channel(std::string_view name) {
  if (name == "load") return Channel::kLoad;
  if (name == "pv") return Channel::kPv;
  if (name == "ev") return Channel::kEv;
  throw ParameterError("unknown channel '" + std::string(name) + "' (expected load, pv or ev)");
}

DailyProfileSet::DailyProfileSet(Channel channel, std::vector<double> values,
                                 std::vector<std::int64_t> days)
    : channel_(channel), values_(std::move(values)), days_(std::move(days)) {
  if (values_.size() % kStepsPerDay != 0)
    throw ContractError("profile matrix size " + std::to_string(values_.size()) +
                        " is not a multiple of 96");
  if (!days_.empty() && days_.size() != values_.size() / kStepsPerDay)
    throw ContractError("day list length does not match row count");
}

DailyProfileSet DailyProfileSet::subset(std::size_t first, std::size_t count) const {
  if (first + count > days()) throw ContractError("subset out of range");
  std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(first * kStepsPerDay),
                        values_.begin() + static_cast<std::ptrdiff_t>((first + count) * kStepsPerDay));
  std::vector<std::int64_t> d;
  if (!days_.empty())
    d.assign(days_.begin() + static_cast<std::ptrdiff_t>(first),
             days_.begin() + static_cast<std::ptrdiff_t>(first + count));
  DailyProfileSet out(channel_, std::move(v), std::move(d));
  out.set_normalization(record_, normalized_);
  return out;
}

}  // namespace synthgrid

#pragma once

#include <json.hpp>
#include <set>
#include <string>

#include "synthgrid/common/error.hpp"

namespace synthgrid {

// Reads optional keys from a JSON object into existing defaults and rejects
// keys nobody asked for.
class JsonFields {
 public:
  JsonFields(const nlohmann::json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw SchemaError(context_ + ": expected a JSON object");
  }

  template <typename T>
  bool read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return false;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw SchemaError(context_ + ": key '" + key + "' has the wrong type");
    }
    return true;
  }

  // Key consumed elsewhere (sub-objects, paths handled by the caller).
  void allow(const char* key) { seen_.insert(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw SchemaError(context_ + ": unknown key '" + key + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace synthgrid

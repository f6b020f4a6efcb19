#pragma once

// Validator for the subset of JSON Schema (2020-12) used by the published
// schema: type, const, enum, properties, required, additionalProperties,
// items, min/maxItems, minLength, (exclusive)minimum/maximum and local $ref.
// Unknown keywords are rejected so the schema cannot silently outgrow it.

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace lab {

using nlohmann::json;

class SchemaValidator {
 public:
  explicit SchemaValidator(json schema) : root_(std::move(schema)) {}

  /// Errors for `doc` against the subschema at `pointer` (e.g. "/$defs/run_config").
  std::vector<std::string> validate(const json& doc, const std::string& pointer) const {
    std::vector<std::string> errors;
    check(doc, resolve("#" + pointer), "", errors);
    return errors;
  }

 private:
  json root_;

  const json& resolve(const std::string& ref) const {
    if (ref.rfind("#", 0) != 0) throw std::invalid_argument("schema: only local $ref is supported: " + ref);
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  static bool is_integer(const json& v) {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && d == std::floor(d);
  }

  static bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "number") return v.is_number();
    if (t == "integer") return is_integer(v);
    throw std::invalid_argument("schema: unknown type " + t);
  }

  static std::string where(const std::string& path) { return path.empty() ? "(root)" : path; }

  void check(const json& v, const json& s, const std::string& path, std::vector<std::string>& err) const {
    static const std::set<std::string> known{"$schema", "$id", "title", "description", "$defs", "$ref", "type", "const",
                                             "enum", "properties", "required", "additionalProperties", "items",
                                             "minItems", "maxItems", "minLength", "minimum", "maximum",
                                             "exclusiveMinimum", "exclusiveMaximum"};
    for (const auto& [k, _] : s.items())
      if (!known.count(k)) throw std::invalid_argument("schema: unsupported keyword " + k);

    if (s.contains("$ref")) check(v, resolve(s["$ref"].get<std::string>()), path, err);
    if (s.contains("type")) {
      const json& t = s["type"];
      bool ok = false;
      if (t.is_string()) ok = has_type(v, t.get<std::string>());
      else
        for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
      if (!ok) {
        err.push_back(where(path) + ": expected type " + t.dump() + ", got " + v.type_name());
        return;
      }
    }
    if (s.contains("const") && v != s["const"]) err.push_back(where(path) + ": must equal " + s["const"].dump());
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& x : s["enum"]) found = found || v == x;
      if (!found) err.push_back(where(path) + ": must be one of " + s["enum"].dump());
    }
    if (v.is_number()) {
      const double d = v.get<double>();
      if (s.contains("minimum") && !(d >= s["minimum"].get<double>()))
        err.push_back(where(path) + ": must be >= " + s["minimum"].dump());
      if (s.contains("maximum") && !(d <= s["maximum"].get<double>()))
        err.push_back(where(path) + ": must be <= " + s["maximum"].dump());
      if (s.contains("exclusiveMinimum") && !(d > s["exclusiveMinimum"].get<double>()))
        err.push_back(where(path) + ": must be > " + s["exclusiveMinimum"].dump());
      if (s.contains("exclusiveMaximum") && !(d < s["exclusiveMaximum"].get<double>()))
        err.push_back(where(path) + ": must be < " + s["exclusiveMaximum"].dump());
    }
    if (v.is_string() && s.contains("minLength") && v.get<std::string>().size() < s["minLength"].get<std::size_t>())
      err.push_back(where(path) + ": string too short");
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
        err.push_back(where(path) + ": needs at least " + s["minItems"].dump() + " items");
      if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
        err.push_back(where(path) + ": allows at most " + s["maxItems"].dump() + " items");
      if (s.contains("items"))
        for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], path + "/" + std::to_string(i), err);
    }
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& r : s["required"])
          if (!v.contains(r.get<std::string>())) err.push_back(where(path) + ": missing required key " + r.dump());
      const json* props = s.contains("properties") ? &s["properties"] : nullptr;
      for (const auto& [k, x] : v.items()) {
        if (props && props->contains(k)) check(x, (*props)[k], path + "/" + k, err);
        else if (s.contains("additionalProperties") && s["additionalProperties"] == false)
          err.push_back(where(path) + ": unknown key \"" + k + "\"");
      }
    }
  }
};

}  // namespace lab

#include "chartreview/json_schema.hpp"

#include "chartreview/error.hpp"

namespace chartreview {

using nlohmann::json;

namespace {

bool type_ok(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "number") return v.is_number();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

const json& resolve(const json& schema, const json& root) {
  if (!schema.contains("$ref")) return schema;
  auto ref = schema["$ref"].get<std::string>();
  if (ref.rfind("#/", 0) != 0) throw Error(ErrorCode::InvalidArgument, "unsupported $ref " + ref);
  return root.at(json::json_pointer(ref.substr(1)));
}

void walk(const json& v, const json& raw, const json& root, const std::string& ptr, std::vector<SchemaIssue>& out) {
  const json& s = resolve(raw, root);
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) ok = ok || type_ok(v, t.get<std::string>());
    } else {
      ok = type_ok(v, s["type"].get<std::string>());
    }
    if (!ok) {
      out.push_back({ptr, "expected type " + s["type"].dump()});
      return;
    }
  }
  if (s.contains("const") && v != s["const"]) out.push_back({ptr, "expected " + s["const"].dump()});
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) out.push_back({ptr, "value not in enum"});
  }
  if (v.is_number()) {
    if (s.contains("minimum") && v.get<double>() < s["minimum"].get<double>()) out.push_back({ptr, "below minimum"});
    if (s.contains("maximum") && v.get<double>() > s["maximum"].get<double>()) out.push_back({ptr, "above maximum"});
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& k : s["required"]) {
        if (!v.contains(k.get<std::string>())) out.push_back({ptr + "/" + k.get<std::string>(), "required"});
      }
    }
    const json* props = s.contains("properties") ? &s["properties"] : nullptr;
    for (const auto& [k, child] : v.items()) {
      if (props && props->contains(k)) {
        walk(child, (*props)[k], root, ptr + "/" + k, out);
      } else if (s.contains("additionalProperties") && s["additionalProperties"].is_boolean() &&
                 !s["additionalProperties"].get<bool>()) {
        out.push_back({ptr + "/" + k, "unexpected property"});
      }
    }
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) out.push_back({ptr, "too few items"});
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) out.push_back({ptr, "too many items"});
    if (s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) walk(v[i], s["items"], root, ptr + "/" + std::to_string(i), out);
    }
  }
}

}  // namespace

std::vector<SchemaIssue> validate_schema(const json& instance, const json& schema) {
  std::vector<SchemaIssue> out;
  walk(instance, schema, schema, "", out);
  return out;
}

void require_schema(const json& instance, const json& schema) {
  auto issues = validate_schema(instance, schema);
  if (!issues.empty()) throw SchemaError(issues.front().pointer, issues.front().message);
}

}  // namespace chartreview

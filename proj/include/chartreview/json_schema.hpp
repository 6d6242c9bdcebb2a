#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace chartreview {

// Validator for the JSON Schema subset used by docs/*.schema.json:
// type, properties, required, additionalProperties (bool), items, minItems,
// maxItems, enum, const, minimum, maximum, $ref to "#/$defs/...".
struct SchemaIssue {
  std::string pointer;
  std::string message;
};

std::vector<SchemaIssue> validate_schema(const nlohmann::json& instance, const nlohmann::json& schema);

// SchemaError on the first issue.
void require_schema(const nlohmann::json& instance, const nlohmann::json& schema);

}  // namespace chartreview

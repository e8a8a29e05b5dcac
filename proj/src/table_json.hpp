#pragma once

// Shared JSON conversions for the table text format; internal to the library.

#include "json.hpp"
#include "tabbench/table.hpp"

namespace tabbench::detail {

nlohmann::json record_to_json(const SeedRecord& rec);
SeedRecord record_from_json(const nlohmann::json& j);

nlohmann::json entry_to_json(const EvalEntry& e);
EvalEntry entry_from_json(const nlohmann::json& j);

nlohmann::json space_to_json(const ConfigSpace& space);
ConfigSpace space_from_json(const nlohmann::json& j);

}  // namespace tabbench::detail

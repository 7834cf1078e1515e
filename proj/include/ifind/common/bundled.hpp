#pragma once

#include <string_view>

namespace ifind::bundled {

// Text files compiled into the library (presets, views, questionnaire).
// Keys are paths relative to data/, e.g. "presets/ifind-v2.json".
// Returns an empty view for unknown keys.
std::string_view lookup(std::string_view name);

}  // namespace ifind::bundled

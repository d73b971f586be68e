#pragma once

#include <string>
#include <string_view>

#include "san/params.hpp"

namespace san {

/// Applies one `key = value [unit]` setting. Accepted unit suffixes depend on
/// the field: dBm or W for powers, per_km2 or per_m2 for densities, MHz/kHz/Hz,
/// Mbps/kbps/bps, m, dBi or linear, rad or deg. A bare number is taken as SI.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Parses a structured-text config (one setting per line, '#' comments) on top
/// of `base`. Missing files raise ValidationError naming the path.
ScenarioConfig load_config_file(const std::string& path, ScenarioConfig base = {});

ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base = {});

/// Every key accepted by apply_setting.
const std::vector<std::string>& config_keys();

} // namespace san

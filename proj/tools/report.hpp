#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "san/analytic.hpp"
#include "san/optimizer.hpp"
#include "san/simulator.hpp"

namespace san::cli {

using nlohmann::json;

inline constexpr const char* version = "0.1.0";

json to_json(const ScenarioConfig& cfg);
json to_json(const sim::Estimate& e);
json to_json(const optimizer::OptimizationResult& r, bool with_trace);
json analytic_report(const ScenarioConfig& cfg, double p_tc, const analytic::ModelOptions& options);
json simulation_report(const sim::MonteCarloReport& r);

/// FNV-1a of the canonical JSON form of the config, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

/// RFC-4180 writer preceded by a `# config-hash=..., seed=..., version=...` line.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const ScenarioConfig& cfg, std::uint64_t seed);
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

/// Shortest round-trip decimal form; empty for NaN.
std::string format_number(double v);

} // namespace san::cli

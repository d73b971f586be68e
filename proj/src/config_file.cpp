#include "san/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace san {

namespace {

enum class Quantity { density, power, dimensionless, bandwidth, rate, distance, gain, angle, power_density, flag };

struct Field {
    Quantity kind;
    std::function<void(ScenarioConfig&, double)> set;
};

const std::map<std::string, Field, std::less<>>& fields()
{
    static const std::map<std::string, Field, std::less<>> table = {
        {"lambda_macro", {Quantity::density, [](ScenarioConfig& c, double v) { c.lambda_macro = v; }}},
        {"lambda_small", {Quantity::density, [](ScenarioConfig& c, double v) { c.lambda_small = v; }}},
        {"lambda_user", {Quantity::density, [](ScenarioConfig& c, double v) { c.lambda_user = v; }}},
        {"p_macro", {Quantity::power, [](ScenarioConfig& c, double v) { c.p_macro = v; }}},
        {"p_small", {Quantity::power, [](ScenarioConfig& c, double v) { c.p_small = v; }}},
        {"alpha", {Quantity::dimensionless, [](ScenarioConfig& c, double v) { c.alpha = v; }}},
        {"beta", {Quantity::dimensionless, [](ScenarioConfig& c, double v) { c.beta = v; }}},
        {"bandwidth", {Quantity::bandwidth, [](ScenarioConfig& c, double v) { c.bandwidth = v; }}},
        {"rate_threshold", {Quantity::rate, [](ScenarioConfig& c, double v) { c.rate_threshold = v; }}},
        {"u_low", {Quantity::dimensionless, [](ScenarioConfig& c, double v) { c.u_low = v; }}},
        {"u_high", {Quantity::dimensionless, [](ScenarioConfig& c, double v) { c.u_high = v; }}},
        {"r_hat_a", {Quantity::distance, [](ScenarioConfig& c, double v) { c.r_hat_a = v; }}},
        {"g_main", {Quantity::gain, [](ScenarioConfig& c, double v) { c.g_main = v; }}},
        {"beam_width", {Quantity::angle, [](ScenarioConfig& c, double v) { c.beam_width = v; }}},
        {"eta_safety", {Quantity::power_density, [](ScenarioConfig& c, double v) { c.eta_safety = v; }}},
        {"unit_energy", {Quantity::power, [](ScenarioConfig& c, double v) { c.unit_energy = v; }}},
        {"battery_capacity_units",
         {Quantity::dimensionless,
          [](ScenarioConfig& c, double v) { c.battery_capacity_units = static_cast<int>(std::lround(v)); }}},
        {"fold_gain_into_rc", {Quantity::flag, [](ScenarioConfig& c, double v) { c.fold_gain_into_rc = v != 0.0; }}},
    };
    return table;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double convert(Quantity kind, double number, std::string_view unit, std::string_view key)
{
    auto bad_unit = [&]() -> double {
        throw ValidationError({"unit '" + std::string(unit) + "' is not valid for " + std::string(key)});
    };
    if (unit.empty())
        return number;
    switch (kind) {
    case Quantity::density:
        if (unit == "per_km2")
            return per_km2_to_per_m2(number);
        if (unit == "per_m2")
            return number;
        return bad_unit();
    case Quantity::power:
        if (unit == "dBm")
            return dbm_to_watts(number);
        if (unit == "W")
            return number;
        return bad_unit();
    case Quantity::bandwidth:
        if (unit == "MHz")
            return number * 1e6;
        if (unit == "kHz")
            return number * 1e3;
        if (unit == "Hz")
            return number;
        return bad_unit();
    case Quantity::rate:
        if (unit == "Mbps")
            return number * 1e6;
        if (unit == "kbps")
            return number * 1e3;
        if (unit == "bps")
            return number;
        return bad_unit();
    case Quantity::distance:
        if (unit == "m")
            return number;
        if (unit == "cm")
            return number * 1e-2;
        return bad_unit();
    case Quantity::gain:
        if (unit == "dBi")
            return dbi_to_linear(number);
        if (unit == "linear")
            return number;
        return bad_unit();
    case Quantity::angle:
        if (unit == "rad")
            return number;
        if (unit == "deg")
            return number * std::numbers::pi / 180.0;
        return bad_unit();
    case Quantity::power_density:
        if (unit == "W_per_m2")
            return number;
        return bad_unit();
    case Quantity::dimensionless:
    case Quantity::flag:
        return bad_unit();
    }
    return number;
}

} // namespace

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value)
{
    const auto it = fields().find(key);
    if (it == fields().end())
        throw ValidationError({"unknown config key '" + std::string(key) + "'"});

    value = trim(value);
    if (it->second.kind == Quantity::flag && (value == "true" || value == "false")) {
        it->second.set(cfg, value == "true" ? 1.0 : 0.0);
        return;
    }

    double number = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), number);
    if (ec != std::errc())
        throw ValidationError({"value '" + std::string(value) + "' for " + std::string(key) + " is not a number"});
    const std::string_view unit = trim(value.substr(static_cast<std::size_t>(end - value.data())));
    it->second.set(cfg, convert(it->second.kind, number, unit, key));
}

ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base)
{
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    std::vector<std::string> problems;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos)
            view = view.substr(0, hash);
        view = trim(view);
        if (view.empty())
            continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        try {
            apply_setting(base, trim(view.substr(0, eq)), view.substr(eq + 1));
        } catch (const ValidationError& e) {
            for (const auto& p : e.problems())
                problems.push_back("line " + std::to_string(line_no) + ": " + p);
        }
    }
    if (!problems.empty())
        throw ValidationError(std::move(problems));
    return base;
}

ScenarioConfig load_config_file(const std::string& path, ScenarioConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError({"cannot open config file '" + path + "'"});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), std::move(base));
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [k, _] : fields())
            out.push_back(k);
        return out;
    }();
    return keys;
}

} // namespace san

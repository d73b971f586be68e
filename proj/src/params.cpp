#include "san/params.hpp"

#include <cmath>
#include <numbers>

namespace san {

ScenarioConfig validate(const ScenarioConfig& raw)
{
    std::vector<std::string> problems;
    auto require = [&problems](bool ok, const char* message) {
        if (!ok)
            problems.emplace_back(message);
    };

    require(raw.lambda_macro > 0.0, "lambda_macro must be positive");
    require(raw.lambda_small > 0.0, "lambda_small must be positive");
    require(raw.lambda_user > 0.0, "lambda_user must be positive");
    require(raw.p_small > 0.0, "p_small must be positive");
    require(raw.p_macro >= raw.p_small, "p_macro must be >= p_small");
    require(raw.alpha > 2.0, "alpha must exceed 2");
    require(raw.beta > 2.0, "beta must exceed 2");
    require(raw.bandwidth > 0.0, "bandwidth must be positive");
    require(raw.rate_threshold >= 0.0, "rate_threshold must be non-negative");
    require(raw.u_low >= 0.0, "u_low must be >= 0");
    require(raw.u_high >= raw.u_low, "u_high must be >= u_low");
    require(raw.u_high <= 1.0, "u_high must be <= 1");
    require(raw.r_hat_a >= 0.0, "r_hat_a must be >= 0");
    require(raw.g_main > 0.0, "g_main must be positive");
    require(raw.beam_width > 0.0 && raw.beam_width < std::numbers::pi, "beam_width must lie in (0, pi)");
    require(raw.eta_safety > 0.0, "eta_safety must be positive");
    require(raw.unit_energy > 0.0, "unit_energy must be positive");
    require(raw.battery_capacity_units == 3, "battery_capacity_units is fixed at 3");

    if (!problems.empty())
        throw ValidationError(std::move(problems));
    return raw;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double per_km2_to_per_m2(double per_km2) { return per_km2 * 1e-6; }

double dbi_to_linear(double dbi) { return std::pow(10.0, dbi / 10.0); }

double charging_range(const ScenarioConfig& cfg, double p_tc)
{
    if (!(p_tc >= 1.0))
        throw DomainError("charging power p_tc must be >= 1 (normalized by P_u)");
    const double received = cfg.fold_gain_into_rc ? cfg.g_main * p_tc : p_tc;
    return std::pow(received, 1.0 / cfg.beta);
}

double sir_threshold(const ScenarioConfig& cfg) { return std::expm1(cfg.rate_threshold / cfg.bandwidth); }

DerivedQuantities derive(const ScenarioConfig& cfg, double p_tc)
{
    const double r_c = charging_range(cfg, p_tc);
    return {r_c, r_c + cfg.r_hat_a, sir_threshold(cfg), cfg.p_macro / cfg.p_small};
}

ScenarioConfig preset(std::string_view name)
{
    // Caption values. u_low, u_high, beam_width and P_u are not given there and
    // keep the struct defaults; P_u = 10 mW puts the safety cap inside the
    // swept p_tc range.
    ScenarioConfig cfg;
    cfg.lambda_macro = per_km2_to_per_m2(10.0);
    cfg.p_macro = dbm_to_watts(43.0);
    cfg.p_small = dbm_to_watts(23.0);
    cfg.bandwidth = 10e6;
    cfg.rate_threshold = 1e6;
    cfg.alpha = 4.0;
    cfg.beta = 5.0;
    cfg.eta_safety = 10.0;
    cfg.unit_energy = 0.01;
    if (name == "fig3a") {
        cfg.lambda_small = per_km2_to_per_m2(300.0);
        cfg.lambda_user = per_km2_to_per_m2(2e4);
        cfg.g_main = dbi_to_linear(20.0);
        cfg.r_hat_a = 2.0;
    } else if (name == "fig3b") {
        cfg.lambda_small = per_km2_to_per_m2(3e3);
        cfg.lambda_user = per_km2_to_per_m2(1e7);
        cfg.g_main = dbi_to_linear(20.0);
        cfg.r_hat_a = 2.0;
    } else if (name == "fig4") {
        cfg.lambda_small = per_km2_to_per_m2(300.0);
        cfg.lambda_user = per_km2_to_per_m2(1e4);
        cfg.g_main = dbi_to_linear(10.0);
        cfg.r_hat_a = 2.0;
    } else {
        throw ValidationError({"unknown preset '" + std::string(name) + "'"});
    }
    return cfg;
}

std::vector<std::string> preset_names() { return {"fig3a", "fig3b", "fig4"}; }

} // namespace san

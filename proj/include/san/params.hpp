#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "san/errors.hpp"

namespace san {

enum class Tier { macro = 1, small = 2 };

inline int tier_index(Tier t) { return t == Tier::macro ? 0 : 1; }

/// Every model parameter in SI units: meters, watts, hertz, per-m^2 densities.
/// Charging power is never stored here; it travels separately as the ratio
/// p_tc = P_tc / P_u.
struct ScenarioConfig {
    double lambda_macro = 10e-6;    ///< tier-1 BS density [1/m^2]
    double lambda_small = 300e-6;   ///< tier-2 BS density [1/m^2]
    double lambda_user = 2e-2;      ///< user density [1/m^2]
    double p_macro = 19.952623149688797;  ///< 43 dBm [W]
    double p_small = 0.19952623149688797; ///< 23 dBm [W]
    double alpha = 4.0;             ///< information path-loss exponent
    double beta = 5.0;              ///< charging path-loss exponent
    double bandwidth = 10e6;        ///< [Hz]
    double rate_threshold = 1e6;    ///< theta [bit/s]
    double u_low = 0.2;             ///< download probability at L1
    double u_high = 0.4;            ///< download probability at L2, L3
    double r_hat_a = 2.0;           ///< maximum attraction distance [m]
    double g_main = 100.0;          ///< charging main-lobe gain (linear)
    double beam_width = 0.35;       ///< charging beam width [rad]
    double eta_safety = 10.0;       ///< maximum safe power density [W/m^2]
    double unit_energy = 0.01;      ///< P_u, energy per reception per slot [W]
    int battery_capacity_units = 3;
    /// Alternative reading of the charging range: r_c = (G_m p_tc)^{1/beta}.
    bool fold_gain_into_rc = false;

    double eta_over_pu() const { return eta_safety / unit_energy; }
    double lambda(Tier t) const { return t == Tier::macro ? lambda_macro : lambda_small; }
    double power(Tier t) const { return t == Tier::macro ? p_macro : p_small; }

    bool operator==(const ScenarioConfig&) const = default;
};

struct DerivedQuantities {
    double r_c;            ///< maximum charging range [m]
    double r_s;            ///< r_c + r_hat_a [m]
    double sir_threshold;  ///< e^{theta/W} - 1
    double power_ratio;    ///< P1 / P2
};

/// Returns the config unchanged when every invariant holds, otherwise throws a
/// ValidationError listing all violations.
ScenarioConfig validate(const ScenarioConfig& raw);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double per_km2_to_per_m2(double per_km2);
double dbi_to_linear(double dbi);

/// r_c = p_tc^{1/beta}; p_tc is the charging power normalized by P_u.
/// Throws DomainError for p_tc < 1.
double charging_range(const ScenarioConfig& cfg, double p_tc);

double sir_threshold(const ScenarioConfig& cfg);

DerivedQuantities derive(const ScenarioConfig& cfg, double p_tc);

/// Named parameter sets for the figure reproductions: "fig3a", "fig3b", "fig4".
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

} // namespace san

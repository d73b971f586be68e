#pragma once

#include <cmath>
#include <random>

#include "san/analytic.hpp"
#include "san/params.hpp"

namespace san::test {

inline double log_uniform(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

/// Valid configuration with every field drawn over a broad physical range.
inline ScenarioConfig random_config(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ScenarioConfig cfg;
    cfg.lambda_macro = per_km2_to_per_m2(log_uniform(rng, 0.5, 50.0));
    cfg.lambda_small = per_km2_to_per_m2(log_uniform(rng, 5.0, 1e4));
    cfg.lambda_user = per_km2_to_per_m2(log_uniform(rng, 1e2, 1e7));
    const double p1 = 30.0 + 16.0 * unit(rng);
    cfg.p_macro = dbm_to_watts(p1);
    cfg.p_small = dbm_to_watts(p1 - 25.0 * unit(rng));
    cfg.alpha = 2.5 + 2.5 * unit(rng);
    cfg.beta = 2.5 + 3.5 * unit(rng);
    cfg.rate_threshold = 5e6 * unit(rng);
    cfg.u_low = 0.6 * unit(rng);
    cfg.u_high = cfg.u_low + (1.0 - cfg.u_low) * unit(rng);
    cfg.r_hat_a = 5.0 * unit(rng);
    cfg.g_main = dbi_to_linear(20.0 * unit(rng));
    return validate(cfg);
}

inline double random_p_tc(std::mt19937_64& rng) { return log_uniform(rng, 1.0, 1e4); }

struct RandomCase {
    ScenarioConfig cfg;
    double p_tc;
    int rejected;  ///< draws skipped before this one
};

/// Random (config, p_tc) whose battery transition matrix is stochastic: the
/// L1 row needs u_l + c_l(1) + c_l(2) <= 1.
inline RandomCase random_case(std::mt19937_64& rng)
{
    for (int rejected = 0;; ++rejected) {
        const ScenarioConfig cfg = random_config(rng);
        const double p = random_p_tc(rng);
        const auto c = analytic::charge_probs(cfg, p);
        if (cfg.u_low + c.c_low[0] + c.c_low[1] <= 1.0)
            return {cfg, p, rejected};
    }
}

} // namespace san::test

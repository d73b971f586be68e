#pragma once

#include <string>
#include <vector>

#include "san/analytic.hpp"
#include "san/numerics.hpp"

namespace san::optimizer {

enum class BindingCap { none, safety, voronoi };

std::string to_string(BindingCap cap);

struct Caps {
    double cap_safety = 0.0;
    double cap_voronoi = 0.0;
    BindingCap binding = BindingCap::none;

    double upper() const { return cap_safety < cap_voronoi ? cap_safety : cap_voronoi; }
    BindingCap smaller() const { return cap_safety <= cap_voronoi ? BindingCap::safety : BindingCap::voronoi; }
};

enum class Method { grid_search, closed_form_branch1, closed_form_branch2 };

std::string to_string(Method method);

struct OptimizationResult {
    double p_tc_star = 0.0;
    double objective_at_star = 0.0;
    Method method = Method::grid_search;
    Caps caps;
    /// Closed forms only: value before clipping to [1, min(caps)].
    double unclipped = 0.0;
    /// Every objective evaluation of the grid search, in evaluation order.
    std::vector<numerics::GridSample> search_trace;
    /// True when every grid value tied (flat objective).
    bool flat = false;
};

struct OptimizerOptions {
    int grid_points = 256;
    int refine_rounds = 4;
    /// The dense-small-cell closed form applies when lambda_2 / lambda_1 exceeds this.
    double branch_threshold = 10.0;
    analytic::ModelOptions model{};
};

/// E[N_k] ~= 1.28 lambda_u / lambda_k (P_H A_k^h + P_L A_k^l)
double mean_load(const analytic::Evaluation& ev, Tier tier);

/// sum_k (P_H A_k^h R_k^h + P_L A_k^l R_k^l) / (1 + E[N_k])
double mean_load_objective(const ScenarioConfig& cfg, double p_tc, const analytic::ModelOptions& options = {});
double mean_load_objective(const analytic::Evaluation& ev);

/// Average received charging power density at a typical location, per P_u
/// and per m^2, for normalized charging power p_tc.
double avg_power_density(const ScenarioConfig& cfg, double p_tc);

/// Normalized charging power at which avg_power_density meets eta / P_u.
double safety_cap(const ScenarioConfig& cfg);

/// Mean inradius of a small-cell association region.
double mean_inradius(const ScenarioConfig& cfg);

/// E[nu]^beta / G_m
double voronoi_cap(const ScenarioConfig& cfg);

Caps caps(const ScenarioConfig& cfg);

/// Log-grid search of mean_load_objective over [1, min(caps)].
OptimizationResult optimal_power(const ScenarioConfig& cfg, const OptimizerOptions& options = {});

/// Large-user-density closed form; throws NegativeBase when the bracket is not positive.
OptimizationResult closed_form_optimal(const ScenarioConfig& cfg, const OptimizerOptions& options = {});

} // namespace san::optimizer

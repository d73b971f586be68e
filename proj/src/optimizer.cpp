#include "san/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace san::optimizer {

namespace {

constexpr double pi = std::numbers::pi;

double lambda_sum(const ScenarioConfig& cfg)
{
    return cfg.lambda_macro * std::pow(cfg.p_macro / cfg.p_small, 2.0 / cfg.alpha) + cfg.lambda_small;
}

double clip(double p, const Caps& c) { return std::clamp(p, 1.0, std::max(1.0, c.upper())); }

} // namespace

std::string to_string(BindingCap cap)
{
    switch (cap) {
    case BindingCap::safety:
        return "safety";
    case BindingCap::voronoi:
        return "voronoi";
    case BindingCap::none:
        break;
    }
    return "none";
}

std::string to_string(Method method)
{
    switch (method) {
    case Method::closed_form_branch1:
        return "closed_form_branch1";
    case Method::closed_form_branch2:
        return "closed_form_branch2";
    case Method::grid_search:
        break;
    }
    return "grid_search";
}

double mean_load(const analytic::Evaluation& ev, Tier tier)
{
    const auto& cfg = ev.config();
    const int k = tier_index(tier);
    const auto& a = ev.association();
    return 1.28 * cfg.lambda_user / cfg.lambda(tier) *
           (ev.chain().p_high * a.a_high[k] + ev.chain().p_low * a.a_low[k]);
}

double mean_load_objective(const analytic::Evaluation& ev)
{
    double total = 0.0;
    for (const Tier t : {Tier::macro, Tier::small})
        total += ev.association_weighted(t) / (1.0 + mean_load(ev, t));
    return total;
}

double mean_load_objective(const ScenarioConfig& cfg, double p_tc, const analytic::ModelOptions& options)
{
    return mean_load_objective(analytic::Evaluation(cfg, p_tc, options));
}

double avg_power_density(const ScenarioConfig& cfg, double p_tc)
{
    if (!(p_tc >= 1.0))
        throw DomainError("charging power p_tc must be >= 1 (normalized by P_u)");
    const double a = pi * cfg.lambda_small;
    if (a == 0.0)
        return 0.0;
    const double t = std::tan(cfg.beam_width / 2.0);
    // 2 G lambda p / tan^2 * (int_0^1 r e^{-a r^2} dr + int_1^inf e^{-a r^2} / r dr)
    const double near = -std::expm1(-a) / (2.0 * a);
    const double far = -0.5 * numerics::exponential_integral_ei(-a);
    return 2.0 * cfg.g_main * cfg.lambda_small * p_tc / (t * t) * (near + far);
}

double safety_cap(const ScenarioConfig& cfg) { return cfg.eta_over_pu() / avg_power_density(cfg, 1.0); }

double mean_inradius(const ScenarioConfig& cfg)
{
    const double spread = 1.0 + std::pow(cfg.p_macro / cfg.p_small, 1.0 / cfg.alpha);
    return 1.0 / std::sqrt(16.0 * cfg.lambda_small + 4.0 * spread * spread * cfg.lambda_macro);
}

double voronoi_cap(const ScenarioConfig& cfg) { return std::pow(mean_inradius(cfg), cfg.beta) / cfg.g_main; }

Caps caps(const ScenarioConfig& cfg)
{
    const ScenarioConfig checked = validate(cfg);
    return {safety_cap(checked), voronoi_cap(checked), BindingCap::none};
}

OptimizationResult optimal_power(const ScenarioConfig& cfg, const OptimizerOptions& options)
{
    OptimizationResult out;
    out.caps = caps(cfg);
    const double hi = out.caps.upper();
    if (hi < 1.0)
        throw EmptyFeasible("feasible charging power range [1, " + std::to_string(hi) + "] is empty");

    auto objective = [&](double p) { return mean_load_objective(cfg, p, options.model); };
    if (hi == 1.0) {
        out.p_tc_star = 1.0;
        out.objective_at_star = objective(1.0);
        out.search_trace.push_back({1.0, out.objective_at_star, 0});
        out.caps.binding = out.caps.smaller();
        return out;
    }

    const numerics::GridResult g =
        numerics::grid_maximize(objective, 1.0, hi, options.grid_points, options.refine_rounds, numerics::GridScale::log);
    out.p_tc_star = g.argmax;
    out.objective_at_star = g.max_value;
    out.search_trace = g.trace;
    const auto [lo_it, hi_it] = std::minmax_element(
        g.trace.begin(), g.trace.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    out.flat = hi_it->value - lo_it->value <= 1e-15 * std::abs(hi_it->value);
    if (!out.flat && out.p_tc_star >= hi * (1.0 - 1e-9))
        out.caps.binding = out.caps.smaller();
    return out;
}

OptimizationResult closed_form_optimal(const ScenarioConfig& cfg, const OptimizerOptions& options)
{
    const ScenarioConfig checked = validate(cfg);
    OptimizationResult out;
    out.caps = caps(checked);

    const analytic::AssociationModel a = analytic::association_model(checked, 1.0);
    const double rho = analytic::rho(checked, a.m_distance, a.m_distance, options.model.quadrature);
    const double lam = lambda_sum(checked);
    const double ra = checked.r_hat_a;

    double base = 0.0;
    if (checked.lambda_small / checked.lambda_macro > options.branch_threshold) {
        out.method = Method::closed_form_branch1;
        const double inner = (1.0 + rho) / (6.0 * pi * lam) - ra * ra / 12.0;
        if (!(inner > 0.0))
            throw NegativeBase("closed form (branch 1): radicand is not positive");
        base = std::sqrt(inner) - 0.5 * ra;
    } else {
        out.method = Method::closed_form_branch2;
        if (!(rho > 0.0))
            throw NegativeBase("closed form (branch 2): rho must be positive");
        base = 1.0 / std::sqrt(27.0 * pi * rho * lam) - 1.5 * ra;
    }
    if (!(base > 0.0))
        throw NegativeBase("closed form bracket is not positive (" + std::to_string(base) + ")");

    out.unclipped = std::pow(base, checked.beta) / checked.g_main;
    out.p_tc_star = clip(out.unclipped, out.caps);
    if (out.unclipped > out.caps.upper())
        out.caps.binding = out.caps.smaller();
    out.objective_at_star = mean_load_objective(checked, out.p_tc_star, options.model);
    return out;
}

} // namespace san::optimizer

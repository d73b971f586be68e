#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "san/analytic.hpp"
#include "san/optimizer.hpp"
#include "support.hpp"

using namespace san;
using namespace san::optimizer;

namespace {

constexpr double pi = std::numbers::pi;

// 2 G lambda p / tan^2(t/2) times the radial integral, both pieces by quadrature.
double density_oracle(const ScenarioConfig& cfg, double p_tc)
{
    const double a = pi * cfg.lambda_small;
    const double near = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [a](double r) { return r * std::exp(-a * r * r); }, 0.0, 1.0, 15, 1e-14);
    boost::math::quadrature::exp_sinh<double> tail;
    const double far = tail.integrate([a](double s) { return std::exp(-a * (1.0 + s) * (1.0 + s)) / (1.0 + s); },
                                      0.0, std::numeric_limits<double>::infinity());
    const double t = std::tan(cfg.beam_width / 2.0);
    return 2.0 * cfg.g_main * cfg.lambda_small * p_tc / (t * t) * (near + far);
}

} // namespace

TEST_CASE("power density matches its defining integral")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 60; ++i) {
        const ScenarioConfig cfg = test::random_config(rng);
        const double p = test::random_p_tc(rng);
        const double v = avg_power_density(cfg, p);
        CAPTURE(cfg.lambda_small);
        CHECK(std::abs(v - density_oracle(cfg, p)) <= 1e-8 * v);
        CHECK(avg_power_density(cfg, 2.0 * p) == doctest::Approx(2.0 * v).epsilon(1e-14));
    }
    CHECK_THROWS_AS(avg_power_density(ScenarioConfig{}, 0.9), DomainError);
}

TEST_CASE("caps are self-consistent")
{
    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        const ScenarioConfig cfg = test::random_config(rng);
        const double s = safety_cap(cfg);
        CHECK(avg_power_density(cfg, 1.0) * s == doctest::Approx(cfg.eta_over_pu()).epsilon(1e-9));
        if (s >= 1.0)
            CHECK(avg_power_density(cfg, s) == doctest::Approx(cfg.eta_over_pu()).epsilon(1e-9));

        ScenarioConfig doubled = cfg;
        doubled.g_main *= 2.0;
        CHECK(safety_cap(doubled) == doctest::Approx(s / 2.0).epsilon(1e-12));
        CHECK(voronoi_cap(doubled) == doctest::Approx(voronoi_cap(cfg) / 2.0).epsilon(1e-12));

        const Caps c = caps(cfg);
        CHECK(c.upper() == std::min(c.cap_safety, c.cap_voronoi));
    }

    ScenarioConfig lone = preset("fig3a");
    lone.lambda_macro = 1e-30;
    CHECK(mean_inradius(lone) == doctest::Approx(1.0 / std::sqrt(16.0 * lone.lambda_small)).epsilon(1e-9));
}

TEST_CASE("preset caps")
{
    const Caps a = caps(preset("fig3a"));
    CHECK(a.cap_safety > 100.0);
    CHECK(a.cap_safety < 200.0);
    const Caps b = caps(preset("fig3b"));
    CHECK(b.cap_voronoi == doctest::Approx(std::pow(mean_inradius(preset("fig3b")), 5.0) / 100.0));
    CHECK(b.upper() > 1.0);
}

TEST_CASE("mean load follows the association-weighted formula")
{
    const ScenarioConfig cfg = preset("fig3a");
    const analytic::Evaluation ev(cfg, 32.0);
    const auto& a = ev.association();
    const auto& ch = ev.chain();
    for (const Tier t : {Tier::macro, Tier::small}) {
        const int k = tier_index(t);
        const double expected = 1.28 * cfg.lambda_user / cfg.lambda(t) * (ch.p_high * a.a_high[k] + ch.p_low * a.a_low[k]);
        CHECK(mean_load(ev, t) == doctest::Approx(expected).epsilon(1e-14));
    }
    const double obj = mean_load_objective(ev);
    double manual = 0.0;
    for (const Tier t : {Tier::macro, Tier::small})
        manual += ev.association_weighted(t) / (1.0 + mean_load(ev, t));
    CHECK(obj == doctest::Approx(manual).epsilon(1e-14));
}

TEST_CASE("closed form branch 1 without attraction")
{
    ScenarioConfig cfg = preset("fig3b");
    cfg.r_hat_a = 0.0;
    const OptimizationResult r = closed_form_optimal(cfg);
    CHECK(r.method == Method::closed_form_branch1);

    const auto assoc = analytic::association_model(cfg, 1.0);
    const double rho = analytic::rho(cfg, assoc.m_distance, assoc.m_distance);
    const double lam = cfg.lambda_macro * std::pow(cfg.p_macro / cfg.p_small, 2.0 / cfg.alpha) + cfg.lambda_small;
    const double expected = std::pow(std::sqrt((1.0 + rho) / (6.0 * pi * lam)), cfg.beta) / cfg.g_main;
    CHECK(r.unclipped == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.p_tc_star >= 1.0);
    CHECK(r.p_tc_star <= std::max(1.0, r.caps.upper()));
}

TEST_CASE("closed form rejects a non-positive bracket")
{
    ScenarioConfig cfg = preset("fig4");
    cfg.r_hat_a = 50.0;
    CHECK_THROWS_AS(closed_form_optimal(cfg), NegativeBase);

    ScenarioConfig dense = preset("fig3b");
    dense.r_hat_a = 50.0;
    CHECK_THROWS_AS(closed_form_optimal(dense), NegativeBase);
}

TEST_CASE("grid optimum stays inside the feasible range")
{
    OptimizerOptions opts;
    opts.grid_points = 48;
    opts.refine_rounds = 2;
    for (const char* name : {"fig3a", "fig3b", "fig4"}) {
        const ScenarioConfig cfg = preset(name);
        const OptimizationResult r = optimal_power(cfg, opts);
        CAPTURE(name);
        CHECK(r.p_tc_star >= 1.0);
        CHECK(r.p_tc_star <= r.caps.upper() * (1.0 + 1e-12));
        CHECK(!r.search_trace.empty());
        for (const auto& s : r.search_trace)
            CHECK(s.value <= r.objective_at_star + 1e-15);
        if (r.caps.binding != BindingCap::none)
            CHECK(r.p_tc_star >= r.caps.upper() * (1.0 - 1e-9));
    }
}

TEST_CASE("empty feasible range")
{
    ScenarioConfig cfg = preset("fig3a");
    cfg.eta_safety = 1e-9;
    CHECK_THROWS_AS(optimal_power(cfg), EmptyFeasible);
}

TEST_CASE("flat objective when nobody downloads")
{
    ScenarioConfig cfg = preset("fig3a");
    cfg.u_low = 0.0;
    cfg.u_high = 0.0;
    OptimizerOptions opts;
    opts.grid_points = 16;
    opts.refine_rounds = 1;
    const OptimizationResult r = optimal_power(cfg, opts);
    CHECK(r.flat);
    CHECK(r.p_tc_star == 1.0);
    CHECK(r.objective_at_star == 0.0);
    CHECK(r.caps.binding == BindingCap::none);
}

TEST_CASE("closed form lands near the grid optimum in the dense regime")
{
    OptimizerOptions opts;
    opts.grid_points = 64;
    opts.refine_rounds = 3;
    const ScenarioConfig cfg = preset("fig3b");
    const OptimizationResult grid = optimal_power(cfg, opts);
    const OptimizationResult closed = closed_form_optimal(cfg, opts);
    CHECK((grid.objective_at_star - closed.objective_at_star) / grid.objective_at_star <= 0.10);
    CHECK(grid.objective_at_star >= closed.objective_at_star - 1e-15);
}

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "san/analytic.hpp"
#include "support.hpp"

using namespace san;
using namespace san::analytic;

namespace {

constexpr double pi = std::numbers::pi;

// E[1/(N+1)] for the sum of two independent Gamma-form counts, from the
// probability generating function: int_0^1 G_h(s) G_l(s) ds with
// G(s) = (3.5 / (3.5 + x (1 - s)))^{4.5}.
double share_oracle(double x_high, double x_low)
{
    auto g = [](double x, double s) { return std::pow(3.5 / (3.5 + x * (1.0 - s)), 4.5); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) { return g(x_high, s) * g(x_low, s); }, 0.0, 1.0, 15, 1e-13);
}

double rho_oracle(double tau, double alpha, double lower)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    const double half = alpha / 2.0;
    return std::pow(tau, 2.0 / alpha) *
           integrator.integrate([half](double u) { return 1.0 / (1.0 + std::pow(u, half)); }, lower,
                                std::numeric_limits<double>::infinity());
}

} // namespace

TEST_CASE("association probabilities at the fig3a point")
{
    const ScenarioConfig cfg = preset("fig3a");
    CHECK(assoc_prob_high(cfg, Tier::macro) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(assoc_prob_high(cfg, Tier::small) == doctest::Approx(0.75).epsilon(1e-12));
    const AssociationModel m = association_model(cfg, 32.0);
    CHECK(m.r_c == doctest::Approx(2.0));
    CHECK(m.r_s == doctest::Approx(4.0));
    CHECK(m.m_distance == doctest::Approx(4.0 * std::sqrt(10.0)));
    CHECK(m.lambda_tilde == doctest::Approx(3.0));
    const double a_s = pi * 3e-4 * 16.0;
    CHECK(m.a_low[0] == doctest::Approx(std::exp(-a_s) - 0.75 * std::exp(-a_s / 0.75)).epsilon(1e-12));
    CHECK(m.a_low[0] + m.a_low[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("association limits")
{
    ScenarioConfig cfg = preset("fig3a");
    cfg.lambda_small = 1e-15;
    CHECK(assoc_prob_high(cfg, Tier::macro) == doctest::Approx(1.0).epsilon(1e-8));

    cfg = preset("fig3a");
    cfg.p_small = cfg.p_macro;
    cfg.lambda_small = cfg.lambda_macro;
    CHECK(assoc_prob_high(cfg, Tier::macro) == doctest::Approx(0.5));

    // Vanishing attraction disk: low-battery association falls back to power-based.
    cfg = ScenarioConfig{};
    cfg.lambda_macro = 1e-9;
    cfg.lambda_small = 1e-9;
    cfg.p_small = cfg.p_macro;
    cfg.r_hat_a = 0.0;
    const AssociationModel tiny = association_model(cfg, 1.0);
    CHECK(std::abs(tiny.a_low[0] - tiny.a_high[0]) < 1e-8);

    // Huge attraction radius: every low-battery user reaches a small cell.
    cfg = preset("fig3a");
    cfg.r_hat_a = 1e3;
    const AssociationModel big = association_model(cfg, 32.0);
    CHECK(big.a_low[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(big.a_low[0]) < 1e-12);
}

TEST_CASE("charge probabilities")
{
    const ScenarioConfig cfg = preset("fig3a");
    const ChargeProbabilities c = charge_probs(cfg, 32.0);
    const double lam = 3e-4;
    const double a2 = pi * lam * std::pow(2.0, -0.4) * 4.0;
    const double a3 = pi * lam * std::pow(3.0, -0.4) * 4.0;
    const double a_s = pi * lam * 16.0;
    CHECK(c.c_low[0] == doctest::Approx(std::exp(-a2) - std::exp(-a_s)).epsilon(1e-12));
    CHECK(c.c_low[1] == doctest::Approx(std::exp(-a3) - std::exp(-a2)).epsilon(1e-12));
    CHECK(c.c_low[2] == doctest::Approx(1.0 - std::exp(-a3)).epsilon(1e-12));
    CHECK(c.c_high == doctest::Approx(1.0 - std::exp(-pi * lam * 4.0)).epsilon(1e-12));

    // With no attraction and unit power, r_c = r_s = 1: only the inner bands remain.
    ScenarioConfig unit = cfg;
    unit.r_hat_a = 0.0;
    const ChargeProbabilities u = charge_probs(unit, 1.0);
    CHECK(u.c_low[0] == doctest::Approx(std::exp(-pi * lam * std::pow(2.0, -0.4)) - std::exp(-pi * lam)));
    CHECK(u.c_high == doctest::Approx(-std::expm1(-pi * lam)));
    CHECK(u.c_low[0] + u.c_low[1] + u.c_low[2] == doctest::Approx(u.c_high).epsilon(1e-12));

    ScenarioConfig sparse = unit;
    sparse.lambda_small = 1e-14;
    const ChargeProbabilities z = charge_probs(sparse, 1.0);
    for (const double v : z.c_low)
        CHECK(v < 1e-12);
    CHECK(z.c_high < 1e-12);
}

TEST_CASE("battery chain special cases")
{
    ScenarioConfig cfg = preset("fig3a");
    ChargeProbabilities none{};
    cfg.u_low = 0.5;
    cfg.u_high = 0.5;
    const auto q = numerics::stationary_distribution(transition_matrix(cfg, none));
    CHECK(q[0] == doctest::Approx(1.0));

    cfg.u_low = 0.0;
    cfg.u_high = 0.0;
    ChargeProbabilities full{};
    full.c_low = {0.0, 0.0, 1.0};
    full.c_high = 1.0;
    // Row L1 of the typeset matrix has no c_l(3) entry, so with nobody
    // downloading both L1 and L3 are absorbing.
    const auto t = transition_matrix(cfg, full);
    CHECK(t[0][3] == 1.0);
    CHECK(t[1][1] == 1.0);
    CHECK(t[3][3] == 1.0);
    CHECK_THROWS_AS(numerics::stationary_distribution(t), NonUniqueStationary);

    const BatteryChain chain = battery_chain(preset("fig3a"), 32.0);
    CHECK(chain.p_high == doctest::Approx((chain.steady[2] + chain.steady[3]) * 0.4));
    CHECK(chain.p_low == doctest::Approx(chain.steady[1] * 0.2));
    CHECK(chain.steady[0] == doctest::Approx(0.9087).epsilon(1e-3));
}

TEST_CASE("overloaded L1 row is not stochastic")
{
    ScenarioConfig cfg = preset("fig3b");
    cfg.u_low = 0.6;
    cfg.u_high = 0.9;
    cfg.r_hat_a = 20.0;
    const auto c = charge_probs(cfg, 1.0);
    REQUIRE(cfg.u_low + c.c_low[0] + c.c_low[1] > 1.0);
    CHECK_THROWS_AS(battery_chain(cfg, 1.0), NotStochastic);
}

TEST_CASE("algebraic identities over randomized configs")
{
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 200; ++trial) {
        const auto [cfg, p_tc, rejected] = test::random_case(rng);
        CAPTURE(trial);
        const AssociationModel a = association_model(cfg, p_tc);
        CHECK(std::abs(a.a_high[0] + a.a_high[1] - 1.0) <= 1e-9);
        CHECK(std::abs(a.a_low[0] + a.a_low[1] - 1.0) <= 1e-9);
        for (int k = 0; k < 2; ++k) {
            CHECK(a.a_high[k] >= 0.0);
            CHECK(a.a_low[k] >= -1e-15);
        }

        const BatteryChain chain = battery_chain(cfg, p_tc);
        for (std::size_t i = 0; i < 4; ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(chain.transition[i][j] >= -1e-15);
                if (j != i)
                    off += chain.transition[i][j];
            }
            CHECK(chain.transition[i][i] + off == 1.0);
            const auto& row = chain.transition[i];
            CHECK(row[0] + row[1] + row[2] + row[3] == 1.0);
            CHECK(row[3] + row[2] + row[1] + row[0] == 1.0);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < 4; ++i)
                s += chain.steady[i] * chain.transition[i][j];
            CHECK(std::abs(s - chain.steady[j]) <= 1e-10);
            total += chain.steady[j];
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);

        const DerivedQuantities d = derive(cfg, p_tc);
        const auto& c = chain.charge.c_low;
        CHECK(std::abs(c[0] + c[1] + c[2] + std::expm1(-pi * cfg.lambda_small * d.r_s * d.r_s)) <= 1e-12);

        const RateCoverageBreakdown b = rate_coverage(cfg, p_tc);
        CHECK(b.r_total >= 0.0);
        CHECK(b.r_total <= 1.0);
        CHECK(b.r_high > 0.0);
        CHECK(b.r_high <= 1.0);
        for (int k = 0; k < 2; ++k) {
            CHECK(b.tiers[k].load_share > 0.0);
            CHECK(b.tiers[k].load_share <= 1.0);
        }
    }
}

TEST_CASE("load PMF")
{
    CHECK(gamma_form_pmf(0.0, 0) == 1.0);
    CHECK(gamma_form_pmf(0.0, 3) == 0.0);
    // Negative binomial with shape 4.5: mean 4.5 x / 3.5.
    double mean = 0.0, mass = 0.0;
    for (int n = 0; n < 2000; ++n) {
        const double p = gamma_form_pmf(7.0, n);
        mass += p;
        mean += n * p;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(9.0).epsilon(1e-10));

    const ScenarioConfig cfg = preset("fig3a");
    const BatteryChain chain = battery_chain(cfg, 32.0);
    const AssociationModel a = association_model(cfg, 32.0);
    for (const Tier t : {Tier::macro, Tier::small}) {
        const LoadPmf pmf = load_pmf(cfg, chain, a, t, 512);
        CHECK(std::abs(pmf.total_mass() - 1.0) <= 1e-6);
        CHECK(pmf.share(0) == doctest::Approx(share_oracle(pmf.mean_high, pmf.mean_low)).epsilon(1e-9));
        CHECK(pmf.share(1) == doctest::Approx(pmf.share(0) - pmf.pmf_total[0]).epsilon(1e-12));
        CHECK(pmf.mean() == doctest::Approx(9.0 / 7.0 * (pmf.mean_high + pmf.mean_low)).epsilon(1e-6));
    }

    ScenarioConfig dense = preset("fig3b");
    const BatteryChain dc = battery_chain(dense, 32.0);
    const AssociationModel da = association_model(dense, 32.0);
    CHECK_THROWS_AS(load_pmf(dense, dc, da, Tier::macro, 64), TruncationError);
    const LoadPmf big = load_pmf_auto(dense, dc, da, Tier::macro);
    CHECK(std::abs(big.total_mass() - 1.0) <= 1e-6);
    CHECK(big.share(0) == doctest::Approx(share_oracle(big.mean_high, big.mean_low)).epsilon(1e-8));
}

TEST_CASE("rho")
{
    ScenarioConfig cfg = preset("fig3a");
    const double tau = std::expm1(0.1);
    const double m = 10.0;
    for (const double x : {1.0, 5.0, 10.0, 40.0}) {
        const double lower = (m / x) * (m / x) / std::sqrt(tau);
        CHECK(rho(cfg, m, x) == doctest::Approx(std::sqrt(tau) * (pi / 2.0 - std::atan(lower))).epsilon(1e-12));
    }
    cfg.rate_threshold = 0.0;
    CHECK(rho(cfg, m, 3.0) == 0.0);

    // tau = 1 at x = M gives pi/4.
    cfg.rate_threshold = cfg.bandwidth * std::log(2.0);
    CHECK(std::abs(rho(cfg, m, m) - pi / 4.0) < 1e-8);

    cfg = preset("fig3a");
    cfg.alpha = 3.0;
    for (const double x : {2.0, 10.0, 30.0}) {
        const double lower = (m / x) * (m / x) / std::pow(tau, 2.0 / 3.0);
        CHECK(rho(cfg, m, x) == doctest::Approx(rho_oracle(tau, 3.0, lower)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(rho(cfg, m, 0.0), DomainError);
}

TEST_CASE("conditional coverage")
{
    ScenarioConfig cfg = preset("fig3a");
    const AssociationModel a = association_model(cfg, 32.0);
    const double rho_m = rho(cfg, a.m_distance, a.m_distance);
    CHECK(cond_rate_cov_high(cfg, a, Tier::macro) == doctest::Approx(1.0 / (1.0 + rho_m)));
    CHECK(cond_rate_cov_high(cfg, a, Tier::macro) == cond_rate_cov_high(cfg, a, Tier::small));

    for (const Tier t : {Tier::macro, Tier::small}) {
        const ConditionalCoverage c = cond_rate_cov_low(cfg, a, t);
        CHECK(!c.out_of_range);
        CHECK(c.value > 0.0);
        CHECK(c.value <= 1.0);
        double s = 0.0;
        for (const double v : c.terms)
            s += v;
        CHECK(c.raw == doctest::Approx(s));
    }

    ModelOptions printed;
    printed.reading = Eq5Reading::printed;
    const ConditionalCoverage p1 = cond_rate_cov_low(cfg, a, Tier::macro, printed);
    CHECK(p1.out_of_range);
    CHECK(p1.value == 1.0);

    ScenarioConfig zero = cfg;
    zero.rate_threshold = 0.0;
    const AssociationModel za = association_model(zero, 32.0);
    CHECK(cond_rate_cov_high(zero, za, Tier::macro) == 1.0);
    for (const Tier t : {Tier::macro, Tier::small})
        CHECK(cond_rate_cov_low(zero, za, t).raw <= 1.0 + 1e-9);

    // Without attraction at unit power the low-battery coverage tracks the high one.
    ScenarioConfig plain = cfg;
    plain.r_hat_a = 0.0;
    const AssociationModel pa = association_model(plain, 1.0);
    const double high = cond_rate_cov_high(plain, pa, Tier::small);
    CHECK(std::abs(cond_rate_cov_low(plain, pa, Tier::small).value - high) < 0.02);
    CHECK(std::abs(cond_rate_cov_low(plain, pa, Tier::macro).value - high) < 0.02);
}

TEST_CASE("rate coverage assembly")
{
    const ScenarioConfig cfg = preset("fig3a");
    const RateCoverageBreakdown b = rate_coverage(cfg, 32.0);
    CHECK(b.r_total == doctest::Approx(0.008778).epsilon(1e-3));
    CHECK(b.r_total == doctest::Approx(b.tiers[0].contribution + b.tiers[1].contribution));
    CHECK(b.warnings.empty());

    ScenarioConfig idle = cfg;
    idle.u_low = 0.0;
    idle.u_high = 0.0;
    CHECK(rate_coverage(idle, 32.0).r_total == 0.0);

    ScenarioConfig lonely = cfg;
    lonely.lambda_user = 1e-12;
    const RateCoverageBreakdown l = rate_coverage(lonely, 32.0);
    CHECK(l.r_total ==
          doctest::Approx(l.tiers[0].association_weighted + l.tiers[1].association_weighted).epsilon(1e-6));

    ModelOptions from_one;
    from_one.load_sum_start = 1;
    CHECK(rate_coverage(cfg, 32.0, from_one).r_total < b.r_total);

    CHECK_THROWS_AS(rate_coverage(cfg, 0.5), DomainError);
}

TEST_CASE("association distance laws")
{
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const ScenarioConfig cfg = test::random_config(rng);
        const double p_tc = test::random_p_tc(rng);
        for (const Tier t : {Tier::macro, Tier::small})
            for (const UserClass c : {UserClass::high, UserClass::low}) {
                if (c == UserClass::low && association_model(cfg, p_tc).a_low[tier_index(t)] <= 1e-12)
                    continue;
                const AssociationDistancePdf pdf = assoc_distance_pdf(cfg, p_tc, t, c);
                CHECK(std::abs(pdf.total_mass() - 1.0) <= 1e-6);
                // Closed-form CDF against quadrature of the density.
                const double r = 0.5 / std::sqrt(cfg.lambda(t));
                const double numeric = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                    [&](double x) { return pdf.density(x); }, 0.0, r, 20, 1e-12);
                const double atom = (r >= pdf.atom_location()) ? pdf.atom_weight() : 0.0;
                CHECK(pdf.cdf(r) == doctest::Approx(numeric + atom).epsilon(1e-6));
            }
    }

    const ScenarioConfig cfg = preset("fig3a");
    const AssociationDistancePdf low2 = assoc_distance_pdf(cfg, 32.0, Tier::small, UserClass::low);
    CHECK(low2.atom_location() == doctest::Approx(2.0));
    CHECK(low2.cdf(2.0) - low2.cdf_left(2.0) == doctest::Approx(low2.atom_weight()));
    CHECK(low2.density(3.0) == 0.0);

    ScenarioConfig still = cfg;
    still.r_hat_a = 0.0;
    CHECK(assoc_distance_pdf(still, 1.0, Tier::small, UserClass::low).atom_weight() == 0.0);
}

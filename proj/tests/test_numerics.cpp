#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "san/numerics.hpp"

using namespace san;
using numerics::Quadrature;

namespace {

constexpr double pi = std::numbers::pi;

// E1(t) by double-exponential quadrature, independent of the library.
double ei_oracle(double x)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    return -integrator.integrate([](double t) { return std::exp(-t) / t; }, -x, std::numeric_limits<double>::infinity());
}

} // namespace

TEST_CASE("integrate_to_infinity reproduces known integrals")
{
    const Quadrature q;
    CHECK(q.integrate_to_infinity([](double u) { return std::exp(-u); }, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(q.integrate_to_infinity([](double u) { return 1.0 / (1.0 + u * u); }, 1.0) - pi / 4.0) < 1e-10);
    const double arctan_tail = q.integrate_to_infinity([](double u) { return 1.0 / (1.0 + u * u); }, 2.0);
    CHECK(std::abs(arctan_tail - (pi / 2.0 - std::atan(2.0))) < 1e-8);
    CHECK(std::abs(arctan_tail - 0.463648) < 1e-6);
}

TEST_CASE("finite integration agrees with tanh-sinh")
{
    const Quadrature q;
    auto f = [](double x) { return std::sqrt(x) * std::log1p(x); };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double ref = ts.integrate(f, 0.0, 3.0);
    CHECK(q.integrate(f, 0.0, 3.0) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(q.integrate(f, 2.0, 2.0) == 0.0);
}

TEST_CASE("quadrature rejects bad settings and reports non-convergence")
{
    Quadrature bad;
    bad.relative_tolerance = -1.0;
    CHECK_THROWS_AS(bad.check(), DomainError);

    Quadrature tight;
    tight.max_subdivisions = 16;
    tight.relative_tolerance = 1e-15;
    tight.absolute_tolerance = 1e-300;
    CHECK_THROWS_AS(tight.integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0), NonConvergence);
}

TEST_CASE("exponential integral matches reference values")
{
    CHECK(std::abs(numerics::exponential_integral_ei(-1.0) - (-0.219383934395520)) < 1e-10);
    // gamma + ln(1e-3) - 1e-3 + 1e-6/4 - ...
    const double small = std::numbers::egamma + std::log(1e-3) - 1e-3 + 2.5e-7;
    CHECK(std::abs(numerics::exponential_integral_ei(-1e-3) - small) < 1e-9);
    CHECK(std::abs(numerics::exponential_integral_ei(-1e-3) - (-6.331540)) < 1e-5);
    CHECK_THROWS_AS(numerics::exponential_integral_ei(0.0), DomainError);
    CHECK_THROWS_AS(numerics::exponential_integral_ei(0.5), DomainError);
}

TEST_CASE("exponential integral agrees with Boost and quadrature across the range")
{
    double previous = std::numeric_limits<double>::infinity();
    for (double x = -50.0; x <= -0.01; x *= 0.93) {
        const double v = numerics::exponential_integral_ei(x);
        CAPTURE(x);
        CHECK(v == doctest::Approx(boost::math::expint(x)).epsilon(1e-12));
        CHECK(v == doctest::Approx(ei_oracle(x)).epsilon(1e-9));
        CHECK(v < 0.0);
        // Ei(x) rises toward 0 as x -> -inf, so moving right it falls.
        CHECK(v <= previous);
        previous = v;
    }
    CHECK(numerics::exponential_integral_ei(-700.0) > -1e-300);
}

TEST_CASE("stationary distribution")
{
    SUBCASE("swap chain")
    {
        const auto q = numerics::stationary_distribution({{0.0, 1.0}, {1.0, 0.0}});
        CHECK(q[0] == doctest::Approx(0.5));
        CHECK(q[1] == doctest::Approx(0.5));
    }
    SUBCASE("identity has many stationary vectors")
    {
        numerics::Matrix id(4, std::vector<double>(4, 0.0));
        for (int i = 0; i < 4; ++i)
            id[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
        CHECK_THROWS_AS(numerics::stationary_distribution(id), NonUniqueStationary);
    }
    SUBCASE("draining battery chain is absorbed at the empty state")
    {
        const numerics::Matrix t = {
            {1.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.0, 0.0}, {0.0, 0.5, 0.5, 0.0}, {0.0, 0.0, 0.5, 0.5}};
        const auto q = numerics::stationary_distribution(t);
        CHECK(q[0] == doctest::Approx(1.0));
        CHECK(std::abs(q[1]) + std::abs(q[2]) + std::abs(q[3]) < 1e-14);
    }
    SUBCASE("rejects non-stochastic input")
    {
        CHECK_THROWS_AS(numerics::stationary_distribution({{0.5, 0.6}, {0.5, 0.5}}), NotStochastic);
        CHECK_THROWS_AS(numerics::stationary_distribution({{1.2, -0.2}, {0.5, 0.5}}), NotStochastic);
    }
    SUBCASE("general three-state chain satisfies balance")
    {
        const numerics::Matrix t = {{0.1, 0.6, 0.3}, {0.4, 0.4, 0.2}, {0.25, 0.25, 0.5}};
        const auto q = numerics::stationary_distribution(t);
        double total = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                s += q[i] * t[i][j];
            CHECK(std::abs(s - q[j]) < 1e-14);
            total += q[j];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("grid search")
{
    const auto quad = numerics::grid_maximize([](double x) { return -(x - 2.0) * (x - 2.0); }, 0.0, 10.0, 64, 4);
    CHECK(std::abs(quad.argmax - 2.0) < 1e-3);

    const auto mono = numerics::grid_maximize([](double x) { return x; }, 0.0, 1.0, 16, 3);
    CHECK(mono.argmax == 1.0);

    const auto sine = numerics::grid_maximize([](double x) { return std::sin(x); }, 0.0, pi, 64, 4);
    CHECK(std::abs(sine.argmax - pi / 2.0) < 1e-3);

    const auto flat = numerics::grid_maximize([](double) { return 1.0; }, 1.0, 100.0, 8, 2, numerics::GridScale::log);
    CHECK(flat.argmax == 1.0);

    const auto logpeak =
        numerics::grid_maximize([](double x) { return -std::pow(std::log(x / 30.0), 2); }, 1.0, 1e4, 32, 4,
                                numerics::GridScale::log);
    CHECK(logpeak.argmax == doctest::Approx(30.0).epsilon(1e-3));

    CHECK_THROWS_AS(numerics::grid_maximize([](double x) { return x; }, 1.0, 1.0, 16, 2), InvalidRange);
    CHECK_THROWS_AS(numerics::grid_maximize([](double x) { return x; }, 0.0, 1.0, 16, 2, numerics::GridScale::log),
                    InvalidRange);

    int last_round = 0;
    for (const auto& s : quad.trace) {
        CHECK(s.round >= last_round);
        last_round = s.round;
    }
}

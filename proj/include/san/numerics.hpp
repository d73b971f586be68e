#pragma once

#include <functional>
#include <vector>

#include "san/errors.hpp"

namespace san::numerics {

using Integrand = std::function<double(double)>;

/// Adaptive 15-point Gauss-Kronrod quadrature with a global error budget.
///
/// Intervals are bisected in order of decreasing error estimate until the
/// summed estimate drops below max(absolute_tolerance,
/// relative_tolerance * |result|). Exhausting max_subdivisions throws
/// NonConvergence.
struct Quadrature {
    double relative_tolerance = 1e-10;
    double absolute_tolerance = 1e-12;
    int max_subdivisions = 2000;

    /// Throws DomainError when the tolerances or budget are out of range.
    void check() const;

    double integrate(const Integrand& f, double lo, double hi) const;

    /// Integral over [lower, inf) after the substitution u = lower + (1 - s) / s,
    /// which maps s in (0, 1] onto [lower, inf). Slowly decaying tails become an
    /// integrable endpoint singularity at s = 0, where doubles keep full
    /// resolution.
    double integrate_to_infinity(const Integrand& f, double lower) const;
};

/// Ei(x) for x < 0, i.e. -E1(-x). Series for |x| <= 1, Lentz continued fraction
/// beyond. Throws DomainError when x >= 0.
double exponential_integral_ei(double x);

using Matrix = std::vector<std::vector<double>>;

/// Stationary vector q of a row-stochastic matrix (qT = q, sum q = 1).
///
/// Solved directly: one balance equation is replaced by the normalization
/// row. Throws NotStochastic for negative entries or bad row sums and
/// NonUniqueStationary when the chain has more than one closed class.
std::vector<double> stationary_distribution(const Matrix& transition);

enum class GridScale { linear, log };

struct GridSample {
    double x;
    double value;
    int round;
};

struct GridResult {
    double argmax;
    double max_value;
    std::vector<GridSample> trace;
};

/// Multi-round grid search. Each round evaluates grid_points evenly spaced
/// abscissae (in x or log x) over the current bracket, then narrows the bracket
/// to the neighbours of the incumbent. Ties keep the smallest x.
GridResult grid_maximize(const std::function<double(double)>& objective, double lo, double hi,
                         int grid_points, int refine_rounds, GridScale scale = GridScale::linear);

} // namespace san::numerics

#include "san/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace san::numerics {

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod15(const Integrand& f, double lo, double hi)
{
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * pair;
        if (j % 2 == 1)
            gauss += kGaussWeights[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

constexpr double kEulerGamma = 0.577215664901532860606512090082402;

} // namespace

void Quadrature::check() const
{
    if (!(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0) || max_subdivisions < 16)
        throw DomainError("quadrature needs positive tolerances and max_subdivisions >= 16");
}

double Quadrature::integrate(const Integrand& f, double lo, double hi) const
{
    check();
    if (lo == hi)
        return 0.0;
    if (lo > hi)
        return -integrate(f, hi, lo);

    std::priority_queue<Panel> panels;
    Panel first = kronrod15(f, lo, hi);
    double total = first.value;
    double error = first.error;
    panels.push(first);

    int subdivisions = 0;
    while (error > std::max(absolute_tolerance, relative_tolerance * std::abs(total))) {
        if (subdivisions >= max_subdivisions) {
            std::ostringstream msg;
            msg << "adaptive quadrature on [" << lo << ", " << hi << "] did not reach tolerance after "
                << max_subdivisions << " subdivisions (error estimate " << error << ")";
            throw NonConvergence(msg.str());
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            // Panel cannot be split further in double precision.
            throw NonConvergence("adaptive quadrature reached floating-point resolution");
        }
        const Panel left = kronrod15(f, worst.lo, mid);
        const Panel right = kronrod15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++subdivisions;
    }

    // Re-sum to shed the drift of the incremental updates.
    double sum = 0.0;
    while (!panels.empty()) {
        sum += panels.top().value;
        panels.pop();
    }
    return sum;
}

double Quadrature::integrate_to_infinity(const Integrand& f, double lower) const
{
    if (!(lower >= 0.0))
        throw DomainError("integrate_to_infinity requires lower >= 0");
    auto mapped = [&f, lower](double s) {
        const double u = lower + (1.0 - s) / s;
        const double fu = f(u);
        return fu == 0.0 ? 0.0 : fu / s / s;
    };
    return integrate(mapped, 0.0, 1.0);
}

double exponential_integral_ei(double x)
{
    if (std::isnan(x) || x >= 0.0)
        throw DomainError("exponential_integral_ei is defined here only for x < 0");
    const double z = -x;
    if (std::isinf(z))
        return -0.0;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double e1 = 0.0;
    if (z <= 1.0) {
        // E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
        double term = 1.0;
        double sum = 0.0;
        for (int k = 1; k < 200; ++k) {
            term *= -z / k;
            const double contrib = term / k;
            sum += contrib;
            if (std::abs(contrib) < eps * std::abs(sum))
                break;
        }
        e1 = -kEulerGamma - std::log(z) - sum;
    } else {
        // Modified Lentz evaluation of the continued fraction for e^z E1(z).
        constexpr double tiny = 1e-300;
        double b = z + 1.0;
        double c = 1.0 / tiny;
        double d = 1.0 / b;
        double h = d;
        for (int i = 1; i < 10000; ++i) {
            const double an = -static_cast<double>(i) * i;
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            const double del = c * d;
            h *= del;
            if (std::abs(del - 1.0) < eps)
                break;
        }
        e1 = h * std::exp(-z);
    }
    return -e1;
}

std::vector<double> stationary_distribution(const Matrix& transition)
{
    const std::size_t n = transition.size();
    if (n == 0)
        throw NotStochastic("transition matrix is empty");
    for (std::size_t i = 0; i < n; ++i) {
        if (transition[i].size() != n)
            throw NotStochastic("transition matrix is not square");
        double row = 0.0;
        for (double v : transition[i]) {
            if (!(v >= -1e-12))
                throw NotStochastic("transition matrix has a negative entry in row " + std::to_string(i));
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw NotStochastic("row " + std::to_string(i) + " sums to " + std::to_string(row));
    }

    // Balance equations (T^T - I) q = 0 with the last one replaced by sum q = 1.
    Eigen::MatrixXd system(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            system(r, c) = transition[c][r] - (r == c ? 1.0 : 0.0);
    system.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
        throw NonUniqueStationary("stationary distribution is not unique (rank " + std::to_string(lu.rank()) +
                                  " of " + std::to_string(n) + ")");
    const Eigen::VectorXd solution = lu.solve(rhs);

    std::vector<double> q(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = std::max(solution(i), 0.0);
        sum += q[i];
    }
    for (double& v : q)
        v /= sum;
    return q;
}

GridResult grid_maximize(const std::function<double(double)>& objective, double lo, double hi, int grid_points,
                         int refine_rounds, GridScale scale)
{
    if (!(lo < hi))
        throw InvalidRange("grid_maximize requires lo < hi");
    if (grid_points < 8)
        throw InvalidRange("grid_maximize requires at least 8 grid points");
    if (scale == GridScale::log && !(lo > 0.0))
        throw InvalidRange("log-scaled grid requires lo > 0");

    auto to_axis = [scale](double x) { return scale == GridScale::log ? std::log(x) : x; };
    auto from_axis = [scale](double t) { return scale == GridScale::log ? std::exp(t) : t; };

    GridResult result{lo, -std::numeric_limits<double>::infinity(), {}};
    const double axis_lo = to_axis(lo);
    const double axis_hi = to_axis(hi);
    double left = axis_lo;
    double right = axis_hi;

    for (int round = 0; round <= refine_rounds; ++round) {
        const double step = (right - left) / (grid_points - 1);
        int best = -1;
        double best_value = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid_points; ++i) {
            const double t = (i == grid_points - 1) ? right : left + step * i;
            double x = from_axis(t);
            // Pin the outer endpoints exactly.
            if (t == axis_lo)
                x = lo;
            if (t == axis_hi)
                x = hi;
            const double value = objective(x);
            result.trace.push_back({x, value, round});
            if (value > best_value) {
                best_value = value;
                best = i;
            }
            if (value > result.max_value || (value == result.max_value && x < result.argmax)) {
                result.max_value = value;
                result.argmax = x;
            }
        }
        if (best < 0)
            break;
        const double center = left + step * best;
        left = std::max(axis_lo, center - step);
        right = std::min(axis_hi, center + step);
        if (!(right > left))
            break;
    }
    return result;
}

} // namespace san::numerics

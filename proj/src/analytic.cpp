#include "san/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace san::analytic {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double tail_tolerance = 1e-6;
constexpr double range_slack = 1e-6;

// e^{-a} - e^{-b} for 0 <= a <= b without cancellation.
double exp_difference(double a, double b) { return -std::exp(-a) * std::expm1(-(b - a)); }

double power_ratio_term(const ScenarioConfig& cfg, Tier from, Tier to)
{
    return std::pow(cfg.power(from) / cfg.power(to), 2.0 / cfg.alpha);
}

// Gamma-form PMF over 0..n_max, trimmed where the remaining terms are negligible.
std::vector<double> gamma_form_vector(double mean_arg, int n_max)
{
    if (mean_arg <= 0.0)
        return {1.0};
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::min(n_max + 1, 1 << 16)));
    const double mode = mean_arg;
    for (int n = 0; n <= n_max; ++n) {
        const double p = gamma_form_pmf(mean_arg, n);
        out.push_back(p);
        if (n > mode * 1.3 + 10.0 && p < 1e-22)
            break;
    }
    return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b, int n_max)
{
    const std::size_t limit = static_cast<std::size_t>(n_max) + 1;
    const std::size_t full = a.size() + b.size() - 1;
    const std::size_t size = std::min(full, limit);
    std::vector<double> out(size, 0.0);

    if (static_cast<double>(a.size()) * static_cast<double>(b.size()) < 4e6) {
        for (std::size_t i = 0; i < a.size() && i < size; ++i) {
            if (a[i] == 0.0)
                continue;
            const std::size_t jmax = std::min(b.size(), size - i);
            for (std::size_t j = 0; j < jmax; ++j)
                out[i + j] += a[i] * b[j];
        }
        return out;
    }

    std::size_t n = 1;
    while (n < full)
        n <<= 1;
    std::vector<double> pa(a), pb(b);
    pa.resize(n, 0.0);
    pb.resize(n, 0.0);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> fa, fb;
    fft.fwd(fa, pa);
    fft.fwd(fb, pb);
    for (std::size_t i = 0; i < fa.size(); ++i)
        fa[i] *= fb[i];
    std::vector<double> back;
    fft.inv(back, fa);
    for (std::size_t i = 0; i < size; ++i)
        out[i] = std::max(0.0, back[i]);
    return out;
}

double rho_alpha4(double tau, double lower) { return std::sqrt(tau) * std::atan2(1.0, lower); }

void check_p_tc(double p_tc)
{
    if (!(p_tc >= 1.0))
        throw DomainError("charging power p_tc must be >= 1 (normalized by P_u)");
}

ConditionalCoverage finish(std::vector<double> terms)
{
    ConditionalCoverage out;
    out.terms = std::move(terms);
    for (const double t : out.terms) {
        out.raw += t;
        if (t < -range_slack || t > 1.0 + range_slack)
            out.out_of_range = true;
    }
    if (out.raw < -range_slack || out.raw > 1.0 + range_slack || !std::isfinite(out.raw))
        out.out_of_range = true;
    out.value = std::isfinite(out.raw) ? std::clamp(out.raw, 0.0, 1.0) : 0.0;
    return out;
}

} // namespace

double assoc_prob_high(const ScenarioConfig& cfg, Tier tier)
{
    double denom = 0.0;
    for (const Tier i : {Tier::macro, Tier::small})
        denom += cfg.lambda(i) * power_ratio_term(cfg, i, tier);
    return cfg.lambda(tier) / denom;
}

double assoc_prob_low(const ScenarioConfig& cfg, double p_tc, Tier tier)
{
    const double r_s = derive(cfg, p_tc).r_s;
    const double a2h = assoc_prob_high(cfg, Tier::small);
    const double a_s = pi * cfg.lambda_small * r_s * r_s;
    // A_1^l = e^{-a_s} - A_2^h e^{-a_s / A_2^h}; A_2^l is its complement.
    const double a1l = std::exp(-a_s) - a2h * std::exp(-a_s / a2h);
    return tier == Tier::macro ? a1l : 1.0 - a1l;
}

AssociationModel association_model(const ScenarioConfig& cfg, double p_tc)
{
    const DerivedQuantities d = derive(cfg, p_tc);
    AssociationModel m;
    m.a_high = {assoc_prob_high(cfg, Tier::macro), assoc_prob_high(cfg, Tier::small)};
    m.a_low = {assoc_prob_low(cfg, p_tc, Tier::macro), assoc_prob_low(cfg, p_tc, Tier::small)};
    m.r_c = d.r_c;
    m.r_s = d.r_s;
    m.m_distance = d.r_s * std::pow(d.power_ratio, 1.0 / cfg.alpha);
    m.lambda_tilde = (cfg.lambda_small / cfg.lambda_macro) * std::pow(1.0 / d.power_ratio, 2.0 / cfg.alpha);
    return m;
}

ChargeProbabilities charge_probs(const ScenarioConfig& cfg, double p_tc)
{
    const DerivedQuantities d = derive(cfg, p_tc);
    const double base = pi * cfg.lambda_small * d.r_c * d.r_c;
    auto band = [&](double j) { return base * std::pow(j, -2.0 / cfg.beta); };
    const double a1 = band(1.0), a2 = band(2.0), a3 = band(3.0);
    const double a_s = pi * cfg.lambda_small * d.r_s * d.r_s;

    ChargeProbabilities c;
    // The exponent of the second term carries a minus sign here; with a plus
    // sign the band probability would be negative.
    c.c_low[0] = exp_difference(a2, a_s);
    c.c_low[1] = exp_difference(a3, a2);
    c.c_low[2] = -std::expm1(-a3);
    c.c_high = -std::expm1(-a1);
    return c;
}

numerics::Matrix transition_matrix(const ScenarioConfig& cfg, const ChargeProbabilities& charge)
{
    const double ul = cfg.u_low;
    const double uh = cfg.u_high;
    const auto& c = charge.c_low;
    numerics::Matrix t = {
        {0.0, c[0], c[1], c[2]},
        {ul, 0.0, c[0], c[1]},
        {0.0, ul, 0.0, c[0]},
        {0.0, 0.0, uh, 0.0},
    };
    // Off-diagonals snap to the 2^-53 grid (error <= 2^-54), so every partial
    // row sum is exact and the diagonal 1 - u - sum c closes each row to
    // exactly one in any summation order.
    for (std::size_t i = 0; i < t.size(); ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (j == i)
                continue;
            t[i][j] = std::ldexp(std::nearbyint(std::ldexp(t[i][j], 53)), -53);
            off += t[i][j];
        }
        t[i][i] = 1.0 - off;
    }
    return t;
}

BatteryChain battery_chain(const ScenarioConfig& cfg, double p_tc)
{
    BatteryChain chain;
    chain.charge = charge_probs(cfg, p_tc);
    chain.transition = transition_matrix(cfg, chain.charge);
    const std::vector<double> q = numerics::stationary_distribution(chain.transition);
    std::copy(q.begin(), q.end(), chain.steady.begin());
    chain.p_high = (chain.steady[2] + chain.steady[3]) * cfg.u_high;
    chain.p_low = chain.steady[1] * cfg.u_low;
    return chain;
}

double gamma_form_pmf(double mean_arg, int n)
{
    if (n < 0)
        return 0.0;
    if (mean_arg <= 0.0)
        return n == 0 ? 1.0 : 0.0;
    const double nn = static_cast<double>(n);
    const double log_p = 3.5 * std::log(3.5) + std::lgamma(nn + 4.5) - std::lgamma(nn + 1.0) - std::lgamma(3.5) +
                         nn * std::log(mean_arg) - (nn + 4.5) * std::log(3.5 + mean_arg);
    return std::exp(log_p);
}

double LoadPmf::total_mass() const
{
    double s = 0.0;
    for (const double p : pmf_total)
        s += p;
    return s;
}

double LoadPmf::mean() const
{
    double s = 0.0;
    for (std::size_t n = 0; n < pmf_total.size(); ++n)
        s += static_cast<double>(n) * pmf_total[n];
    return s;
}

double LoadPmf::share(int start) const
{
    double s = 0.0;
    for (std::size_t n = static_cast<std::size_t>(std::max(start, 0)); n < pmf_total.size(); ++n)
        s += pmf_total[n] / static_cast<double>(n + 1);
    return s;
}

LoadPmf load_pmf(const ScenarioConfig& cfg, const BatteryChain& chain, const AssociationModel& assoc, Tier tier,
                 int n_max)
{
    if (n_max < 0)
        throw DomainError("n_max must be non-negative");
    const int k = tier_index(tier);
    const double scale = cfg.lambda_user / cfg.lambda(tier);

    LoadPmf out;
    out.tier = tier;
    out.truncation = n_max;
    out.mean_high = scale * chain.p_high * assoc.a_high[k];
    out.mean_low = scale * chain.p_low * assoc.a_low[k];
    out.pmf_high = gamma_form_vector(out.mean_high, n_max);
    out.pmf_low = gamma_form_vector(out.mean_low, n_max);
    out.pmf_total = convolve(out.pmf_high, out.pmf_low, n_max);

    const double tail = 1.0 - out.total_mass();
    if (tail > tail_tolerance)
        throw TruncationError("load PMF tail mass " + std::to_string(tail) + " exceeds 1e-6 at n_max = " +
                              std::to_string(n_max));
    return out;
}

LoadPmf load_pmf_auto(const ScenarioConfig& cfg, const BatteryChain& chain, const AssociationModel& assoc, Tier tier,
                      int initial)
{
    constexpr int ceiling = 1 << 24;
    int n_max = std::max(initial, 1);
    // Skip doublings that are certain to fail: the sum of the two marginal
    // means plus a generous multiple of their spread.
    const int k = tier_index(tier);
    const double scale = cfg.lambda_user / cfg.lambda(tier);
    const double m = 1.2857142857142858 * scale * (chain.p_high * assoc.a_high[k] + chain.p_low * assoc.a_low[k]);
    while (n_max < ceiling && n_max < m)
        n_max *= 2;
    for (;;) {
        try {
            return load_pmf(cfg, chain, assoc, tier, n_max);
        } catch (const TruncationError&) {
            if (n_max >= ceiling)
                throw;
            n_max *= 2;
        }
    }
}

double rho(const ScenarioConfig& cfg, double m_distance, double x, const numerics::Quadrature& quad)
{
    if (!(x > 0.0) || !(m_distance > 0.0))
        throw DomainError("rho requires positive distances");
    const double tau = sir_threshold(cfg);
    if (tau == 0.0)
        return 0.0;
    const double scale = std::pow(tau, 2.0 / cfg.alpha);
    const double ratio = m_distance / x;
    const double lower = ratio * ratio / scale;
    if (cfg.alpha == 4.0)
        return rho_alpha4(tau, lower);
    const double half = cfg.alpha / 2.0;
    return scale * quad.integrate_to_infinity([half](double u) { return 1.0 / (1.0 + std::pow(u, half)); }, lower);
}

double cond_rate_cov_high(const ScenarioConfig& cfg, const AssociationModel& assoc, Tier /*tier*/,
                          const numerics::Quadrature& quad)
{
    return 1.0 / (1.0 + rho(cfg, assoc.m_distance, assoc.m_distance, quad));
}

namespace {

ConditionalCoverage low_coverage(const ScenarioConfig& cfg, const AssociationModel& a, Tier tier, double rho_m,
                                 const ModelOptions& options)
{
    const bool printed = options.reading == Eq5Reading::printed;
    const double l1 = (1.0 + rho_m) / a.a_high[0];
    const double l2 = (1.0 + rho_m) / a.a_high[1];
    const double a_s = pi * cfg.lambda_small * a.r_s * a.r_s;
    const double a_c = pi * cfg.lambda_small * a.r_c * a.r_c;

    if (tier == Tier::macro) {
        const double a1l = a.a_low[0];
        if (a1l <= 0.0)
            return finish({0.0});
        const double t1 = std::exp(-a_s * l2) / (l1 * a1l);
        const double lam1 = cfg.lambda_macro;
        const double lt = a.lambda_tilde;
        const double m = a.m_distance;
        auto integrand = [&](double r) {
            if (r <= 0.0)
                return 0.0;
            const double exponent = pi * lam1 * r * r * (1.0 + rho_m + lt * rho(cfg, m, r, options.quadrature));
            return r * std::exp(-exponent);
        };
        const double integral = options.quadrature.integrate(integrand, 0.0, m);
        const double density = printed ? 1.0 : 2.0 * pi * lam1;
        const double t2 = std::exp(-a_s) / a1l * density * integral;
        return finish({t1, t2});
    }

    const double a2h = a.a_high[1];
    const double a2l = a.a_low[1];
    if (a2l <= 0.0)
        return finish({0.0});
    const double t1 = printed ? l2 * std::exp(-a_s * l2) / a2l : std::exp(-a_s * l2) / (l2 * a2l);
    const double g = 1.0 + rho_m / a2h;
    const double t2 = a2h * -std::expm1(-a_c * g) / (a2l * (a2h + rho_m));
    // e^{-a_c g} - e^{-a_c (rho/A + (1 + r_hat/r_c)^2)}, with a_c (1 + r_hat/r_c)^2 = a_s.
    const double shift = a_c * rho_m / a2h;
    const double t3 = exp_difference(shift + a_c, shift + a_s) / a2l;
    return finish({t1, t2, t3});
}

} // namespace

ConditionalCoverage cond_rate_cov_low(const ScenarioConfig& cfg, const AssociationModel& assoc, Tier tier,
                                      const ModelOptions& options)
{
    const double rho_m = rho(cfg, assoc.m_distance, assoc.m_distance, options.quadrature);
    return low_coverage(cfg, assoc, tier, rho_m, options);
}

Evaluation::Evaluation(const ScenarioConfig& cfg, double p_tc, ModelOptions options)
    : cfg_(validate(cfg)), p_tc_(p_tc), options_(std::move(options))
{
    check_p_tc(p_tc);
    derived_ = derive(cfg_, p_tc_);
    assoc_ = association_model(cfg_, p_tc_);
    chain_ = battery_chain(cfg_, p_tc_);
    rho_m_ = rho(cfg_, assoc_.m_distance, assoc_.m_distance, options_.quadrature);
    for (const Tier t : {Tier::macro, Tier::small})
        cond_low_[tier_index(t)] = low_coverage(cfg_, assoc_, t, rho_m_, options_);
}

double Evaluation::association_weighted(Tier tier) const
{
    const int k = tier_index(tier);
    return chain_.p_high * assoc_.a_high[k] * cond_high() + chain_.p_low * assoc_.a_low[k] * cond_low_[k].value;
}

RateCoverageBreakdown rate_coverage(const ScenarioConfig& cfg, double p_tc, const ModelOptions& options)
{
    const Evaluation ev(cfg, p_tc, options);
    RateCoverageBreakdown out;
    out.association = ev.association();
    out.chain = ev.chain();
    out.rho_m = ev.rho_m();
    out.r_high = ev.cond_high();
    for (const Tier t : {Tier::macro, Tier::small}) {
        const int k = tier_index(t);
        out.r_low[k] = ev.cond_low(t);
        if (out.r_low[k].out_of_range)
            out.warnings.push_back(std::string("conditional low-battery coverage of tier ") + std::to_string(k + 1) +
                                   " left [0, 1] before clamping (raw " + std::to_string(out.r_low[k].raw) + ")");
        const LoadPmf pmf = load_pmf_auto(ev.config(), ev.chain(), ev.association(), t, options.n_max);
        TierComponents& c = out.tiers[k];
        c.association_weighted = ev.association_weighted(t);
        c.load_share = pmf.share(options.load_sum_start);
        c.contribution = c.load_share * c.association_weighted;
        c.mean_load = pmf.mean();
        out.r_total += c.contribution;
    }
    return out;
}

AssociationDistancePdf::AssociationDistancePdf(std::vector<DistancePiece> pieces, double atom_location,
                                               double atom_weight)
    : pieces_(std::move(pieces)), atom_location_(atom_location), atom_weight_(atom_weight)
{
}

double AssociationDistancePdf::density(double r) const
{
    for (const auto& p : pieces_)
        if (r >= p.lo && r < p.hi)
            return p.coefficient * r * std::exp(-p.rate * r * r);
    return 0.0;
}

namespace {

// int_lo^hi c r e^{-s r^2} dr
double piece_mass(const DistancePiece& p, double hi)
{
    if (hi <= p.lo)
        return 0.0;
    const double top = std::min(hi, p.hi);
    const double lo2 = p.rate * p.lo * p.lo;
    if (std::isinf(top))
        return p.coefficient / (2.0 * p.rate) * std::exp(-lo2);
    return p.coefficient / (2.0 * p.rate) * exp_difference(lo2, p.rate * top * top);
}

} // namespace

double AssociationDistancePdf::cdf_left(double r) const
{
    double s = 0.0;
    for (const auto& p : pieces_)
        s += piece_mass(p, r);
    if (r > atom_location_)
        s += atom_weight_;
    return s;
}

double AssociationDistancePdf::cdf(double r) const
{
    double s = 0.0;
    for (const auto& p : pieces_)
        s += piece_mass(p, r);
    if (r >= atom_location_)
        s += atom_weight_;
    return s;
}

double AssociationDistancePdf::total_mass() const
{
    return cdf(std::numeric_limits<double>::infinity());
}

AssociationDistancePdf assoc_distance_pdf(const ScenarioConfig& cfg, double p_tc, Tier tier, UserClass cls)
{
    check_p_tc(p_tc);
    const AssociationModel a = association_model(cfg, p_tc);
    const int k = tier_index(tier);
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (cls == UserClass::high) {
        const double lam = cfg.lambda(tier);
        const double c = 2.0 * pi * lam / a.a_high[k];
        return AssociationDistancePdf({{0.0, inf, c, pi * lam / a.a_high[k]}}, nan, 0.0);
    }

    const double al = a.a_low[k];
    if (!(al > 0.0))
        throw DomainError("association probability of the requested tier is zero");

    if (tier == Tier::small) {
        const double lam = cfg.lambda_small;
        const double c = 2.0 * pi * lam / al;
        const double atom = exp_difference(pi * lam * a.r_c * a.r_c, pi * lam * a.r_s * a.r_s) / al;
        return AssociationDistancePdf({{0.0, a.r_c, c, pi * lam}, {a.r_s, inf, c, pi * lam / a.a_high[1]}}, a.r_c,
                                      atom);
    }

    const double lam = cfg.lambda_macro;
    const double near = 2.0 * pi * lam * std::exp(-pi * cfg.lambda_small * a.r_s * a.r_s) / al;
    const double far = 2.0 * pi * lam / al;
    return AssociationDistancePdf({{0.0, a.m_distance, near, pi * lam}, {a.m_distance, inf, far, pi * lam / a.a_high[0]}},
                                  nan, 0.0);
}

} // namespace san::analytic

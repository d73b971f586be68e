#include "san/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace san::sim {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::size_t poisson_count(double mean, Rng& rng)
{
    if (!(mean > 0.0))
        return 0;
    std::poisson_distribution<long long> dist(mean);
    return static_cast<std::size_t>(dist(rng));
}

// d^{-alpha} from a squared distance.
double path_gain(double d2, double alpha)
{
    if (alpha == 4.0)
        return 1.0 / (d2 * d2);
    return std::pow(d2, -0.5 * alpha);
}

struct MeasureRegion {
    double lo;
    double hi;

    bool contains(Point p) const { return p.x >= lo && p.x < hi && p.y >= lo && p.y < hi; }
};

MeasureRegion measure_region(const Network& net, double fraction)
{
    const double w = net.deployment().window;
    const double f = std::clamp(fraction, 0.0, 1.0);
    return {0.5 * w * (1.0 - f), 0.5 * w * (1.0 + f)};
}

// Visits measured users: calls visit(index, coverage) where coverage is the
// sampled indicator or the conditional probability.
template <typename Visit>
void for_each_measured(const ScenarioConfig& cfg, const Network& net, const UserRoster& roster, Rng& fading_rng,
                       const EstimatorOptions& options, Visit&& visit)
{
    const double tau = sir_threshold(cfg);
    const MeasureRegion region = measure_region(net, options.measure_fraction);
    const bool all = options.measured_users < 0;
    const std::size_t limit = all ? roster.size() : static_cast<std::size_t>(options.measured_users);
    std::size_t taken = 0;
    for (std::size_t i = 0; i < roster.size() && taken < limit; ++i) {
        const User& u = roster[i];
        if (!region.contains(u.position))
            continue;
        ++taken;
        double covered = 0.0;
        if (u.bs >= 0) {
            if (options.coverage == CoverageMode::conditional) {
                covered = coverage_given_geometry(cfg, net, u, tau);
            } else {
                const double sir = compute_sir(cfg, net, u, options.fading ? &fading_rng : nullptr);
                covered = sir > tau ? 1.0 : 0.0;
            }
        }
        visit(i, covered);
    }
}

} // namespace

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(master ^ splitmix64(index + 1));
}

Rng make_stream(std::uint64_t seed, std::uint64_t slot, Stream purpose)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(slot), static_cast<std::uint32_t>(slot >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return Rng(seq);
}

Deployment sample_deployment(const ScenarioConfig& cfg, double window, std::uint64_t seed)
{
    if (!(window > 0.0))
        throw ValidationError({"window must be positive"});
    Deployment d;
    d.window = window;
    d.seed = seed;
    Rng rng = make_stream(seed, 0, Stream::deployment);
    std::uniform_real_distribution<double> coord(0.0, window);
    const double area = window * window;
    for (const Tier t : {Tier::macro, Tier::small}) {
        auto& pts = t == Tier::macro ? d.macro_points : d.small_points;
        pts.resize(poisson_count(cfg.lambda(t) * area, rng));
        for (auto& p : pts) {
            p.x = coord(rng);
            p.y = coord(rng);
        }
    }
    return d;
}

Network::Network(Deployment deployment, Boundary boundary)
    : deployment_(std::move(deployment)),
      geometry_{deployment_.window, boundary},
      macro_index_(deployment_.macro_points, geometry_),
      small_index_(deployment_.small_points, geometry_)
{
}

SpatialIndex::Hit Network::nearest(Tier t, Point p) const
{
    return t == Tier::macro ? macro_index_.nearest(p) : small_index_.nearest(p);
}

double download_probability(const ScenarioConfig& cfg, int level)
{
    if (level <= 0)
        return 0.0;
    return level == 1 ? cfg.u_low : cfg.u_high;
}

void draw_positions(UserRoster& roster, const Network& net, Rng& rng)
{
    std::uniform_real_distribution<double> coord(0.0, net.deployment().window);
    for (User& u : roster) {
        u.position.x = coord(rng);
        u.position.y = coord(rng);
        u.post_sa_position = u.position;
    }
}

void mobility_step(const ScenarioConfig& cfg, const Network& net, UserRoster& roster, double p_tc)
{
    const DerivedQuantities d = derive(cfg, p_tc);
    const Geometry& g = net.geometry();
    for (User& u : roster) {
        const SpatialIndex::Hit hit = net.nearest(Tier::small, u.position);
        u.small_bs = hit.index;
        u.small_distance_initial = hit.distance;
        u.small_distance = hit.distance;
        u.post_sa_position = u.position;
        if (!attraction_eligible(u) || hit.index < 0)
            continue;
        if (hit.distance > d.r_c && hit.distance <= d.r_s) {
            const Point target = net.deployment().small_points[static_cast<std::size_t>(hit.index)];
            const Point step = g.delta(u.position, target);
            const double f = (hit.distance - d.r_c) / hit.distance;
            u.post_sa_position = g.wrap({u.position.x + f * step.x, u.position.y + f * step.y});
            u.small_distance = d.r_c;
        }
    }
}

namespace {

Association associate_within(const ScenarioConfig& cfg, const Network& net, const User& user, double r_s, double bias)
{
    Association a;
    if (user.small_bs >= 0 && attraction_eligible(user) && user.small_distance_initial <= r_s) {
        a.tier = Tier::small;
        a.bs = user.small_bs;
        a.distance = user.small_distance;
        return a;
    }
    const SpatialIndex::Hit m = net.nearest(Tier::macro, user.post_sa_position);
    const double d_small = user.small_bs >= 0 ? user.small_distance : infinity;
    // Compare P_2 bias d_2^{-alpha} with P_1 d_1^{-alpha} in log space; ties go to tier 1.
    const double score_macro = m.index >= 0 ? std::log(cfg.p_macro) - cfg.alpha * std::log(m.distance) : -infinity;
    const double score_small =
        user.small_bs >= 0 ? std::log(cfg.p_small * bias) - cfg.alpha * std::log(d_small) : -infinity;
    if (m.index < 0 && user.small_bs < 0)
        return a;
    if (score_small > score_macro) {
        a.tier = Tier::small;
        a.bs = user.small_bs;
        a.distance = d_small;
    } else {
        a.tier = Tier::macro;
        a.bs = m.index;
        a.distance = m.distance;
    }
    return a;
}

} // namespace

Association associate(const ScenarioConfig& cfg, const Network& net, const User& user, double p_tc, double bias)
{
    return associate_within(cfg, net, user, derive(cfg, p_tc).r_s, bias);
}

void associate_all(const ScenarioConfig& cfg, const Network& net, UserRoster& roster, double p_tc, double bias)
{
    const double r_s = derive(cfg, p_tc).r_s;
    for (User& u : roster) {
        const Association a = associate_within(cfg, net, u, r_s, bias);
        u.tier = a.tier;
        u.bs = a.bs;
        u.serving_distance = a.distance;
    }
}

double compute_sir(const ScenarioConfig& cfg, const Network& net, const User& user, Rng* fading_rng)
{
    if (user.bs < 0)
        return 0.0;
    const Geometry& g = net.geometry();
    std::exponential_distribution<double> fade(1.0);
    double signal = 0.0;
    double interference = 0.0;
    for (const Tier t : {Tier::macro, Tier::small}) {
        const auto& pts = net.deployment().points(t);
        const double power = cfg.power(t);
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double h = fading_rng ? fade(*fading_rng) : 1.0;
            const double d2 = g.distance_squared(user.post_sa_position, pts[j]);
            const double rx = power * h * path_gain(d2, cfg.alpha);
            if (t == user.tier && static_cast<int>(j) == user.bs)
                signal = rx;
            else
                interference += rx;
        }
    }
    if (interference == 0.0)
        return infinity;
    return signal / interference;
}

double coverage_given_geometry(const ScenarioConfig& cfg, const Network& net, const User& user, double tau)
{
    if (user.bs < 0)
        return 0.0;
    const Geometry& g = net.geometry();
    const Point serving = net.deployment().points(user.tier)[static_cast<std::size_t>(user.bs)];
    const double signal = cfg.power(user.tier) * path_gain(g.distance_squared(user.post_sa_position, serving), cfg.alpha);
    if (std::isinf(signal))
        return 1.0;
    double p = 1.0;
    for (const Tier t : {Tier::macro, Tier::small}) {
        const auto& pts = net.deployment().points(t);
        const double power = cfg.power(t);
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (t == user.tier && static_cast<int>(j) == user.bs)
                continue;
            const double rx = power * path_gain(g.distance_squared(user.post_sa_position, pts[j]), cfg.alpha);
            p /= 1.0 + tau * rx / signal;
        }
    }
    return p;
}

void draw_downloads(const ScenarioConfig& cfg, UserRoster& roster, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (User& u : roster)
        u.downloading = unit(rng) < download_probability(cfg, u.battery);
}

int charge_units(const ScenarioConfig& cfg, double p_tc, double d)
{
    const double r_c = derive(cfg, p_tc).r_c;
    const double de = std::max(d, 1.0);
    int units = 0;
    for (int i = 1; i <= cfg.battery_capacity_units; ++i)
        if (de <= r_c * std::pow(static_cast<double>(i), -1.0 / cfg.beta))
            units = i;
    return units;
}

void battery_step(const ScenarioConfig& cfg, UserRoster& roster, double p_tc, const std::vector<std::uint8_t>* covered)
{
    const double r_c = derive(cfg, p_tc).r_c;
    const int cap = cfg.battery_capacity_units;
    std::vector<double> thresholds;
    for (int i = 1; i <= cap; ++i)
        thresholds.push_back(r_c * std::pow(static_cast<double>(i), -1.0 / cfg.beta));

    for (std::size_t i = 0; i < roster.size(); ++i) {
        User& u = roster[i];
        const bool spend = u.downloading && (covered == nullptr || (*covered)[i] != 0);
        int level = u.battery;
        if (spend && level > 0)
            --level;
        if (u.tier == Tier::small && u.bs >= 0) {
            const double de = std::max(u.serving_distance, 1.0);
            int gain = 0;
            for (int k = 0; k < cap; ++k)
                if (de <= thresholds[static_cast<std::size_t>(k)])
                    gain = k + 1;
            level = std::min(cap, level + gain);
        }
        u.battery = static_cast<std::uint8_t>(level);
    }
}

std::array<std::vector<int>, 2> census(const Network& net, const UserRoster& roster)
{
    std::array<std::vector<int>, 2> counts{std::vector<int>(net.deployment().macro_points.size(), 0),
                                           std::vector<int>(net.deployment().small_points.size(), 0)};
    for (const User& u : roster)
        if (u.downloading && u.bs >= 0)
            ++counts[tier_index(u.tier)][static_cast<std::size_t>(u.bs)];
    return counts;
}

double estimate_rate_coverage(const ScenarioConfig& cfg, const Network& net, const UserRoster& roster,
                              const std::array<std::vector<int>, 2>& counts, Rng& fading_rng,
                              const EstimatorOptions& options)
{
    double sum = 0.0;
    std::size_t n = 0;
    for_each_measured(cfg, net, roster, fading_rng, options, [&](std::size_t i, double covered) {
        const User& u = roster[i];
        ++n;
        if (u.bs < 0)
            return;
        const int others = counts[tier_index(u.tier)][static_cast<std::size_t>(u.bs)] - (u.downloading ? 1 : 0);
        sum += download_probability(cfg, u.battery) / (others + 1.0) * covered;
    });
    return ratio(sum, static_cast<double>(n));
}

Estimate summarize(const std::vector<double>& values)
{
    Estimate e;
    if (values.empty())
        return e;
    double s = 0.0;
    for (const double v : values)
        s += v;
    const double n = static_cast<double>(values.size());
    e.mean = s / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values)
            ss += (v - e.mean) * (v - e.mean);
        e.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

Estimate paired_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw DomainError("paired difference needs equally many realizations");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        diff[i] = a[i] - b[i];
    return summarize(diff);
}

double default_window(const ScenarioConfig& cfg) { return 20.0 / std::sqrt(cfg.lambda_small); }

namespace {

struct RealizationOutput {
    RealizationEstimate estimate;
    std::array<std::vector<double>, 2> load_hist;
    DistanceSamples distances;
};

void add_to_hist(std::vector<double>& hist, int n)
{
    const std::size_t k = static_cast<std::size_t>(std::max(n, 0));
    if (hist.size() <= k)
        hist.resize(k + 1, 0.0);
    hist[k] += 1.0;
}

RealizationOutput run_realization(const ScenarioConfig& cfg, double p_tc, const SimOptions& options, double window,
                                  int burn_in, int index)
{
    const DerivedQuantities d = derive(cfg, p_tc);
    const std::uint64_t seed = realization_seed(options.seed, static_cast<std::uint64_t>(index));
    const Network net(sample_deployment(cfg, window, seed), options.boundary);

    RealizationOutput out;
    RealizationEstimate& est = out.estimate;
    est.index = index;
    est.seed = seed;
    est.macro_count = net.deployment().macro_points.size();
    est.small_count = net.deployment().small_points.size();

    Rng init = make_stream(seed, 0, Stream::roster);
    // Batteries start empty.
    UserRoster roster(poisson_count(cfg.lambda_user * window * window, init));
    est.users = roster.size();

    const double band2 = d.r_c * std::pow(2.0, -1.0 / cfg.beta);
    const double band3 = d.r_c * std::pow(3.0, -1.0 / cfg.beta);
    const double tau = sir_threshold(cfg);

    double rate_sum = 0.0;
    double measured_slots = 0.0;
    std::array<double, 2> high{}, low{};
    std::array<double, 4> occupancy{}, bands{};
    double users_seen = 0.0, eligible = 0.0, on_rim = 0.0;
    std::array<double, 2> cov_high{}, cov_high_n{}, cov_low{}, cov_low_n{};
    std::array<double, 2> load_sum{}, load_n{};
    std::vector<std::uint8_t> covered;

    for (int slot = 0; slot < options.slots; ++slot) {
        const auto s = static_cast<std::uint64_t>(slot);
        Rng pos_rng = make_stream(seed, s, Stream::positions);
        Rng dl_rng = make_stream(seed, s, Stream::downloads);
        Rng fade_rng = make_stream(seed, s, Stream::fading);

        draw_positions(roster, net, pos_rng);
        mobility_step(cfg, net, roster, p_tc);
        associate_all(cfg, net, roster, p_tc, options.bias);
        draw_downloads(cfg, roster, dl_rng);
        const auto counts = census(net, roster);
        const bool measuring = slot >= burn_in;

        if (options.consume_on_success) {
            covered.assign(roster.size(), 0);
            for (std::size_t i = 0; i < roster.size(); ++i)
                if (roster[i].downloading)
                    covered[i] = compute_sir(cfg, net, roster[i], options.estimator.fading ? &fade_rng : nullptr) > tau;
        }

        if (measuring) {
            measured_slots += 1.0;
            double slot_sum = 0.0, slot_n = 0.0;
            for_each_measured(cfg, net, roster, fade_rng, options.estimator, [&](std::size_t i, double c) {
                const User& u = roster[i];
                slot_n += 1.0;
                if (u.bs < 0)
                    return;
                const int k = tier_index(u.tier);
                const int others = counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(u.bs)] - (u.downloading ? 1 : 0);
                slot_sum += download_probability(cfg, u.battery) / (others + 1.0) * c;
                if (attraction_eligible(u)) {
                    cov_low[static_cast<std::size_t>(k)] += c;
                    cov_low_n[static_cast<std::size_t>(k)] += 1.0;
                } else {
                    cov_high[static_cast<std::size_t>(k)] += c;
                    cov_high_n[static_cast<std::size_t>(k)] += 1.0;
                }
            });
            rate_sum += ratio(slot_sum, slot_n);

            std::array<int, 2> sampled{};
            for (const User& u : roster) {
                users_seen += 1.0;
                occupancy[u.battery] += 1.0;
                const double r = u.small_distance_initial;
                if (r <= d.r_c)
                    bands[3] += 1.0;
                if (r <= band3)
                    bands[2] += 1.0;
                else if (r <= band2)
                    bands[1] += 1.0;
                else if (r <= d.r_s)
                    bands[0] += 1.0;
                if (u.bs < 0)
                    continue;
                const std::size_t k = static_cast<std::size_t>(tier_index(u.tier));
                const std::size_t cls = attraction_eligible(u) ? 1 : 0;
                if (sampled[cls] < options.distance_samples_per_slot) {
                    ++sampled[cls];
                    auto& bucket = cls ? out.distances.low : out.distances.high;
                    bucket[k].push_back(u.serving_distance);
                }
                if (attraction_eligible(u)) {
                    low[k] += 1.0;
                    eligible += 1.0;
                    if (u.small_bs >= 0 && u.small_distance <= d.r_c)
                        on_rim += 1.0;
                } else {
                    high[k] += 1.0;
                }
                const int others = counts[k][static_cast<std::size_t>(u.bs)] - (u.downloading ? 1 : 0);
                add_to_hist(out.load_hist[k], others);
                load_sum[k] += others;
                load_n[k] += 1.0;
            }
        }

        battery_step(cfg, roster, p_tc, options.consume_on_success ? &covered : nullptr);
    }

    est.rate_coverage = ratio(rate_sum, measured_slots);
    for (std::size_t k = 0; k < 2; ++k) {
        est.a_high[k] = ratio(high[k], high[0] + high[1]);
        est.a_low[k] = ratio(low[k], low[0] + low[1]);
        est.coverage_high[k] = ratio(cov_high[k], cov_high_n[k]);
        est.coverage_low[k] = ratio(cov_low[k], cov_low_n[k]);
        est.mean_load[k] = ratio(load_sum[k], load_n[k]);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        est.occupancy[i] = ratio(occupancy[i], users_seen);
        est.bands[i] = ratio(bands[i], users_seen);
    }
    est.rim_fraction = ratio(on_rim, eligible);
    return out;
}

template <std::size_t N>
std::array<Estimate, N> summarize_field(const std::vector<RealizationEstimate>& rows,
                                        std::array<double, N> RealizationEstimate::*field)
{
    std::array<Estimate, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<double> v;
        for (const auto& r : rows)
            v.push_back((r.*field)[i]);
        out[i] = summarize(v);
    }
    return out;
}

} // namespace

MonteCarloReport run_experiment(const ScenarioConfig& cfg_in, double p_tc, const SimOptions& options)
{
    std::vector<std::string> problems;
    if (options.realizations < 1)
        problems.emplace_back("realizations must be >= 1");
    if (options.slots < 1)
        problems.emplace_back("slots must be >= 1");
    if (options.burn_in >= options.slots)
        problems.emplace_back("burn_in must be < slots");
    if (options.window < 0.0)
        problems.emplace_back("window must be positive");
    if (!(options.bias > 0.0))
        problems.emplace_back("bias must be positive");
    if (!problems.empty())
        throw ValidationError(std::move(problems));
    const ScenarioConfig cfg = validate(cfg_in);
    derive(cfg, p_tc);

    MonteCarloReport report;
    report.window = options.window > 0.0 ? options.window : default_window(cfg);
    report.realizations = options.realizations;
    report.slots = options.slots;
    report.burn_in = options.burn_in >= 0 ? options.burn_in : options.slots / 5;
    const double area = report.window * report.window;
    for (const Tier t : {Tier::macro, Tier::small})
        if (cfg.lambda(t) * area < 50.0)
            report.warnings.push_back("expected tier-" + std::to_string(tier_index(t) + 1) + " BS count " +
                                      std::to_string(cfg.lambda(t) * area) + " is below 50");

    std::array<std::vector<double>, 2> pooled;
    for (int r = 0; r < options.realizations; ++r) {
        RealizationOutput o = run_realization(cfg, p_tc, options, report.window, report.burn_in, r);
        report.per_realization.push_back(o.estimate);
        for (std::size_t k = 0; k < 2; ++k) {
            if (pooled[k].size() < o.load_hist[k].size())
                pooled[k].resize(o.load_hist[k].size(), 0.0);
            for (std::size_t n = 0; n < o.load_hist[k].size(); ++n)
                pooled[k][n] += o.load_hist[k][n];
            auto append = [](std::vector<double>& dst, const std::vector<double>& src) {
                dst.insert(dst.end(), src.begin(), src.end());
            };
            append(report.distances.high[k], o.distances.high[k]);
            append(report.distances.low[k], o.distances.low[k]);
        }
    }

    const auto& rows = report.per_realization;
    std::vector<double> rc, rim;
    for (const auto& r : rows) {
        rc.push_back(r.rate_coverage);
        rim.push_back(r.rim_fraction);
    }
    report.rate_coverage = summarize(rc);
    report.rim_fraction = summarize(rim);
    report.a_high = summarize_field(rows, &RealizationEstimate::a_high);
    report.a_low = summarize_field(rows, &RealizationEstimate::a_low);
    report.steady_state = summarize_field(rows, &RealizationEstimate::occupancy);
    report.bands = summarize_field(rows, &RealizationEstimate::bands);
    report.coverage_high = summarize_field(rows, &RealizationEstimate::coverage_high);
    report.coverage_low = summarize_field(rows, &RealizationEstimate::coverage_low);
    report.mean_load = summarize_field(rows, &RealizationEstimate::mean_load);
    for (std::size_t k = 0; k < 2; ++k) {
        double total = 0.0;
        for (const double c : pooled[k])
            total += c;
        report.load_pmf[k] = pooled[k];
        for (double& p : report.load_pmf[k])
            p = ratio(p, total);
    }

    if (!options.cre_biases.empty())
        report.cre_baseline = run_cre_baseline(cfg, p_tc, options, options.cre_biases);
    return report;
}

std::vector<CrePoint> run_cre_baseline(const ScenarioConfig& cfg, double p_tc, SimOptions options,
                                       const std::vector<double>& biases)
{
    ScenarioConfig base = cfg;
    base.r_hat_a = 0.0;
    options.cre_biases.clear();
    options.distance_samples_per_slot = 0;
    std::vector<CrePoint> out;
    for (const double b : biases) {
        options.bias = b;
        const MonteCarloReport r = run_experiment(base, p_tc, options);
        CrePoint p;
        p.bias = b;
        p.rate_coverage = r.rate_coverage;
        for (const auto& row : r.per_realization)
            p.per_realization.push_back(row.rate_coverage);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace san::sim

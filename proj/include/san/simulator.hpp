#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "san/params.hpp"
#include "san/spatial_index.hpp"

namespace san::sim {

using Rng = std::mt19937_64;

/// Independent streams per (realization seed, slot, purpose).
enum class Stream : std::uint32_t { deployment = 0, roster = 1, positions = 2, downloads = 3, fading = 4 };

Rng make_stream(std::uint64_t seed, std::uint64_t slot, Stream purpose);

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of realization `index` under master seed `master`.
std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index);

struct Deployment {
    double window = 0.0;
    std::vector<Point> macro_points;
    std::vector<Point> small_points;
    std::uint64_t seed = 0;

    const std::vector<Point>& points(Tier t) const { return t == Tier::macro ? macro_points : small_points; }
};

/// Poisson counts with means lambda_k * window^2, then uniform placement.
Deployment sample_deployment(const ScenarioConfig& cfg, double window, std::uint64_t seed);

/// Deployment plus nearest-neighbour indices under a fixed metric.
class Network {
public:
    Network(Deployment deployment, Boundary boundary);

    const Deployment& deployment() const { return deployment_; }
    const Geometry& geometry() const { return geometry_; }
    SpatialIndex::Hit nearest(Tier t, Point p) const;

private:
    Deployment deployment_;
    Geometry geometry_;
    SpatialIndex macro_index_;
    SpatialIndex small_index_;
};

struct User {
    std::uint8_t battery = 0;  ///< L0..L3
    Point position;
    Point post_sa_position;
    Tier tier = Tier::macro;
    int bs = -1;
    bool downloading = false;
    int small_bs = -1;            ///< nearest tier-2 BS (unchanged by attraction)
    double small_distance_initial = 0.0;
    double small_distance = 0.0;  ///< after attraction
    double serving_distance = 0.0;
};

using UserRoster = std::vector<User>;

/// Download probability u(L).
double download_probability(const ScenarioConfig& cfg, int level);

inline bool attraction_eligible(const User& u) { return u.battery <= 1; }

void draw_positions(UserRoster& roster, const Network& net, Rng& rng);

/// Phase 2: L0/L1 users with r_c < d <= r_c + r_hat_a step onto the charging
/// rim of their nearest small cell; everyone else stays.
void mobility_step(const ScenarioConfig& cfg, const Network& net, UserRoster& roster, double p_tc);

struct Association {
    Tier tier = Tier::macro;
    int bs = -1;
    double distance = 0.0;
};

/// Requires mobility_step for this slot. Attraction-eligible users within
/// r_c + r_hat_a of a small cell (before moving) join it; the rest pick the
/// largest P_k bias_k d_k^{-alpha}, bias applying to tier 2 only.
Association associate(const ScenarioConfig& cfg, const Network& net, const User& user, double p_tc, double bias = 1.0);

void associate_all(const ScenarioConfig& cfg, const Network& net, UserRoster& roster, double p_tc, double bias = 1.0);

/// SIR at the user's post-attraction position. With fading off every link
/// gain is 1. Returns +inf without interferers.
double compute_sir(const ScenarioConfig& cfg, const Network& net, const User& user, Rng* fading_rng);

/// P(SIR > tau | geometry) under unit-mean Rayleigh fading on every link.
double coverage_given_geometry(const ScenarioConfig& cfg, const Network& net, const User& user, double tau);

void draw_downloads(const ScenarioConfig& cfg, UserRoster& roster, Rng& rng);

/// Consume one unit per download (optionally only when `covered`), then charge
/// min(floor(p_tc max(d, 1)^{-beta}), 3 - level) units from the serving small
/// cell when d <= r_c.
void battery_step(const ScenarioConfig& cfg, UserRoster& roster, double p_tc,
                  const std::vector<std::uint8_t>* covered = nullptr);

/// Units gained at distance d from the serving small cell before the capacity clip.
int charge_units(const ScenarioConfig& cfg, double p_tc, double d);

/// Downloading users per BS, index [tier][bs].
std::array<std::vector<int>, 2> census(const Network& net, const UserRoster& roster);

enum class CoverageMode { sampled, conditional };

struct EstimatorOptions {
    CoverageMode coverage = CoverageMode::sampled;
    bool fading = true;
    int measured_users = -1;  ///< -1: every user in the measurement region
    double measure_fraction = 1.0;
};

/// Mean over measured users of u(L) / (N_{-i} + 1) 1{SIR > tau}.
double estimate_rate_coverage(const ScenarioConfig& cfg, const Network& net, const UserRoster& roster,
                              const std::array<std::vector<int>, 2>& counts, Rng& fading_rng,
                              const EstimatorOptions& options = {});

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

Estimate summarize(const std::vector<double>& values);
Estimate paired_difference(const std::vector<double>& a, const std::vector<double>& b);

struct RealizationEstimate {
    int index = 0;
    std::uint64_t seed = 0;
    std::size_t users = 0;
    std::size_t macro_count = 0;
    std::size_t small_count = 0;
    double rate_coverage = 0.0;
    std::array<double, 2> a_high{};
    std::array<double, 2> a_low{};
    std::array<double, 4> occupancy{};
    std::array<double, 4> bands{};     ///< c_l(1), c_l(2), c_l(3), c_h frequencies
    double rim_fraction = 0.0;         ///< eligible users within r_c after attraction
    std::array<double, 2> coverage_high{};
    std::array<double, 2> coverage_low{};
    std::array<double, 2> mean_load{};  ///< mean N_{-i} seen by users of each tier
};

struct DistanceSamples {
    std::array<std::vector<double>, 2> high;  ///< by tier index
    std::array<std::vector<double>, 2> low;
};

struct SimOptions {
    int realizations = 16;
    int slots = 100;
    int burn_in = -1;  ///< -1: slots / 5
    std::uint64_t seed = 1;
    double window = 0.0;  ///< 0: 20 / sqrt(lambda_small)
    Boundary boundary = Boundary::torus;
    EstimatorOptions estimator{};
    double bias = 1.0;
    bool consume_on_success = false;
    int distance_samples_per_slot = 0;  ///< per battery class, first users in roster order
    std::vector<double> cre_biases;  ///< empty: no baseline runs
};

struct CrePoint {
    double bias = 1.0;
    Estimate rate_coverage;
    std::vector<double> per_realization;
};

struct MonteCarloReport {
    Estimate rate_coverage;
    std::array<Estimate, 2> a_high{};
    std::array<Estimate, 2> a_low{};
    std::array<Estimate, 4> steady_state{};
    std::array<Estimate, 4> bands{};
    Estimate rim_fraction;
    std::array<Estimate, 2> coverage_high{};
    std::array<Estimate, 2> coverage_low{};
    std::array<Estimate, 2> mean_load{};
    std::array<std::vector<double>, 2> load_pmf;  ///< pooled, normalized, by tier index
    DistanceSamples distances;
    std::vector<CrePoint> cre_baseline;
    std::vector<RealizationEstimate> per_realization;
    int realizations = 0;
    int slots = 0;
    int burn_in = 0;
    double window = 0.0;
    std::vector<std::string> warnings;
};

double default_window(const ScenarioConfig& cfg);

/// Throws ValidationError for realizations < 1 or slots < 1.
MonteCarloReport run_experiment(const ScenarioConfig& cfg, double p_tc, const SimOptions& options);

/// Same seeds, r_hat_a = 0, one run per bias.
std::vector<CrePoint> run_cre_baseline(const ScenarioConfig& cfg, double p_tc, SimOptions options,
                                       const std::vector<double>& biases);

} // namespace san::sim

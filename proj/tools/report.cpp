#include "report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace san::cli {

namespace {

json number(double v)
{
    if (std::isnan(v))
        return nullptr;
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

template <std::size_t N>
json array(const std::array<double, N>& values)
{
    json out = json::array();
    for (const double v : values)
        out.push_back(number(v));
    return out;
}

template <std::size_t N>
json estimates(const std::array<sim::Estimate, N>& values)
{
    json out = json::array();
    for (const auto& e : values)
        out.push_back(to_json(e));
    return out;
}

json histogram(const std::vector<double>& samples)
{
    json out;
    out["count"] = samples.size();
    if (samples.empty()) {
        out["edges"] = json::array();
        out["counts"] = json::array();
        return out;
    }
    constexpr int bins = 40;
    const double top = *std::max_element(samples.begin(), samples.end());
    const double width = top > 0.0 ? top / bins : 1.0;
    std::vector<std::size_t> counts(bins, 0);
    for (const double s : samples)
        ++counts[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(s / width)))];
    json edges = json::array();
    for (int i = 0; i <= bins; ++i)
        edges.push_back(i * width);
    out["edges"] = edges;
    out["counts"] = counts;
    return out;
}

} // namespace

std::string format_number(double v)
{
    if (std::isnan(v))
        return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json to_json(const ScenarioConfig& cfg)
{
    return {
        {"lambda_macro_per_m2", cfg.lambda_macro},
        {"lambda_small_per_m2", cfg.lambda_small},
        {"lambda_user_per_m2", cfg.lambda_user},
        {"p_macro_w", cfg.p_macro},
        {"p_small_w", cfg.p_small},
        {"alpha", cfg.alpha},
        {"beta", cfg.beta},
        {"bandwidth_hz", cfg.bandwidth},
        {"rate_threshold_bps", cfg.rate_threshold},
        {"u_low", cfg.u_low},
        {"u_high", cfg.u_high},
        {"r_hat_a_m", cfg.r_hat_a},
        {"g_main_linear", cfg.g_main},
        {"beam_width_rad", cfg.beam_width},
        {"eta_safety_w_per_m2", cfg.eta_safety},
        {"unit_energy_w", cfg.unit_energy},
        {"battery_capacity_units", cfg.battery_capacity_units},
        {"fold_gain_into_rc", cfg.fold_gain_into_rc},
    };
}

json to_json(const sim::Estimate& e) { return {{"mean", number(e.mean)}, {"se", number(e.se)}}; }

json to_json(const optimizer::OptimizationResult& r, bool with_trace)
{
    json out = {
        {"method", optimizer::to_string(r.method)},
        {"p_tc_star", number(r.p_tc_star)},
        {"objective_at_star", number(r.objective_at_star)},
        {"caps",
         {{"cap_safety", number(r.caps.cap_safety)},
          {"cap_voronoi", number(r.caps.cap_voronoi)},
          {"binding", optimizer::to_string(r.caps.binding)}}},
    };
    if (r.method != optimizer::Method::grid_search)
        out["unclipped"] = number(r.unclipped);
    else
        out["flat"] = r.flat;
    if (with_trace) {
        json trace = json::array();
        for (const auto& s : r.search_trace)
            trace.push_back({{"round", s.round}, {"p_tc", s.x}, {"objective", number(s.value)}});
        out["search_trace"] = trace;
    }
    return out;
}

json analytic_report(const ScenarioConfig& cfg, double p_tc, const analytic::ModelOptions& options)
{
    const analytic::RateCoverageBreakdown b = analytic::rate_coverage(cfg, p_tc, options);
    const analytic::Evaluation ev(cfg, p_tc, options);
    const DerivedQuantities d = derive(cfg, p_tc);

    json tiers = json::array();
    for (const Tier t : {Tier::macro, Tier::small}) {
        const int k = tier_index(t);
        const auto& c = b.tiers[static_cast<std::size_t>(k)];
        const auto& low = b.r_low[static_cast<std::size_t>(k)];
        tiers.push_back({
            {"tier", k + 1},
            {"contribution", number(c.contribution)},
            {"association_weighted", number(c.association_weighted)},
            {"load_share", number(c.load_share)},
            {"mean_load_pmf", number(c.mean_load)},
            {"mean_load", number(optimizer::mean_load(ev, t))},
            {"r_high", number(b.r_high)},
            {"r_low", number(low.value)},
            {"r_low_raw", number(low.raw)},
            {"r_low_terms", low.terms},
            {"r_low_out_of_range", low.out_of_range},
        });
    }

    json transition = json::array();
    for (const auto& row : b.chain.transition)
        transition.push_back(row);

    const optimizer::Caps caps = optimizer::caps(cfg);
    return {
        {"p_tc", p_tc},
        {"config", to_json(cfg)},
        {"derived",
         {{"r_c_m", d.r_c},
          {"r_s_m", d.r_s},
          {"sir_threshold", d.sir_threshold},
          {"m_distance_m", b.association.m_distance},
          {"lambda_tilde", b.association.lambda_tilde},
          {"rho_m", b.rho_m}}},
        {"rate_coverage", number(b.r_total)},
        {"mean_load_objective", number(optimizer::mean_load_objective(ev))},
        {"tiers", tiers},
        {"assoc_probs", {{"high", array(b.association.a_high)}, {"low", array(b.association.a_low)}}},
        {"charge_probs", {{"c_low", array(b.chain.charge.c_low)}, {"c_high", number(b.chain.charge.c_high)}}},
        {"transition", transition},
        {"steady_state", array(b.chain.steady)},
        {"p_high", number(b.chain.p_high)},
        {"p_low", number(b.chain.p_low)},
        {"caps", {{"cap_safety", number(caps.cap_safety)}, {"cap_voronoi", number(caps.cap_voronoi)}}},
        {"reading", options.reading == analytic::Eq5Reading::consistent ? "consistent" : "printed"},
        {"load_sum_start", options.load_sum_start},
        {"warnings", b.warnings},
    };
}

json simulation_report(const sim::MonteCarloReport& r)
{
    json cre = json::array();
    for (const auto& p : r.cre_baseline)
        cre.push_back({{"bias", p.bias}, {"rate_coverage", to_json(p.rate_coverage)}});
    return {
        {"rate_coverage", to_json(r.rate_coverage)},
        {"assoc_probs", {{"high", estimates(r.a_high)}, {"low", estimates(r.a_low)}}},
        {"steady_state", estimates(r.steady_state)},
        {"band_frequencies", estimates(r.bands)},
        {"rim_fraction", to_json(r.rim_fraction)},
        {"coverage", {{"high", estimates(r.coverage_high)}, {"low", estimates(r.coverage_low)}}},
        {"mean_load", estimates(r.mean_load)},
        {"load_pmf", {{"macro", r.load_pmf[0]}, {"small", r.load_pmf[1]}}},
        {"distance_histograms",
         {{"high", {{"macro", histogram(r.distances.high[0])}, {"small", histogram(r.distances.high[1])}}},
          {"low", {{"macro", histogram(r.distances.low[0])}, {"small", histogram(r.distances.low[1])}}}}},
        {"cre_baseline", cre},
        {"realizations", r.realizations},
        {"slots", r.slots},
        {"burn_in", r.burn_in},
        {"window_m", r.window},
        {"warnings", r.warnings},
    };
}

std::string config_hash(const ScenarioConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : to_json(cfg).dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const ScenarioConfig& cfg, std::uint64_t seed) : out_(out)
{
    out_ << "# config-hash=" << config_hash(cfg) << ", seed=" << seed << ", version=" << version << "\r\n";
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out_ << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            out_ << f;
            continue;
        }
        out_ << '"';
        for (const char c : f) {
            if (c == '"')
                out_ << '"';
            out_ << c;
        }
        out_ << '"';
    }
    out_ << "\r\n";
}

} // namespace san::cli

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "report.hpp"
#include "san/config_file.hpp"

namespace san::cli {

namespace {

struct Overrides {
    std::optional<double> lambda_macro_per_km2, lambda_small_per_km2, lambda_user_per_km2;
    std::optional<double> p_macro_dbm, p_small_dbm, alpha, beta, bandwidth_mhz, theta_mbps;
    std::optional<double> u_low, u_high, r_hat_a_m, g_main_dbi, beam_width_rad, eta, unit_energy_w, eta_over_pu;
    bool fold_gain_into_rc = false;
};

struct Common {
    std::string config_path;
    std::string preset;
    std::string out;
    std::uint64_t seed = 1;
    bool json_output = false;
    std::string reading = "consistent";
    int load_sum_start = 0;
    Overrides o;
};

struct SimFlags {
    int realizations = 16;
    int slots = 100;
    int burn_in = -1;
    double window = 0.0;
    std::string boundary = "torus";
    int measured_users = 2000;
    std::string coverage = "sampled";
    bool no_fading = false;
    double bias = 1.0;
    bool consume_on_success = false;
    std::vector<double> cre_biases;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config_path, "Config file (key = value [unit] per line)");
    app->add_option("--preset", c.preset, "Named parameter set: fig3a, fig3b, fig4");
    app->add_option("--out", c.out, "Output path (stdout when omitted)");
    app->add_option("--seed", c.seed, "Master seed");
    app->add_flag("--json", c.json_output, "Emit JSON instead of CSV/Markdown");
    app->add_option("--reading", c.reading, "Low-battery coverage reading: consistent or printed")
        ->check(CLI::IsMember({"consistent", "printed"}));
    app->add_option("--load-sum-start", c.load_sum_start, "First n of the load sum (0 or 1)")
        ->check(CLI::IsMember({0, 1}));

    auto& o = c.o;
    app->add_option("--lambda-macro-per-km2", o.lambda_macro_per_km2, "Macro BS density");
    app->add_option("--lambda-small-per-km2", o.lambda_small_per_km2, "Small-cell BS density");
    app->add_option("--lambda-user-per-km2", o.lambda_user_per_km2, "User density");
    app->add_option("--p-macro-dbm", o.p_macro_dbm, "Macro transmit power");
    app->add_option("--p-small-dbm", o.p_small_dbm, "Small-cell transmit power");
    app->add_option("--alpha", o.alpha, "Information path-loss exponent");
    app->add_option("--beta", o.beta, "Charging path-loss exponent");
    app->add_option("--bandwidth-mhz", o.bandwidth_mhz, "Bandwidth");
    app->add_option("--theta", o.theta_mbps, "Rate threshold in Mbps");
    app->add_option("--u-low", o.u_low, "Download probability at L1");
    app->add_option("--u-high", o.u_high, "Download probability at L2, L3");
    app->add_option("--r-hat-a-m", o.r_hat_a_m, "Maximum attraction distance in meters");
    app->add_option("--g-main-dbi", o.g_main_dbi, "Charging main-lobe gain");
    app->add_option("--beam-width-rad", o.beam_width_rad, "Charging beam width");
    app->add_option("--eta", o.eta, "Maximum safe power density in W/m^2");
    app->add_option("--unit-energy-w", o.unit_energy_w, "Energy per reception P_u in W");
    app->add_option("--eta-over-pu", o.eta_over_pu, "Safety ratio eta / P_u (sets P_u from eta)");
    app->add_flag("--fold-gain-into-rc", o.fold_gain_into_rc, "Use r_c = (G_m p_tc)^(1/beta)");
}

void add_sim(CLI::App* app, SimFlags& s)
{
    app->add_option("--realizations", s.realizations, "Independent deployments");
    app->add_option("--slots", s.slots, "Slots per realization");
    app->add_option("--burn-in", s.burn_in, "Discarded slots (default slots/5)");
    app->add_option("--window", s.window, "Window side in meters (default 20/sqrt(lambda_small))");
    app->add_option("--boundary", s.boundary, "torus or plain")->check(CLI::IsMember({"torus", "plain"}));
    app->add_option("--measured-users", s.measured_users, "SIR evaluations per slot (-1: all)");
    app->add_option("--coverage", s.coverage, "sampled or conditional")
        ->check(CLI::IsMember({"sampled", "conditional"}));
    app->add_flag("--no-fading", s.no_fading, "Force every fading gain to 1");
    app->add_option("--bias", s.bias, "Tier-2 association bias");
    app->add_flag("--consume-on-success", s.consume_on_success, "Spend battery only on decoded downloads");
    app->add_option("--cre-biases", s.cre_biases, "Biases of the range-expansion baseline")->delimiter(',');
}

ScenarioConfig build_config(const Common& c)
{
    ScenarioConfig cfg = c.preset.empty() ? ScenarioConfig{} : preset(c.preset);
    if (!c.config_path.empty())
        cfg = load_config_file(c.config_path, cfg);
    const auto& o = c.o;
    if (o.lambda_macro_per_km2)
        cfg.lambda_macro = per_km2_to_per_m2(*o.lambda_macro_per_km2);
    if (o.lambda_small_per_km2)
        cfg.lambda_small = per_km2_to_per_m2(*o.lambda_small_per_km2);
    if (o.lambda_user_per_km2)
        cfg.lambda_user = per_km2_to_per_m2(*o.lambda_user_per_km2);
    if (o.p_macro_dbm)
        cfg.p_macro = dbm_to_watts(*o.p_macro_dbm);
    if (o.p_small_dbm)
        cfg.p_small = dbm_to_watts(*o.p_small_dbm);
    if (o.alpha)
        cfg.alpha = *o.alpha;
    if (o.beta)
        cfg.beta = *o.beta;
    if (o.bandwidth_mhz)
        cfg.bandwidth = *o.bandwidth_mhz * 1e6;
    if (o.theta_mbps)
        cfg.rate_threshold = *o.theta_mbps * 1e6;
    if (o.u_low)
        cfg.u_low = *o.u_low;
    if (o.u_high)
        cfg.u_high = *o.u_high;
    if (o.r_hat_a_m)
        cfg.r_hat_a = *o.r_hat_a_m;
    if (o.g_main_dbi)
        cfg.g_main = dbi_to_linear(*o.g_main_dbi);
    if (o.beam_width_rad)
        cfg.beam_width = *o.beam_width_rad;
    if (o.eta)
        cfg.eta_safety = *o.eta;
    if (o.unit_energy_w)
        cfg.unit_energy = *o.unit_energy_w;
    if (o.eta_over_pu) {
        if (!(*o.eta_over_pu > 0.0))
            throw ValidationError({"eta-over-pu must be positive"});
        cfg.unit_energy = cfg.eta_safety / *o.eta_over_pu;
    }
    if (o.fold_gain_into_rc)
        cfg.fold_gain_into_rc = true;
    return validate(cfg);
}

analytic::ModelOptions model_options(const Common& c)
{
    analytic::ModelOptions m;
    m.reading = c.reading == "printed" ? analytic::Eq5Reading::printed : analytic::Eq5Reading::consistent;
    m.load_sum_start = c.load_sum_start;
    return m;
}

sim::SimOptions sim_options(const Common& c, const SimFlags& s)
{
    sim::SimOptions o;
    o.realizations = s.realizations;
    o.slots = s.slots;
    o.burn_in = s.burn_in;
    o.seed = c.seed;
    o.window = s.window;
    o.boundary = s.boundary == "plain" ? sim::Boundary::plain : sim::Boundary::torus;
    o.estimator.measured_users = s.measured_users;
    o.estimator.coverage = s.coverage == "conditional" ? sim::CoverageMode::conditional : sim::CoverageMode::sampled;
    o.estimator.fading = !s.no_fading;
    if (o.boundary == sim::Boundary::plain)
        o.estimator.measure_fraction = 1.0 / 3.0;
    o.bias = s.bias;
    o.consume_on_success = s.consume_on_success;
    o.cre_biases = s.cre_biases;
    return o;
}

// Writes to --out when given, otherwise to the command's stdout.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback)
    {
        if (path.empty()) {
            stream_ = &fallback;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_)
            throw ValidationError({"cannot open output file '" + path + "'"});
        stream_ = file_.get();
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

std::vector<std::string> fields(std::initializer_list<double> values)
{
    std::vector<std::string> out;
    for (const double v : values)
        out.push_back(format_number(v));
    return out;
}

// ---- analytic ------------------------------------------------------------

int cmd_analytic(const Common& c, double p_tc, std::ostream& out)
{
    const ScenarioConfig cfg = build_config(c);
    Sink sink(c.out, out);
    *sink << analytic_report(cfg, p_tc, model_options(c)).dump(2) << '\n';
    return ok;
}

// ---- simulate ------------------------------------------------------------

void write_realization_csv(std::ostream& os, const ScenarioConfig& cfg, std::uint64_t seed,
                           const sim::MonteCarloReport& r)
{
    CsvWriter csv(os, cfg, seed);
    csv.row({"realization", "seed", "users", "macro_bs", "small_bs", "rate_coverage", "a1_high", "a2_high", "a1_low",
             "a2_low", "q0", "q1", "q2", "q3", "band_c1", "band_c2", "band_c3", "band_ch", "rim_fraction",
             "mean_load_1", "mean_load_2"});
    for (const auto& e : r.per_realization) {
        std::vector<std::string> row = {std::to_string(e.index), std::to_string(e.seed), std::to_string(e.users),
                                        std::to_string(e.macro_count), std::to_string(e.small_count)};
        const auto rest = fields({e.rate_coverage, e.a_high[0], e.a_high[1], e.a_low[0], e.a_low[1], e.occupancy[0],
                                  e.occupancy[1], e.occupancy[2], e.occupancy[3], e.bands[0], e.bands[1], e.bands[2],
                                  e.bands[3], e.rim_fraction, e.mean_load[0], e.mean_load[1]});
        row.insert(row.end(), rest.begin(), rest.end());
        csv.row(row);
    }
}

int cmd_simulate(const Common& c, const SimFlags& s, double p_tc, const std::string& csv_path, std::ostream& out)
{
    const ScenarioConfig cfg = build_config(c);
    const sim::SimOptions opts = sim_options(c, s);
    const sim::MonteCarloReport report = sim::run_experiment(cfg, p_tc, opts);

    json j = simulation_report(report);
    j["p_tc"] = p_tc;
    j["seed"] = c.seed;
    j["config"] = to_json(cfg);
    if (!csv_path.empty()) {
        Sink csv(csv_path, out);
        write_realization_csv(*csv, cfg, c.seed, report);
    }
    Sink sink(c.out, out);
    if (!c.json_output && c.out.empty() && csv_path.empty()) {
        write_realization_csv(*sink, cfg, c.seed, report);
        return ok;
    }
    *sink << j.dump(2) << '\n';
    return ok;
}

// ---- optimize ------------------------------------------------------------

json error_json(const std::string& type, const std::string& message)
{
    return {{"error", {{"type", type}, {"message", message}}}};
}

int cmd_optimize(const Common& c, const std::string& mode, const optimizer::OptimizerOptions& base, bool trace,
                 std::ostream& out)
{
    const ScenarioConfig cfg = build_config(c);
    optimizer::OptimizerOptions opts = base;
    opts.model = model_options(c);

    json j;
    j["config"] = to_json(cfg);
    int code = ok;
    std::optional<double> grid_value, closed_value;

    auto attempt = [&](const char* key, auto&& fn, std::optional<double>& value) {
        try {
            const optimizer::OptimizationResult r = fn();
            j[key] = to_json(r, trace);
            value = r.objective_at_star;
        } catch (const EmptyFeasible& e) {
            j[key] = error_json("EmptyFeasible", e.what());
            code = infeasible;
        } catch (const NegativeBase& e) {
            j[key] = error_json("NegativeBase", e.what());
            code = infeasible;
        }
    };
    if (mode == "grid" || mode == "both")
        attempt("grid", [&] { return optimizer::optimal_power(cfg, opts); }, grid_value);
    if (mode == "closed-form" || mode == "both")
        attempt("closed_form", [&] { return optimizer::closed_form_optimal(cfg, opts); }, closed_value);
    if (grid_value && closed_value && *grid_value > 0.0)
        j["relative_gap"] = (*grid_value - *closed_value) / *grid_value;

    Sink sink(c.out, out);
    *sink << j.dump(2) << '\n';
    return code;
}

// ---- sweep ---------------------------------------------------------------

struct SweepFlags {
    std::string variable = "p_tc";
    std::vector<double> values;
    std::optional<double> lo, hi;
    int count = 16;
    std::string scale = "log";
    std::string engine = "analytic";
    double p_tc = 32.0;
};

std::vector<double> sweep_values(const SweepFlags& f)
{
    std::vector<double> v = f.values;
    if (v.empty()) {
        if (!f.lo || !f.hi)
            throw ValidationError({"sweep needs --values or --lo/--hi"});
        if (f.count < 2)
            throw ValidationError({"--count must be >= 2"});
        if (f.scale == "log" && !(*f.lo > 0.0))
            throw ValidationError({"log-scaled sweep needs --lo > 0"});
        for (int i = 0; i < f.count; ++i) {
            const double t = static_cast<double>(i) / (f.count - 1);
            v.push_back(f.scale == "log" ? std::exp(std::log(*f.lo) + t * (std::log(*f.hi) - std::log(*f.lo)))
                                         : *f.lo + t * (*f.hi - *f.lo));
        }
        v.front() = *f.lo;
        v.back() = *f.hi;
    }
    if (v.empty())
        throw ValidationError({"sweep values are empty"});
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            throw ValidationError({"sweep values must be strictly increasing"});
    return v;
}

ScenarioConfig with_variable(ScenarioConfig cfg, const std::string& variable, double value)
{
    if (variable == "r_hat_a")
        cfg.r_hat_a = value;
    else if (variable == "lambda_small")
        cfg.lambda_small = per_km2_to_per_m2(value);
    else if (variable == "u_ratio") {
        if (!(value > 0.0))
            throw ValidationError({"u_ratio must be positive"});
        cfg.u_low = cfg.u_high / value;
    }
    return validate(cfg);
}

int cmd_sweep(const Common& c, const SimFlags& s, const SweepFlags& f, std::ostream& out)
{
    const ScenarioConfig base = build_config(c);
    const std::vector<double> values = sweep_values(f);
    const analytic::ModelOptions model = model_options(c);
    optimizer::OptimizerOptions opt;
    opt.model = model;
    const sim::SimOptions sim_opts = sim_options(c, s);
    const bool analytic_engine = f.engine == "analytic" || f.engine == "both";
    const bool sim_engine = f.engine == "simulate" || f.engine == "both";
    const bool power_sweep = f.variable == "p_tc";
    const bool with_baseline = f.variable == "u_ratio" || f.variable == "r_hat_a";

    json rows = json::array();
    std::ostringstream buffer;
    CsvWriter csv(buffer, base, c.seed);
    csv.row({"variable", "value", "engine", "rate_coverage", "se", "p_tc_star", "binding_cap",
             "baseline_rate_coverage", "gain", "gain_se"});

    for (const double value : values) {
        const ScenarioConfig cfg = power_sweep ? base : with_variable(base, f.variable, value);
        double p = power_sweep ? value : f.p_tc;
        std::string binding;
        double p_base = p;
        ScenarioConfig baseline_cfg = cfg;
        baseline_cfg.r_hat_a = 0.0;
        if (!power_sweep) {
            const optimizer::OptimizationResult r = optimizer::optimal_power(cfg, opt);
            p = r.p_tc_star;
            binding = optimizer::to_string(r.caps.binding);
            if (with_baseline)
                p_base = optimizer::optimal_power(baseline_cfg, opt).p_tc_star;
        }

        auto emit = [&](const char* engine, double rc, double se, double baseline, double gain, double gain_se) {
            const double nan = std::nan("");
            csv.row({f.variable, format_number(value), engine, format_number(rc), format_number(se),
                     power_sweep ? "" : format_number(p), binding, format_number(with_baseline ? baseline : nan),
                     format_number(with_baseline ? gain : nan), format_number(with_baseline ? gain_se : nan)});
            json row = {{"variable", f.variable}, {"value", value}, {"engine", engine}, {"rate_coverage", rc}};
            if (!std::isnan(se))
                row["se"] = se;
            if (!power_sweep) {
                row["p_tc_star"] = p;
                row["binding_cap"] = binding;
            }
            if (with_baseline) {
                row["baseline_rate_coverage"] = baseline;
                row["gain"] = gain;
                if (!std::isnan(gain_se))
                    row["gain_se"] = gain_se;
            }
            rows.push_back(row);
        };

        if (analytic_engine) {
            const double rc = analytic::rate_coverage(cfg, p, model).r_total;
            const double rb = with_baseline ? analytic::rate_coverage(baseline_cfg, p_base, model).r_total : 0.0;
            emit("analytic", rc, std::nan(""), rb, rc - rb, std::nan(""));
        }
        if (sim_engine) {
            const sim::MonteCarloReport r = sim::run_experiment(cfg, p, sim_opts);
            double rb = 0.0;
            sim::Estimate gain{};
            if (with_baseline) {
                const sim::MonteCarloReport b = sim::run_experiment(baseline_cfg, p_base, sim_opts);
                rb = b.rate_coverage.mean;
                std::vector<double> x, y;
                for (std::size_t i = 0; i < r.per_realization.size(); ++i) {
                    x.push_back(r.per_realization[i].rate_coverage);
                    y.push_back(b.per_realization[i].rate_coverage);
                }
                gain = sim::paired_difference(x, y);
            }
            emit("simulate", r.rate_coverage.mean, r.rate_coverage.se, rb, gain.mean, gain.se);
        }
    }

    Sink sink(c.out, out);
    if (c.json_output)
        *sink << json{{"variable", f.variable}, {"seed", c.seed}, {"rows", rows}}.dump(2) << '\n';
    else
        *sink << buffer.str();
    return ok;
}

// ---- compare -------------------------------------------------------------

struct CompareRow {
    double p_tc;
    std::string quantity;
    double analytic;
    double simulated;
    double se;
    double tolerance;
    bool relative;
    bool flag_only;

    double gap() const { return std::abs(simulated - analytic); }
    double rel_gap() const { return analytic != 0.0 ? gap() / std::abs(analytic) : std::nan(""); }
    std::string status() const
    {
        const double g = relative ? rel_gap() : gap();
        const bool within = g <= tolerance;
        if (flag_only)
            return within ? "ok" : "flagged";
        return within ? "pass" : "fail";
    }
};

int cmd_compare(const Common& c, const SimFlags& s, const std::vector<double>& grid, std::ostream& out)
{
    const ScenarioConfig cfg = build_config(c);
    const analytic::ModelOptions model = model_options(c);
    const sim::SimOptions opts = sim_options(c, s);
    if (grid.empty())
        throw ValidationError({"--p-tc-grid is empty"});

    std::vector<CompareRow> rows;
    for (const double p : grid) {
        const analytic::RateCoverageBreakdown b = analytic::rate_coverage(cfg, p, model);
        const analytic::Evaluation ev(cfg, p, model);
        const sim::MonteCarloReport r = sim::run_experiment(cfg, p, opts);
        auto add = [&](std::string name, double a, const sim::Estimate& e, double tol, bool rel = false,
                       bool flag = false) { rows.push_back({p, std::move(name), a, e.mean, e.se, tol, rel, flag}); };

        add("rate_coverage", b.r_total, r.rate_coverage, 0.02);
        for (int k = 0; k < 2; ++k) {
            const std::string t = std::to_string(k + 1);
            const auto K = static_cast<std::size_t>(k);
            add("A" + t + "_high", b.association.a_high[K], r.a_high[K], 0.01);
            add("A" + t + "_low", b.association.a_low[K], r.a_low[K], 0.01);
            add("R" + t + "_high", b.r_high, r.coverage_high[K], 0.05, false, true);
            add("R" + t + "_low", b.r_low[K].value, r.coverage_low[K], 0.05, false, true);
            add("mean_load_" + t, b.tiers[K].mean_load, r.mean_load[K], 0.10, true);
        }
        for (std::size_t i = 0; i < 4; ++i)
            add("q" + std::to_string(i), b.chain.steady[i], r.steady_state[i], 0.01);
        for (std::size_t i = 0; i < 3; ++i)
            add("c_low_" + std::to_string(i + 1), b.chain.charge.c_low[i], r.bands[i], 0.005);
        add("c_high", b.chain.charge.c_high, r.bands[3], 0.005);
    }

    std::ostringstream csv_text;
    CsvWriter csv(csv_text, cfg, c.seed);
    csv.row({"p_tc", "quantity", "analytic", "simulated", "se", "abs_gap", "rel_gap", "tolerance", "tolerance_kind",
             "status"});
    std::ostringstream md;
    md << "# Analytic vs simulation\n\n"
       << "config-hash " << config_hash(cfg) << ", seed " << c.seed << ", " << opts.realizations << " realizations x "
       << opts.slots << " slots\n";
    double last_p = std::nan("");
    for (const auto& row : rows) {
        csv.row({format_number(row.p_tc), row.quantity, format_number(row.analytic), format_number(row.simulated),
                 format_number(row.se), format_number(row.gap()), format_number(row.rel_gap()),
                 format_number(row.tolerance), row.relative ? "relative" : "absolute", row.status()});
        if (row.p_tc != last_p) {
            md << "\n## p_tc = " << format_number(row.p_tc) << "\n\n"
               << "| quantity | analytic | simulated | se | gap | tolerance | status |\n"
               << "|---|---|---|---|---|---|---|\n";
            last_p = row.p_tc;
        }
        md << std::setprecision(6) << "| " << row.quantity << " | " << row.analytic << " | " << row.simulated << " | "
           << row.se << " | " << (row.relative ? row.rel_gap() : row.gap()) << " | " << row.tolerance
           << (row.relative ? " rel" : "") << " | " << row.status() << " |\n";
    }

    if (c.out.empty()) {
        out << (c.json_output ? csv_text.str() : md.str());
        return ok;
    }
    Sink md_sink(c.out + ".md", out);
    *md_sink << md.str();
    Sink csv_sink(c.out + ".csv", out);
    *csv_sink << csv_text.str();
    return ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Spatial-attraction HetNet rate coverage: analysis, simulation and optimization", "san"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    Common common;
    SimFlags simf;
    double p_tc = 32.0;
    std::string csv_path;

    auto* analytic_cmd = app.add_subcommand("analytic", "Evaluate the analytic rate coverage at one charging power");
    add_common(analytic_cmd, common);
    analytic_cmd->add_option("--p-tc", p_tc, "Charging power normalized by P_u");

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate at one charging power");
    add_common(simulate_cmd, common);
    add_sim(simulate_cmd, simf);
    simulate_cmd->add_option("--p-tc", p_tc, "Charging power normalized by P_u");
    simulate_cmd->add_option("--csv", csv_path, "Per-realization CSV path");

    std::string mode = "grid";
    bool trace = false;
    optimizer::OptimizerOptions opt;
    auto* optimize_cmd = app.add_subcommand("optimize", "Rate-coverage-maximizing charging power");
    add_common(optimize_cmd, common);
    optimize_cmd->add_option("--mode", mode, "grid, closed-form or both")
        ->check(CLI::IsMember({"grid", "closed-form", "both"}));
    optimize_cmd->add_flag("--trace", trace, "Include the grid search trace");
    optimize_cmd->add_option("--grid-points", opt.grid_points, "Grid points per round");
    optimize_cmd->add_option("--rounds", opt.refine_rounds, "Refinement rounds");
    optimize_cmd->add_option("--branch-threshold", opt.branch_threshold, "lambda_2/lambda_1 above which branch 1 applies");

    SweepFlags sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one variable and record rate coverage");
    add_common(sweep_cmd, common);
    add_sim(sweep_cmd, simf);
    sweep_cmd->add_option("--variable", sweep.variable, "p_tc, r_hat_a (m), lambda_small (per km^2) or u_ratio")
        ->check(CLI::IsMember({"p_tc", "r_hat_a", "lambda_small", "u_ratio"}));
    sweep_cmd->add_option("--values", sweep.values, "Explicit comma-separated values")->delimiter(',');
    sweep_cmd->add_option("--lo", sweep.lo, "Range start");
    sweep_cmd->add_option("--hi", sweep.hi, "Range end");
    sweep_cmd->add_option("--count", sweep.count, "Range points");
    sweep_cmd->add_option("--scale", sweep.scale, "linear or log")->check(CLI::IsMember({"linear", "log"}));
    sweep_cmd->add_option("--engine", sweep.engine, "analytic, simulate or both")
        ->check(CLI::IsMember({"analytic", "simulate", "both"}));
    sweep_cmd->add_option("--p-tc", sweep.p_tc, "Charging power for the simulate-only engine when not optimizing");

    std::vector<double> grid = {1.0, 32.0, 1000.0};
    auto* compare_cmd = app.add_subcommand("compare", "Analytic vs simulated quantities with tolerances");
    add_common(compare_cmd, common);
    add_sim(compare_cmd, simf);
    compare_cmd->add_option("--p-tc-grid", grid, "Comma-separated charging powers")->delimiter(',');

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*analytic_cmd)
            return cmd_analytic(common, p_tc, out);
        if (*simulate_cmd)
            return cmd_simulate(common, simf, p_tc, csv_path, out);
        if (*optimize_cmd)
            return cmd_optimize(common, mode, opt, trace, out);
        if (*sweep_cmd)
            return cmd_sweep(common, simf, sweep, out);
        if (*compare_cmd)
            return cmd_compare(common, simf, grid, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    } catch (const EmptyFeasible& e) {
        err << "error: " << e.what() << '\n';
        return infeasible;
    } catch (const NegativeBase& e) {
        err << "error: " << e.what() << '\n';
        return infeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return simulation_error;
    }
    return ok;
}

} // namespace san::cli

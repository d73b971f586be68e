#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = san::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const std::vector<std::string> tiny_sim = {"--preset", "fig3a", "--window", "300", "--realizations", "2",
                                           "--slots", "4", "--burn-in", "1", "--measured-users", "10"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail)
{
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

} // namespace

TEST_CASE("analytic report")
{
    const Outcome r = run_cli({"analytic", "--preset", "fig3a", "--p-tc", "32"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["p_tc"] == 32.0);
    CHECK(j["rate_coverage"].get<double>() > 0.0);
    CHECK(j["steady_state"].size() == 4);
    CHECK(j["transition"].size() == 4);
    CHECK(j["tiers"].size() == 2);
    CHECK(j["reading"] == "consistent");
    CHECK(j["derived"]["r_c_m"].get<double>() == doctest::Approx(2.0));

    const Outcome zero = run_cli({"analytic", "--preset", "fig3a", "--theta", "0"});
    REQUIRE(zero.code == 0);
    CHECK(json::parse(zero.out)["derived"]["rho_m"] == 0.0);
}

TEST_CASE("configuration errors exit with code 2")
{
    const Outcome missing = run_cli({"analytic", "--config", "/nonexistent/run.cfg"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/nonexistent/run.cfg") != std::string::npos);

    CHECK(run_cli(with({"simulate"}, {"--preset", "fig3a", "--slots", "0"})).code == 2);
    CHECK(run_cli({"analytic", "--alpha", "1.5"}).code == 2);
    CHECK(run_cli({"analytic", "--p-tc", "0.5"}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"analytic", "--no-such-flag"}).code == 2);
}

TEST_CASE("infeasible optimization exits with code 4")
{
    const Outcome r = run_cli({"optimize", "--preset", "fig3a", "--eta", "1e-9", "--mode", "both"});
    CHECK(r.code == 4);
    const json j = json::parse(r.out);
    CHECK(j["grid"]["error"]["type"] == "EmptyFeasible");
}

TEST_CASE("optimize reports both methods")
{
    const Outcome r = run_cli({"optimize", "--preset", "fig3b", "--mode", "both", "--grid-points", "32", "--rounds", "2"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["closed_form"]["method"] == "closed_form_branch1");
    CHECK(j["grid"]["p_tc_star"].get<double>() >= 1.0);
    CHECK(j.contains("relative_gap"));
}

TEST_CASE("simulation output is byte-identical for a fixed seed")
{
    const auto args = with({"simulate"}, tiny_sim);
    const Outcome a = run_cli(args);
    const Outcome b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("# config-hash=", 0) == 0);

    const Outcome ja = run_cli(with(args, {"--json"}));
    const Outcome jb = run_cli(with(args, {"--json"}));
    REQUIRE(ja.code == 0);
    CHECK(ja.out == jb.out);
    CHECK(json::parse(ja.out)["realizations"] == 2);

    const Outcome other = run_cli(with(args, {"--seed", "9"}));
    CHECK(other.out != a.out);
}

TEST_CASE("analytic sweep")
{
    const Outcome r =
        run_cli({"sweep", "--preset", "fig3a", "--variable", "p_tc", "--lo", "1", "--hi", "100", "--count", "5", "--json"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j["rows"].size() == 5);
    CHECK(j["rows"][0]["value"] == 1.0);
    CHECK(j["rows"][4]["value"] == 100.0);

    CHECK(run_cli({"sweep", "--preset", "fig3a", "--values", "3,2"}).code == 2);
}

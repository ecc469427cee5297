#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nikeq/cli.hpp"
#include "nikeq/report.hpp"

using namespace nikeq;
namespace fs = std::filesystem;

namespace {
struct Run {
    int status;
    std::string out, err;
};
Run cli(std::vector<std::string> args) {
    std::ostringstream o, e;
    int s = run_command(args, o, e);
    return {s, o.str(), e.str()};
}
fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("nikeq_cli_" + name);
    fs::remove_all(p);
    return p;
}
json digests(const fs::path& dir) {
    json m = read_json_file(dir / "manifest.json");
    return m.at("files");
}
}  // namespace

TEST_CASE("branch points command") {
    auto d = scratch("bp");
    auto r = cli({"--out", d.string(), "curve", "branch-points", "pollaczek"});
    CHECK(r.status == 0);
    CHECK(r.out.find("1.6650953") != std::string::npos);
    CHECK(r.out.find("0.1501416i") != std::string::npos);
    json m = read_json_file(d / "manifest.json");
    CHECK(m["command"] == "curve branch-points");
    CHECK(m["exit_status"] == 0);
    CHECK(m["files"].size() == 1);
}

TEST_CASE("exit codes and manifests on failure paths") {
    CHECK(cli({"no-such-command"}).status == 2);
    CHECK(cli({"curve", "eval"}).status == 2);

    auto d = scratch("tol");
    auto r = cli({"--out", d.string(), "equilibrium", "solve", "builtin:bessel", "--tol", "1"});
    CHECK(r.status == 2);
    json m = read_json_file(d / "manifest.json");
    CHECK(m["exit_status"] == 2);
    CHECK(m["error"].get<std::string>().find("--tol") != std::string::npos);

    d = scratch("region");
    r = cli({"--out", d.string(), "curve", "eval", "quartic_source", "--a", "0.5", "--b", "-1.9"});
    CHECK(r.status == 2);
    CHECK(fs::exists(d / "manifest.json"));

    d = scratch("missing");
    r = cli({"--out", d.string(), "compare", "zeros", "/nonexistent/a", "/nonexistent/b"});
    CHECK(r.status == 2);
    CHECK(fs::exists(d / "manifest.json"));

    // Condition (ii) is reported as failing for the Pollaczek system.
    d = scratch("assume");
    r = cli({"--out", d.string(), "assumptions", "check", "pollaczek", "--n-list", "10,50"});
    CHECK(r.status == 1);
    r = cli({"--out", d.string(), "assumptions", "check", "pollaczek", "--n-list", "10,50", "--conditions", "i,iv,v"});
    CHECK(r.status == 0);
    r = cli({"--out", d.string(), "assumptions", "check", "pollaczek", "--conditions", "vii"});
    CHECK(r.status == 2);
}

TEST_CASE("identical runs give identical files") {
    auto a = scratch("det_a"), b = scratch("det_b");
    for (auto& d : {a, b})
        REQUIRE(cli({"--out", d.string(), "equilibrium", "solve", "builtin:pollaczek", "--cells", "120"}).status == 0);
    CHECK(digests(a) == digests(b));
    for (auto& d : {a, b}) REQUIRE(cli({"--out", d.string(), "curve", "eval", "bessel", "--points", "21"}).status == 0);
    CHECK(digests(a) == digests(b));
}

TEST_CASE("mop run, compare zeros and report") {
    auto mop = scratch("mop"), eq = scratch("eq"), cmp = scratch("cmp");
    REQUIRE(cli({"--out", mop.string(), "--bits", "192", "mop", "run", "pollaczek", "--n-list", "1,2,4"}).status == 0);
    CHECK(fs::exists(mop / "mop_n4.json"));
    CHECK(fs::exists(mop / "rescaled_zeros_n2.csv"));
    json s = read_json_file(mop / "summary.json");
    CHECK(s["runs"].size() == 3);
    CHECK(s["runs"][0]["Pn"]["exact_coefficients"] == json::array({"6", "-11", "1"}));

    REQUIRE(cli({"--out", eq.string(), "equilibrium", "solve", "builtin:pollaczek:4", "--cells", "200"}).status == 0);
    auto r = cli({"--out", cmp.string(), "compare", "zeros", mop.string(), eq.string()});
    json c = read_json_file(cmp / "compare.json");
    const auto& rows = c["rows"];
    const bool trend = rows.back()["cdf_lambda1"].get<double>() < rows.front()["cdf_lambda1"].get<double>() &&
                       rows.back()["cdf_lambda2"].get<double>() < rows.front()["cdf_lambda2"].get<double>();
    CHECK(r.status == (trend ? 0 : 1));
    CHECK(trend);

    REQUIRE(cli({"report", cmp.string()}).status == 0);
    CHECK(fs::exists(cmp / "report" / "summary.md"));
    CHECK(fs::exists(cmp / "report" / "cdf_distances.svg"));
    REQUIRE(cli({"report", mop.string()}).status == 0);
    CHECK(fs::exists(mop / "report" / "nth_root_norms.svg"));
}

#include "doctest.h"

#include "fracwb/frac1d.hpp"
#include "fracwb/harness.hpp"
#include "fracwb/study.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fracwb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig config(const json& j) { return ExperimentConfig::from_json(j, "."); }

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("catalog covers every kind and survives JSON") {
    const auto& cat = experiment_catalog();
    REQUIRE(!cat.empty());
    for (const char* k : {"apply", "power", "transform", "assemble", "solve", "audit", "study"}) {
        CHECK(find_experiment(k, "").kind == k);
    }
    auto back = catalog_from_json(catalog_to_json(cat));
    REQUIRE(back.size() == cat.size());
    for (std::size_t i = 0; i < cat.size(); ++i) {
        CHECK(back[i].name == cat[i].name);
        CHECK(back[i].anchor == cat[i].anchor);
        CHECK(!cat[i].anchor.empty());
    }
    CHECK_THROWS_AS((void)find_experiment("audit", "nonexistent"), std::invalid_argument);
}

TEST_CASE("config round trip and validation") {
    auto c = config({{"kind", "power"}, {"seed", 9}, {"tol", 1e-6}, {"params", {{"alpha", 0.3}}}});
    auto d = config(c.to_json());
    CHECK(d.kind == "power");
    CHECK(d.seed == 9);
    CHECK(d.tol == 1e-6);
    CHECK(d.params == c.params);
    CHECK_THROWS_AS(config({{"kind", "bogus"}}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(config({{"kind", "apply"}, {"params", {{"input_path", "no/such/file.csv"}}}}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(config({{"kind", "audit"}, {"tol", -1.0}}).validate(), std::invalid_argument);
}

TEST_CASE("runs are deterministic in the seed") {
    auto c = config({{"kind", "power"}, {"experiment", "balakrishnan"}, {"seed", 3},
                     {"params", {{"alpha", 0.4}, {"matrix", {{"type", "random_hpd"}, {"n", 5}}}}}});
    auto a = run(c), b = run(c);
    CHECK(a.exit_code == kExitPass);
    CHECK(a.csv == b.csv);
    CHECK(a.manifest["config_hash"] == b.manifest["config_hash"]);
    c.seed = 4;
    auto d = run(c);
    CHECK(d.csv != a.csv);
    CHECK(d.manifest["config_hash"] != a.manifest["config_hash"]);
}

TEST_CASE("order zero apply reproduces the input file") {
    const fs::path dir = fs::temp_directory_path() / "fracwb_harness_apply";
    fs::create_directories(dir);
    auto g = IntervalGrid::uniform(0.0, 1.0, 32);
    auto f = GridFn::sample(g, [](double x) { return std::cos(3 * x) - x; });
    {
        std::ofstream os(dir / "in.csv");
        write_csv(os, f);
    }
    auto c = config({{"kind", "apply"},
                     {"experiment", "frac1d"},
                     {"out", (dir / "out").string()},
                     {"params", {{"op", "rl_left"}, {"alpha", 0.0}, {"input_path", (dir / "in.csv").string()}}}});
    auto r = run(c);
    CHECK(r.exit_code == kExitPass);
    CHECK(r.csv == slurp(dir / "in.csv"));
    CHECK(slurp(dir / "out" / "result.csv") == r.csv);
    auto manifest = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest["version"] == "0.1.0");
    CHECK(manifest["artifacts"].size() == 3);
    // the output directory does not enter the hash
    c.out_dir = (dir / "other").string();
    CHECK(run(c).manifest["config_hash"] == r.manifest["config_hash"]);
    fs::remove_all(dir);
}

TEST_CASE("matrix results come with a binary artifact") {
    const fs::path dir = fs::temp_directory_path() / "fracwb_harness_power";
    auto c = config({{"kind", "power"},
                     {"out", dir.string()},
                     {"params", {{"alpha", 0.5}, {"matrix", {{"type", "identity"}, {"n", 3}}}}}});
    auto r = run(c);
    CHECK(fs::exists(dir / "result.bin"));
    CHECK(fs::exists(dir / "result.bin.json"));
    fs::remove_all(dir);
}

TEST_CASE("failed audits map to exit code 2") {
    auto c = config({{"kind", "audit"},
                     {"experiment", "sector"},
                     {"params", {{"phi", {{"coeffs", {{"1", {0.0, 1.0}}}}}}, {"theta", 0.1}}}});
    auto r = run(c);
    CHECK(r.exit_code == kExitAudit);
    CHECK(r.report["pass"] == false);
    CHECK_THROWS_AS((void)run(config({{"kind", "apply"}, {"params", {{"op", "nope"}}}})), std::invalid_argument);
}

TEST_CASE("kernel audit passes") {
    auto r = run(config({{"kind", "audit"}, {"experiment", "kernel"}}));
    CHECK(r.exit_code == kExitPass);
    CHECK(r.report["max_abs_err"].get<double>() < 1e-8);
}

TEST_CASE("order fits") {
    std::vector<double> h{0.1, 0.05, 0.025, 0.0125}, e;
    for (double x : h) e.push_back(3.0 * x * x);
    auto f = fit_order(h, e);
    CHECK(f.order == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.ci_lo <= f.order);
    CHECK(f.ci_hi >= f.order);
    CHECK(strictly_decreasing({3, 2, 1}));
    CHECK_FALSE(strictly_decreasing({3, 3, 1}));
    CHECK_THROWS_AS((void)fit_order({0.1, 0.05}, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("study report JSON round trip") {
    auto r = representation_study(RayMesh::interval(0.0, 1.0, 256), 0.5, {3, 4, 5});
    auto back = StudyReport::from_json(r.to_json());
    CHECK(back.name == r.name);
    CHECK(back.values == r.values);
    CHECK(back.pass == r.pass);
    CHECK(back.fit.has_value() == r.fit.has_value());
}

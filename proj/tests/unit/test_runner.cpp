#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "qnet/error.hpp"
#include "qnet/runner.hpp"

using namespace qnet;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("qnet_runner_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read(const std::filesystem::path& p) { return json::parse(slurp(p)); }

RunConfig pump_config(const std::filesystem::path& dir, const std::string& prefix) {
    auto doc = json::parse(R"({
        "network": {"preset": "two_site_pump", "options": {"initial": "10"}},
        "time": {"t_max": 4.0, "samples": 41, "dt": 0.01},
        "observables": {"populations": "all", "purity": true, "purity_rate": true, "trace": true,
                        "min_eigenvalue": true, "coherences": [[1, 2]], "eigen_coherences": [[1, 2]]}
    })");
    doc["output"] = {{"directory", dir.string()}, {"prefix", prefix}};
    return parse_run_config(doc);
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Run, WritesTableAndMetadata) {
    const auto dir = scratch_dir("run");
    const auto out = run(pump_config(dir, "a"));
    ASSERT_TRUE(std::filesystem::exists(out.table));
    const std::string csv = slurp(out.table);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "t,n_s1,n_s2,purity,purity_rate,trace,min_eigenvalue,re_rho_1_2,im_rho_1_2,re_eig_1_2,im_eig_1_2");
    EXPECT_EQ(line_count(csv), 42u);
    const auto meta = read(out.metadata);
    EXPECT_EQ(meta["status"], "ok");
    EXPECT_EQ(meta["partial"], false);
    EXPECT_EQ(meta["tool_version"], kToolVersion);
    EXPECT_DOUBLE_EQ(meta["constants"]["hbar_meV_ps"].get<double>(), kHbarMeVps);
    EXPECT_DOUBLE_EQ(meta["constants"]["cosine_noise_constant"].get<double>(), kCosineNoiseConstant);
    EXPECT_EQ(meta["preset"], "two_site_pump");
    EXPECT_EQ(meta["initial_state"], "|10>");
    EXPECT_TRUE(meta["invariants"]["ok"].get<bool>());
    EXPECT_DOUBLE_EQ(meta["parameters"]["J"].get<double>(), 2.0);
    EXPECT_EQ(meta["preset_metadata"]["hopping_convention"].get<std::string>().substr(0, 18), "matrix element J/2");
}

TEST(Run, IdenticalConfigsGiveIdenticalTables) {
    const auto dir = scratch_dir("repeat");
    const auto a = run(pump_config(dir, "a"));
    const auto b = run(pump_config(dir, "b"));
    EXPECT_EQ(slurp(a.table), slurp(b.table));
}

TEST(Run, SeedControlsUniformNoise) {
    const auto dir = scratch_dir("seed");
    auto doc = json::parse(R"({
        "network": {"preset": "open_chain_pump", "params": {"N": 3}, "options": {"noise": "uniform"}},
        "time": {"t_max": 1.0, "samples": 3, "dt": 0.01},
        "observables": {"populations": "all"}
    })");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "x"}};
    const auto cfg = parse_run_config(doc);
    RunOptions s1, s2;
    s1.seed = 1;
    s2.seed = 2;
    const auto a = run(cfg, s1);
    const std::string ta = slurp(a.table);
    const auto b = run(cfg, s2);
    EXPECT_NE(ta, slurp(b.table));
    EXPECT_EQ(read(b.metadata)["seed"], 2);
    EXPECT_EQ(read(b.metadata)["preset_metadata"]["noise_seed"], "2");
}

TEST(Run, EmptyObservablesWriteMetadataOnly) {
    const auto dir = scratch_dir("meta_only");
    auto doc = json::parse(R"({"network": {"preset": "two_site_transfer"}, "time": {"t_max": 1.0, "samples": 3}, "observables": {}})");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "m"}};
    const auto out = run(parse_run_config(doc));
    EXPECT_TRUE(out.table.empty());
    EXPECT_FALSE(std::filesystem::exists(dir / "m.csv"));
    EXPECT_TRUE(read(out.metadata)["table"].is_null());
}

TEST(Run, InvariantViolationKeepsPartialOutput) {
    const auto dir = scratch_dir("violation");
    auto doc = json::parse(R"({
        "network": {"preset": "hop_transfer", "params": {"gamma": 40.0}},
        "time": {"t_max": 5.0, "samples": 6, "dt": 0.25},
        "observables": {"populations": "all"}
    })");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "v"}};
    EXPECT_THROW(run(parse_run_config(doc)), InvariantViolation);
    const auto meta = read(dir / "v.meta.json");
    EXPECT_EQ(meta["status"], "invariant_violation");
    EXPECT_EQ(meta["partial"], true);
    EXPECT_GE(line_count(slurp(dir / "v.csv")), 2u);
}

TEST(Run, StaircaseReportedForParametricPairs) {
    const auto dir = scratch_dir("stairs");
    auto doc = json::parse(R"({
        "network": {"preset": "two_site_pump"},
        "time": {"t_max": 40.0, "samples": 4001, "dt": 0.01},
        "observables": {"parametric": [["s1", "s2"]]}
    })");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "p"}};
    const auto out = run(parse_run_config(doc));
    ASSERT_EQ(out.meta["effects"].size(), 1u);
    EXPECT_EQ(out.meta["effects"][0]["effect"], "staircase");
    EXPECT_TRUE(out.meta["effects"][0]["detected"].get<bool>());
}

TEST(Sweep, RowsPerValueAndTime) {
    const auto dir = scratch_dir("sweep");
    auto doc = json::parse(R"({
        "base": {"network": {"preset": "four_site_congestion", "params": {"gamma": 0.1}},
                 "time": {"method": "expm"}},
        "parameter": "gamma_b",
        "logspace": [-2, 0, 6],
        "sample_times": [10, 40],
        "sites": ["s3", "s4"],
        "detect": {"effect": "congestion_valley", "site": "s3"},
        "workers": 2
    })");
    doc["base"]["output"] = {{"directory", dir.string()}, {"prefix", "c"}};
    const auto out = sweep(parse_sweep_config(doc));
    const std::string csv = slurp(out.table);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "value,t,n_s3,n_s4");
    EXPECT_EQ(line_count(csv), 1u + 6 * 2);
    ASSERT_EQ(out.data.size(), 6u);
    EXPECT_EQ(out.data[0].size(), 2u);
    ASSERT_TRUE(out.effect);
    const auto meta = read(out.metadata);
    EXPECT_EQ(meta["sweep"]["rows"], 12);
    EXPECT_EQ(meta["sweep"]["workers"], 2);
    EXPECT_FALSE(meta["effect"].is_null());

    RunOptions serial;
    serial.workers = 1;
    serial.output_directory = dir / "serial";
    const auto again = sweep(parse_sweep_config(doc), serial);
    EXPECT_EQ(slurp(again.table), csv);
}

TEST(Sweep, ErrorsNameTheFailingValue) {
    const auto dir = scratch_dir("sweep_error");
    auto doc = json::parse(R"({
        "base": {"network": {"preset": "hop_transfer"}, "time": {"dt": 0.25}},
        "parameter": "gamma",
        "values": [0.1, 40.0],
        "sample_times": [5.0],
        "sites": ["s3"]
    })");
    doc["base"]["output"] = {{"directory", dir.string()}, {"prefix", "e"}};
    try {
        sweep(parse_sweep_config(doc));
        FAIL() << "expected an invariant violation";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invariant);
        EXPECT_NE(std::string(e.what()).find("gamma = 40"), std::string::npos) << e.what();
    }
}

TEST(Steady, PumpReportMatchesTheClosedForm) {
    const auto dir = scratch_dir("steady");
    auto doc = json::parse(R"({"network": {"preset": "two_site_pump"}})");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "s"}};
    const auto report = steady(parse_run_config(doc));
    EXPECT_EQ(report["multiplicity"], 1);
    EXPECT_LE(report["oracle"]["population_deviation"].get<double>(), 1e-9);
    EXPECT_LE(report["oracle"]["matrix_deviation"].get<double>(), 1e-9);
    EXPECT_NEAR(report["states"][0]["populations"]["s1"].get<double>(), 0.408867, 5e-7);
    EXPECT_TRUE(std::filesystem::exists(dir / "s.steady.json"));
}

TEST(Steady, ThreeSiteOrdering) {
    const auto dir = scratch_dir("steady3");
    auto doc = json::parse(R"({"network": {"preset": "three_site_pump"}})");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "s"}};
    const auto report = steady(parse_run_config(doc));
    EXPECT_LE(report["oracle"]["population_deviation"].get<double>(), 1e-9);
    EXPECT_TRUE(report["oracle"]["ordered_n1_ge_n2_ge_n3"].get<bool>());
}

TEST(Steady, WrongConventionIsAnOracleMismatch) {
    const auto dir = scratch_dir("steady_full");
    auto doc = json::parse(R"({"network": {"preset": "two_site_pump", "options": {"hopping_convention": "full"}}})");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "f"}};
    EXPECT_THROW(steady(parse_run_config(doc)), OracleMismatch);
    EXPECT_TRUE(std::filesystem::exists(dir / "f.steady.json"));
}

TEST(Steady, DegenerateNullSpaceSkipsTheOracle) {
    const auto dir = scratch_dir("steady_transfer");
    auto doc = json::parse(R"({"network": {"preset": "two_site_transfer"}})");
    doc["output"] = {{"directory", dir.string()}, {"prefix", "t"}};
    const auto report = steady(parse_run_config(doc));
    EXPECT_GE(report["multiplicity"].get<int>(), 3);
    EXPECT_FALSE(report.contains("oracle"));
}

TEST(Options, OverridesApply) {
    RunConfig cfg;
    cfg.preset = PresetParams{"two_site_pump", {}, {}, 0};
    RunOptions o;
    o.dt = 0.5;
    o.seed = 9;
    o.output_directory = "/tmp/x";
    const auto out = apply_options(cfg, o);
    EXPECT_EQ(*out.dt, 0.5);
    EXPECT_EQ(out.seed, 9u);
    EXPECT_EQ(out.preset->seed, 9u);
    EXPECT_EQ(out.output_directory, std::filesystem::path("/tmp/x"));
    EXPECT_EQ(format_number17(0.1), "0.10000000000000001");
}

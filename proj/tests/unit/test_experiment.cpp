#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "evoflow/errors.hpp"
#include "evoflow/experiment.hpp"

using namespace evoflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_out_root(const std::string& tag) {
    const fs::path root = fs::temp_directory_path() / ("evoflow-test-" + tag);
    fs::remove_all(root);
    fs::create_directories(root);
    return root;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("the runner knows exactly nine experiment kinds") {
    const auto kinds = experiment_kinds();
    const std::vector<std::string> expected = {"orbits", "schema",   "coverage",
                                               "mix",    "evolve",   "sample",
                                               "flow",   "spectrum", "jsr"};
    CHECK(kinds == expected);
}

TEST_CASE("describe prints a schema and a runnable example for every kind") {
    for (const auto& kind : experiment_kinds()) {
        const std::string text = describe_kind(kind);
        CHECK(text.find("kind: " + kind) != std::string::npos);
        CHECK(text.find("schema:") != std::string::npos);
        CHECK(text.find("example config:") != std::string::npos);
    }
    CHECK(describe_kind("orbits").find("group") != std::string::npos);
    CHECK(describe_kind("flow").find("double_well") != std::string::npos);
    CHECK_THROWS_AS(describe_kind("bogus"), UsageError);
}

TEST_CASE("every kind's example config actually runs") {
    const fs::path root = fresh_out_root("examples");
    for (const auto& kind : experiment_kinds()) {
        const std::string text = describe_kind(kind);
        const auto at = text.find("example config:");
        REQUIRE(at != std::string::npos);
        const std::string example = text.substr(at + std::string("example config:").size());

        const RunResult result = run_experiment_text(example, root.string());
        INFO("kind: ", kind);
        CHECK(fs::exists(result.run_dir));
        CHECK(!result.artifacts.empty());
        // Every run records the validated config alongside its outputs.
        CHECK(fs::exists(fs::path(result.run_dir) / "config.json"));
        for (const auto& name : result.artifacts)
            CHECK(fs::exists(fs::path(result.run_dir) / name));

        // Run directories are named kind-<12 hex digits>-<UTC stamp>Z.
        const std::string dir_name = fs::path(result.run_dir).filename().string();
        const std::regex pattern(kind + "-[0-9a-f]{12}-\\d{8}T\\d{6}Z(-\\d+)?");
        CHECK(std::regex_match(dir_name, pattern));
    }
    fs::remove_all(root);
}

TEST_CASE("validation failures name the offending field") {
    const fs::path root = fresh_out_root("validation");

    SUBCASE("missing kind") {
        CHECK_THROWS_WITH_AS(run_experiment_text(R"({"seed": 1})", root.string()),
                             doctest::Contains("kind"), UsageError);
    }
    SUBCASE("unknown kind") {
        CHECK_THROWS_WITH_AS(
            run_experiment_text(R"({"kind": "frobnicate"})", root.string()),
            doctest::Contains("frobnicate"), UsageError);
    }
    SUBCASE("unknown key is rejected by name") {
        CHECK_THROWS_WITH_AS(
            run_experiment_text(
                R"({"kind": "mix", "space": {"d": 2, "l": 2},
                    "operators": {"crossover": "uniform", "q": 0.1},
                    "population": "uniform", "typo_key": 3})",
                root.string()),
            doctest::Contains("typo_key"), UsageError);
    }
    SUBCASE("out-of-range value names its path") {
        CHECK_THROWS_WITH_AS(
            run_experiment_text(
                R"({"kind": "mix", "space": {"d": 1, "l": 2},
                    "operators": {"crossover": "uniform", "q": 0.1},
                    "population": "uniform"})",
                root.string()),
            doctest::Contains("space.d"), UsageError);
    }
    SUBCASE("wrong type names its path") {
        CHECK_THROWS_WITH_AS(
            run_experiment_text(
                R"({"kind": "mix", "space": {"d": 2, "l": "two"},
                    "operators": {"crossover": "uniform", "q": 0.1},
                    "population": "uniform"})",
                root.string()),
            doctest::Contains("space.l"), UsageError);
    }
    SUBCASE("missing required field names it") {
        CHECK_THROWS_WITH_AS(
            run_experiment_text(
                R"({"kind": "mix", "space": {"d": 2, "l": 2}, "population": "uniform"})",
                root.string()),
            doctest::Contains("operators"), UsageError);
    }
    SUBCASE("population vector off the simplex is rejected") {
        CHECK_THROWS_AS(
            run_experiment_text(
                R"({"kind": "mix", "space": {"d": 2, "l": 1},
                    "operators": {"crossover": "none", "q": 0.0},
                    "population": [0.9, 0.9]})",
                root.string()),
            UsageError);
    }
    SUBCASE("fitness table of the wrong length is rejected") {
        CHECK_THROWS_AS(
            run_experiment_text(
                R"({"kind": "evolve", "space": {"d": 2, "l": 2},
                    "operators": {"crossover": "uniform", "q": 0.1},
                    "fitness": {"type": "table", "table": [1.0, 2.0, 3.0]},
                    "start": "uniform", "steps": 10})",
                root.string()),
            UsageError);
    }
    SUBCASE("malformed JSON is a usage error") {
        CHECK_THROWS_WITH_AS(run_experiment_text("{ not json", root.string()),
                             doctest::Contains("JSON"), UsageError);
    }

    fs::remove_all(root);
}

TEST_CASE("an evolve run writes a simplex-clean trajectory and a report") {
    const fs::path root = fresh_out_root("evolve");
    const std::string config = R"({
        "kind": "evolve",
        "seed": 11,
        "space": {"d": 2, "l": 2},
        "operators": {"crossover": "uniform", "q": 0.05},
        "fitness": {"type": "onemax"},
        "start": "uniform",
        "steps": 200
    })";
    const RunResult result = run_experiment_text(config, root.string());

    const std::string csv = slurp(fs::path(result.run_dir) / "trajectory.csv");
    CHECK(csv.rfind("step,", 0) == 0);        // mandatory header
    CHECK(csv.find('\r') == std::string::npos);  // '\n' line ends only
    CHECK(csv.find(',') != std::string::npos);
    CHECK(csv.find('.') != std::string::npos);   // '.' decimal separator

    const std::string report = slurp(fs::path(result.run_dir) / "evolve_report.json");
    CHECK(report.find("fixed_point") != std::string::npos);
    fs::remove_all(root);
}

TEST_CASE("reruns with the same seed and config are byte-identical") {
    const std::string config = R"({
        "kind": "sample",
        "seed": 99,
        "space": {"d": 2, "l": 2},
        "operators": {"crossover": "uniform", "q": 0.1},
        "fitness": {"type": "onemax"},
        "start": "uniform",
        "steps": 5,
        "mu": 1000,
        "seeds": 5
    })";
    const fs::path root_a = fresh_out_root("det-a");
    const fs::path root_b = fresh_out_root("det-b");
    const RunResult a = run_experiment_text(config, root_a.string());
    const RunResult b = run_experiment_text(config, root_b.string());
    REQUIRE(a.artifacts == b.artifacts);
    for (const auto& name : a.artifacts) {
        if (name == "config.json") continue;  // copies of the same input, compared below anyway
        INFO("artifact: ", name);
        CHECK(slurp(fs::path(a.run_dir) / name) == slurp(fs::path(b.run_dir) / name));
    }
    CHECK(slurp(fs::path(a.run_dir) / "config.json") ==
          slurp(fs::path(b.run_dir) / "config.json"));
    fs::remove_all(root_a);
    fs::remove_all(root_b);
}

TEST_CASE("two runs of one config land in distinct run directories") {
    const fs::path root = fresh_out_root("distinct");
    const std::string config = R"({
        "kind": "orbits",
        "space": {"d": 2, "l": 3},
        "group": {"generators": [{"type": "rotation"}]}
    })";
    const RunResult first = run_experiment_text(config, root.string());
    const RunResult second = run_experiment_text(config, root.string());
    CHECK(first.run_dir != second.run_dir);
    CHECK(fs::exists(first.run_dir));
    CHECK(fs::exists(second.run_dir));
    fs::remove_all(root);
}

TEST_CASE("the verify suite passes and the fault hook trips it") {
    std::ostringstream ok;
    CHECK(run_verify(ok));
    const std::string good = ok.str();
    CHECK(good.find("digit-arithmetic: pass") != std::string::npos);
    CHECK(good.find("mix-triple-sum: pass") != std::string::npos);
    CHECK(good.find("eigen: pass") != std::string::npos);
    CHECK(good.find("FAIL") == std::string::npos);

    std::ostringstream bad;
    CHECK_FALSE(run_verify(bad, "mix-triple-sum"));
    CHECK(bad.str().find("mix-triple-sum: FAIL") != std::string::npos);
    CHECK(bad.str().find("injected fault") != std::string::npos);
}

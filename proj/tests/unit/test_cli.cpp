#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cvp/cli/config.hpp"
#include "cvp/cli/json_io.hpp"
#include "cvp/cli/pipeline.hpp"

using namespace cvp;
using namespace cvp::cli;

namespace {

const std::filesystem::path kReference = std::filesystem::path(CVP_SOURCE_DIR) / "configs" / "reference.json";

json minimal_doc() {
    return json::parse(R"({
      "space": {"realization": "euclidean", "dims_per_level": 1, "max_level": 1, "seed": 3},
      "kernel": {"kind": "bounded_range", "c": 1.0, "R": 1.0, "p": 1.0},
      "grids": [{"level": 1, "lattice": {"ranges": [[-1, 1]], "steps": [9]}}],
      "family": {"sample": [{"level": 1, "points": [[0], [0.5]]}], "radii": [0.3], "union_depth": 1},
      "checks": {"euler_lagrange": {"tol": 1e-5}},
      "output": {"dir": "unused", "formats": []}
    })");
}

std::string error_where(const json& doc) {
    try {
        (void)parse_config(doc);
    } catch (const ConfigError& e) {
        return e.where();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("parse errors report the line") {
    try {
        (void)parse_json_text("{\n  \"space\": {\n    \"seed\": ,\n  }\n}", "inline");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("field errors report the dotted path") {
    auto doc = minimal_doc();
    doc["space"]["max_level"] = 0;
    CHECK(error_where(doc) == "space.max_level");

    doc = minimal_doc();
    doc["kernel"]["p"] = 0.5;
    CHECK(error_where(doc).rfind("kernel", 0) == 0);

    doc = minimal_doc();
    doc["checks"]["condition_B"] = {{"eps", 0}, {"set", {{"balls", json::array({{{"center", {0}}, {"radius", 1}}})}}}};
    CHECK(error_where(doc) == "checks.condition_B.eps");

    doc = minimal_doc();
    doc["solver"] = {{"qp_tolerence", 1e-9}};
    CHECK(error_where(doc) == "solver.qp_tolerence");

    doc = minimal_doc();
    doc["grids"][0]["lattice"]["ranges"] = json::array({json::array({-1, 1}), json::array({0, 1})});
    CHECK(error_where(doc).rfind("grids[0]", 0) == 0);
}

TEST_CASE("overrides use dotted paths and JSON values") {
    auto doc = minimal_doc();
    apply_overrides(doc, {"solver.qp_tolerance=1e-8", "output.dir=elsewhere", "checks.phi_properties=true"});
    CHECK(doc["solver"]["qp_tolerance"] == 1e-8);
    CHECK(doc["output"]["dir"] == "elsewhere");
    CHECK(doc["checks"]["phi_properties"] == true);
    const auto cfg = parse_config(doc);
    CHECK(cfg.solver.qp_tolerance == 1e-8);
    CHECK(cfg.checks.phi_properties);
    CHECK_THROWS_AS(apply_overrides(doc, {"no_equals_sign"}), ConfigError);
}

TEST_CASE("config contents") {
    const auto cfg = load_config(kReference);
    CHECK(cfg.space.max_level == 3);
    CHECK(cfg.grids.size() == 3);
    CHECK(cfg.grids[0].size() == 41);
    CHECK(cfg.grids[2].size() == 123);
    CHECK(cfg.grids[0][10].coords()[0] == -1.0);
    CHECK(cfg.level_configs().size() == 3);
    CHECK(cfg.lagrangian().kind() == KernelKind::bounded_range);
    CHECK(cfg.checks.condition_b_eps == 1e-3);
    CHECK(cfg.family.sample.size() == 10);
}

TEST_CASE("minimal single-level run exits 0 and reports disabled checks") {
    const auto cfg = parse_config(minimal_doc());
    const auto out = run_pipeline(cfg);
    CHECK(out.exit_code == exit_ok);
    CHECK(out.report["levels"].size() == 1);
    CHECK(out.report["checks"]["euler_lagrange"]["verdict"] == "pass");
    for (const char* name : {"phi_properties", "condition_B", "condition_iv", "minimality", "closure", "dimension",
                             "nontriviality", "kernel_class"})
        CHECK(out.report["checks"][name]["verdict"] == "disabled");
    CHECK(out.report["verdicts"]["levels_converged"] == "pass");
}

TEST_CASE("entropy kernel with the built-in origin exhaustion") {
    auto doc = minimal_doc();
    doc["kernel"] = {{"kind", "entropy_vanishing"}, {"c", 1.0}, {"delta", 0.25},
                     {"f_table", {{0.25, 1.0}, {2.0, 0.1}}}, {"exhaustion_ref", "origin"}, {"sample_budget", 32}};
    const auto cfg = parse_config(doc);
    const auto& p = std::get<EntropyVanishingParams>(cfg.lagrangian().params());
    REQUIRE(p.exhaustion.size() == 1);
    CHECK(p.exhaustion[0].balls[0].radius == 1.0);
    CHECK(run_pipeline(cfg).exit_code == exit_ok);

    doc["kernel"]["exhaustion_ref"] = "nowhere";
    CHECK(error_where(doc) == "kernel.exhaustion_ref");
}

TEST_CASE("failing checks give exit 2") {
    auto doc = minimal_doc();
    // A claimed diagonal bound above the true one fails condition (a).
    doc["kernel"] = {{"kind", "user_table"}, {"c", 2.0}, {"table", {{0.0, 1.0}, {1.0, 0.0}}}};
    doc["checks"]["kernel_class"] = {{"sample", 9}};
    const auto out = run_pipeline(parse_config(doc));
    CHECK(out.exit_code == exit_check_failed);
    CHECK(out.report["checks"]["kernel_class"]["verdict"] == "fail");
}

TEST_CASE("reports and CSV output") {
    const auto cfg = load_config(kReference);
    const auto a = run_pipeline(cfg);
    CHECK(a.exit_code == exit_ok);
    const auto b = run_pipeline(cfg);
    CHECK(a.report.dump(2) == b.report.dump(2));

    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-2.0) == "-2");
    const auto csv = atoms_csv(a.levels[0].solution->measure);
    CHECK(csv.rfind("index,level,", 0) == 0);

    // A serialized level solution round-trips.
    const auto& sol = *a.levels[1].solution;
    const auto back = level_solution_from_json(json::parse(to_json(sol, true).dump()), cfg.space);
    REQUIRE(back.measure.size() == sol.measure.size());
    for (std::size_t i = 0; i < sol.measure.size(); ++i) {
        CHECK(back.measure.atoms()[i].weight == sol.measure.atoms()[i].weight);
        CHECK(same_representation(back.measure.atoms()[i].point, sol.measure.atoms()[i].point));
    }
    CHECK(back.candidate_grid.size() == sol.candidate_grid.size());
}

#include "evoflow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "evoflow/dynamics.hpp"
#include "evoflow/errors.hpp"
#include "evoflow/exact.hpp"
#include "evoflow/expr.hpp"
#include "evoflow/flows.hpp"
#include "evoflow/genome_ring.hpp"
#include "evoflow/group_action.hpp"
#include "evoflow/mixing.hpp"
#include "evoflow/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace evoflow {

namespace {

// ---------------------------------------------------------------------------
// Minimal JSON-schema interpreter (type / enum / bounds / properties /
// required / additionalProperties / items / minItems / maxItems). The
// published `describe` fragments are the exact objects validated against.
// ---------------------------------------------------------------------------

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

std::string json_type_name(const json& v) {
    if (v.is_object()) return "object";
    if (v.is_array()) return "array";
    if (v.is_string()) return "string";
    if (v.is_boolean()) return "boolean";
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    if (v.is_null()) return "null";
    return "unknown";
}

bool type_matches(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    return false;
}

void validate_schema(const json& value, const json& schema, const std::string& path) {
    const std::string where = path.empty() ? "config" : path;

    if (schema.contains("type")) {
        const json& t = schema.at("type");
        bool ok = false;
        std::string expected;
        if (t.is_string()) {
            ok = type_matches(value, t.get<std::string>());
            expected = t.get<std::string>();
        } else {
            for (const auto& one : t) {
                if (!expected.empty()) expected += " or ";
                expected += one.get<std::string>();
                ok = ok || type_matches(value, one.get<std::string>());
            }
        }
        if (!ok)
            throw UsageError(where + ": expected " + expected + ", got " + json_type_name(value));
    }

    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema.at("enum")) ok = ok || e == value;
        if (!ok)
            throw UsageError(where + ": value " + value.dump() + " is not one of " +
                             schema.at("enum").dump());
    }

    if (value.is_number()) {
        const double x = value.get<double>();
        if (schema.contains("minimum") && x < schema.at("minimum").get<double>())
            throw UsageError(where + ": " + value.dump() + " is below minimum " +
                             schema.at("minimum").dump());
        if (schema.contains("maximum") && x > schema.at("maximum").get<double>())
            throw UsageError(where + ": " + value.dump() + " is above maximum " +
                             schema.at("maximum").dump());
        if (schema.contains("exclusiveMinimum") &&
            x <= schema.at("exclusiveMinimum").get<double>())
            throw UsageError(where + ": " + value.dump() + " must exceed " +
                             schema.at("exclusiveMinimum").dump());
    }

    if (value.is_object()) {
        const json props = schema.value("properties", json::object());
        const bool additional = schema.value("additionalProperties", true);
        if (schema.contains("required"))
            for (const auto& r : schema.at("required"))
                if (!value.contains(r.get<std::string>()))
                    throw UsageError(join_path(path, r.get<std::string>()) +
                                     ": required key is missing");
        for (const auto& [key, sub] : value.items()) {
            if (props.contains(key))
                validate_schema(sub, props.at(key), join_path(path, key));
            else if (!additional)
                throw UsageError(join_path(path, key) + ": unknown key");
        }
    }

    if (value.is_array()) {
        if (schema.contains("minItems") && value.size() < schema.at("minItems").get<std::size_t>())
            throw UsageError(where + ": needs at least " + schema.at("minItems").dump() +
                             " entries");
        if (schema.contains("maxItems") && value.size() > schema.at("maxItems").get<std::size_t>())
            throw UsageError(where + ": allows at most " + schema.at("maxItems").dump() +
                             " entries");
        if (schema.contains("items")) {
            std::size_t i = 0;
            for (const auto& item : value)
                validate_schema(item, schema.at("items"), where + "[" + std::to_string(i++) + "]");
        }
    }
}

// ---------------------------------------------------------------------------
// Published schema fragments.
// ---------------------------------------------------------------------------

json S(const char* text) { return json::parse(text); }

json space_schema() {
    return S(R"({
      "type": "object",
      "properties": {
        "d": {"type": "integer", "minimum": 2, "maximum": 64},
        "l": {"type": "integer", "minimum": 1, "maximum": 32}
      },
      "required": ["d", "l"],
      "additionalProperties": false
    })");
}

json group_schema() {
    return S(R"({
      "type": "object",
      "properties": {
        "generators": {
          "type": "array",
          "items": {
            "type": "object",
            "properties": {
              "type": {"enum": ["rotation", "translation", "digit_permutation"]},
              "value": {"type": "integer", "minimum": 0},
              "positions": {"type": "array", "items": {"type": "integer", "minimum": 0}}
            },
            "required": ["type"],
            "additionalProperties": false
          }
        }
      },
      "required": ["generators"],
      "additionalProperties": false
    })");
}

json operators_schema() {
    return S(R"({
      "type": "object",
      "properties": {
        "crossover": {"enum": ["uniform", "one_point", "none"]},
        "q": {"type": "number", "minimum": 0, "maximum": 1},
        "order": {"enum": ["crossover_first", "mutation_first"]}
      },
      "required": ["crossover", "q"],
      "additionalProperties": false
    })");
}

json fitness_schema() {
    return S(R"({
      "type": "object",
      "properties": {
        "type": {"enum": ["onemax", "table", "expr"]},
        "table": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "expr": {"type": "string"},
        "scaling": {
          "type": "object",
          "properties": {
            "kind": {"enum": ["identity", "power", "exponential", "linear_offset"]},
            "param": {"type": "number"}
          },
          "required": ["kind"],
          "additionalProperties": false
        }
      },
      "required": ["type"],
      "additionalProperties": false
    })");
}

json start_schema() {
    return S(R"({"type": ["string", "array"], "items": {"type": "number"}})");
}

json integrator_schema() {
    return S(R"({
      "type": "object",
      "properties": {
        "method": {"enum": ["rk4_fixed", "rk45_adaptive"]},
        "h": {"type": "number", "exclusiveMinimum": 0},
        "abs_tol": {"type": "number", "exclusiveMinimum": 0},
        "rel_tol": {"type": "number", "exclusiveMinimum": 0},
        "max_time": {"type": "number", "exclusiveMinimum": 0},
        "max_steps": {"type": "integer", "minimum": 1}
      },
      "additionalProperties": false
    })");
}

json matrix_schema() {
    return S(R"({
      "type": "array",
      "items": {"type": "array", "items": {"type": "number"}, "minItems": 1},
      "minItems": 1
    })");
}

json objective_schema() {
    return S(R"({
      "type": "object",
      "properties": {
        "type": {"enum": ["double_well", "sphere_quadratic", "coordinate", "expr"]},
        "weights": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "index": {"type": "integer", "minimum": 0},
        "dim": {"type": "integer", "minimum": 1},
        "expr": {"type": "string"}
      },
      "required": ["type"],
      "additionalProperties": false
    })");
}

json constraint_schema() {
    json schema = S(R"({
      "type": "object",
      "properties": {
        "type": {"enum": ["none", "circle", "sphere", "affine"]},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "dim": {"type": "integer", "minimum": 1},
        "b": {"type": "array", "items": {"type": "number"}}
      },
      "required": ["type"],
      "additionalProperties": false
    })");
    schema["properties"]["A"] = matrix_schema();
    return schema;
}

json make_kind_schema(const std::string& kind, json extra_properties,
                      std::vector<std::string> required) {
    json schema = S(R"({"type": "object", "additionalProperties": false})");
    json props = json::object();
    props["kind"] = json{{"enum", json::array({kind})}};
    props["seed"] = S(R"({"type": "integer", "minimum": 0})");
    props["output_dir"] = S(R"({"type": "string"})");
    for (auto& [k, v] : extra_properties.items()) props[k] = v;
    schema["properties"] = props;
    required.insert(required.begin(), "kind");
    schema["required"] = required;
    return schema;
}

json experiment_schema(const std::string& kind) {
    if (kind == "orbits") {
        json extra = json::object();
        extra["space"] = space_schema();
        extra["group"] = group_schema();
        return make_kind_schema(kind, extra, {"space", "group"});
    }
    if (kind == "schema") {
        json extra = json::object();
        extra["space"] = space_schema();
        extra["mask"] = S(R"({"type": "integer", "minimum": 0})");
        return make_kind_schema(kind, extra, {"space", "mask"});
    }
    if (kind == "coverage") {
        json extra = json::object();
        extra["space"] = space_schema();
        extra["drop"] = S(R"({"type": "integer", "minimum": 0})");
        return make_kind_schema(kind, extra, {"space"});
    }
    if (kind == "mix") {
        json extra = json::object();
        extra["space"] = space_schema();
        extra["operators"] = operators_schema();
        extra["population"] = start_schema();
        extra["exact"] = S(R"({"type": "boolean"})");
        return make_kind_schema(kind, extra, {"space", "operators", "population"});
    }
    if (kind == "evolve") {
        json extra = json::object();
        extra["space"] = space_schema();
        extra["operators"] = operators_schema();
        extra["fitness"] = fitness_schema();
        extra["start"] = start_schema();
        extra["steps"] = S(R"({"type": "integer", "minimum": 1})");
        extra["tol"] = S(R"({"type": "number", "minimum": 0})");
        extra["record_every"] = S(R"({"type": "integer", "minimum": 1})");
        return make_kind_schema(kind, extra, {"space", "operators", "fitness", "start", "steps"});
    }
    if (kind == "sample") {
        json extra = json::object();
        extra["space"] = space_schema();
        extra["operators"] = operators_schema();
        extra["fitness"] = fitness_schema();
        extra["start"] = start_schema();
        extra["steps"] = S(R"({"type": "integer", "minimum": 1})");
        extra["mu"] = S(R"({"type": "integer", "minimum": 1})");
        extra["seeds"] = S(R"({"type": "integer", "minimum": 1, "maximum": 1000})");
        return make_kind_schema(kind, extra,
                                {"space", "operators", "fitness", "start", "steps", "mu", "seeds"});
    }
    if (kind == "flow") {
        json extra = json::object();
        extra["flow"] =
            S(R"({"enum": ["gradient", "quotient", "projected", "double_bracket", "exit"]})");
        extra["objective"] = objective_schema();
        extra["constraint"] = constraint_schema();
        extra["x0"] = S(R"({"type": "array", "items": {"type": "number"}, "minItems": 1})");
        extra["direction"] = S(R"({"type": "array", "items": {"type": "number"}, "minItems": 1})");
        extra["A"] = matrix_schema();
        extra["N"] = matrix_schema();
        extra["integrator"] = integrator_schema();
        return make_kind_schema(kind, extra, {"flow"});
    }
    if (kind == "spectrum") {
        json target = S(R"({
          "type": "object",
          "properties": {
            "type": {"enum": ["matrix", "mutation_kernel", "ea_map"]},
            "q": {"type": "number", "minimum": 0, "maximum": 1}
          },
          "required": ["type"],
          "additionalProperties": false
        })");
        target["properties"]["data"] = matrix_schema();
        target["properties"]["space"] = space_schema();
        target["properties"]["operators"] = operators_schema();
        target["properties"]["fitness"] = fitness_schema();
        target["properties"]["start"] = start_schema();
        json extra = json::object();
        extra["target"] = target;
        return make_kind_schema(kind, extra, {"target"});
    }
    if (kind == "jsr") {
        json extra = json::object();
        extra["matrices"] = S(R"({"type": "array", "minItems": 1})");
        extra["matrices"]["items"] = matrix_schema();
        extra["depth"] = S(R"({"type": "integer", "minimum": 1, "maximum": 12})");
        return make_kind_schema(kind, extra, {"matrices", "depth"});
    }
    throw UsageError("unknown experiment kind '" + kind + "'");
}

json experiment_example(const std::string& kind) {
    if (kind == "orbits")
        return S(R"({
          "kind": "orbits",
          "space": {"d": 2, "l": 3},
          "group": {"generators": [{"type": "rotation"}]}
        })");
    if (kind == "schema")
        return S(R"({
          "kind": "schema",
          "space": {"d": 2, "l": 3},
          "mask": 5
        })");
    if (kind == "coverage")
        return S(R"({
          "kind": "coverage",
          "space": {"d": 3, "l": 2}
        })");
    if (kind == "mix")
        return S(R"({
          "kind": "mix",
          "space": {"d": 2, "l": 2},
          "operators": {"crossover": "uniform", "q": 0.1},
          "population": "uniform",
          "exact": true
        })");
    if (kind == "evolve")
        return S(R"({
          "kind": "evolve",
          "space": {"d": 2, "l": 3},
          "operators": {"crossover": "uniform", "q": 0.01},
          "fitness": {"type": "onemax"},
          "start": "uniform",
          "steps": 500
        })");
    if (kind == "sample")
        return S(R"({
          "kind": "sample",
          "space": {"d": 2, "l": 3},
          "operators": {"crossover": "uniform", "q": 0.01},
          "fitness": {"type": "onemax"},
          "start": "uniform",
          "steps": 1,
          "mu": 100000,
          "seeds": 20,
          "seed": 1
        })");
    if (kind == "flow")
        return S(R"({
          "kind": "flow",
          "flow": "gradient",
          "objective": {"type": "double_well"},
          "x0": [0.3],
          "integrator": {"method": "rk45_adaptive", "max_time": 50.0}
        })");
    if (kind == "spectrum")
        return S(R"({
          "kind": "spectrum",
          "target": {"type": "mutation_kernel", "space": {"d": 2, "l": 1}, "q": 0.05}
        })");
    if (kind == "jsr")
        return S(R"({
          "kind": "jsr",
          "matrices": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]],
          "depth": 8
        })");
    throw UsageError("unknown experiment kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Config -> domain objects.
// ---------------------------------------------------------------------------

GenomeSpace space_of(const json& j) {
    return GenomeSpace(j.at("d").get<int>(), j.at("l").get<int>());
}

CrossoverSpec crossover_of(const json& operators) {
    const std::string name = operators.at("crossover").get<std::string>();
    if (name == "uniform") return {CrossoverKind::uniform};
    if (name == "one_point") return {CrossoverKind::one_point};
    return {CrossoverKind::none};
}

OperatorOrder order_of(const json& operators) {
    if (operators.value("order", "crossover_first") == std::string("mutation_first"))
        return OperatorOrder::mutation_first;
    return OperatorOrder::crossover_first;
}

FitnessPipeline fitness_of(const json& j, const GenomeSpace& space) {
    const std::string type = j.at("type").get<std::string>();
    FitnessPipeline pipeline;
    if (type == "onemax") {
        pipeline = FitnessPipeline::onemax_plus_one();
    } else if (type == "table") {
        if (!j.contains("table")) throw UsageError("fitness.table: required for type table");
        const auto table = j.at("table").get<std::vector<double>>();
        if (table.size() != space.size())
            throw UsageError("fitness.table: has " + std::to_string(table.size()) +
                             " entries, the space has " + std::to_string(space.size()));
        pipeline = FitnessPipeline::from_table(table);
    } else if (type == "expr") {
        if (!j.contains("expr")) throw UsageError("fitness.expr: required for type expr");
        const Expression expr = Expression::parse(j.at("expr").get<std::string>(), space.l());
        pipeline = FitnessPipeline::onemax_plus_one();  // reuse the digit decoder
        pipeline.objective = [expr](const Eigen::VectorXd& x) { return expr.eval(x); };
    } else {
        throw UsageError("fitness.type: unknown type " + type);
    }
    if (j.contains("scaling")) {
        const json& s = j.at("scaling");
        const std::string kind = s.at("kind").get<std::string>();
        if (kind == "power") pipeline.scaling.kind = ScalingSpec::Kind::power;
        else if (kind == "exponential") pipeline.scaling.kind = ScalingSpec::Kind::exponential;
        else if (kind == "linear_offset") pipeline.scaling.kind = ScalingSpec::Kind::linear_offset;
        else pipeline.scaling.kind = ScalingSpec::Kind::identity;
        pipeline.scaling.param = s.value("param", 0.0);
    }
    return pipeline;
}

Eigen::VectorXd start_of(const json& j, const GenomeSpace& space, const char* field) {
    const auto n = static_cast<Eigen::Index>(space.size());
    if (j.is_string()) {
        const std::string text = j.get<std::string>();
        if (text == "uniform")
            return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        if (text.rfind("vertex:", 0) == 0) {
            const std::uint64_t v = std::strtoull(text.c_str() + 7, nullptr, 10);
            if (v >= space.size())
                throw UsageError(std::string(field) + ": vertex " + std::to_string(v) +
                                 " is outside the space");
            Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
            p(static_cast<Eigen::Index>(v)) = 1.0;
            return p;
        }
        throw UsageError(std::string(field) + ": unknown preset '" + text +
                         "' (use \"uniform\", \"vertex:<i>\", or an explicit vector)");
    }
    const auto values = j.get<std::vector<double>>();
    if (values.size() != space.size())
        throw UsageError(std::string(field) + ": has " + std::to_string(values.size()) +
                         " entries, the space has " + std::to_string(space.size()));
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = values[static_cast<std::size_t>(i)];
    try {
        require_simplex(p);
    } catch (const UsageError& e) {
        throw UsageError(std::string(field) + ": " + e.what());
    }
    return p;
}

GenerationMap map_of(const json& cfg, const GenomeSpace& space) {
    const json& operators = cfg.at("operators");
    const Eigen::VectorXd phi = fitness_vector(fitness_of(cfg.at("fitness"), space), space);
    return GenerationMap(space, phi, crossover_of(operators),
                         MutationSpec{operators.at("q").get<double>()}, order_of(operators));
}

IntegratorConfig integrator_of(const json& cfg) {
    IntegratorConfig ic;
    if (!cfg.contains("integrator")) return ic;
    const json& j = cfg.at("integrator");
    if (j.value("method", "rk45_adaptive") == std::string("rk4_fixed"))
        ic.method = IntegratorConfig::Method::rk4_fixed;
    ic.h = j.value("h", ic.h);
    ic.abs_tol = j.value("abs_tol", ic.abs_tol);
    ic.rel_tol = j.value("rel_tol", ic.rel_tol);
    ic.max_time = j.value("max_time", ic.max_time);
    ic.max_steps = j.value("max_steps", ic.max_steps);
    return ic;
}

Eigen::MatrixXd matrix_of(const json& j, const std::string& field) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw UsageError(field + ": row " + std::to_string(r) + " has " +
                             std::to_string(row.size()) + " entries, expected " +
                             std::to_string(cols));
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

Eigen::VectorXd vector_of(const json& j) {
    const auto values = j.get<std::vector<double>>();
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

SmoothObjective objective_of(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    SmoothObjective obj;
    if (type == "double_well") {
        obj.dimension = 1;
        obj.f = [](const Eigen::VectorXd& x) {
            const double s = x(0) * x(0) - 1.0;
            return s * s;
        };
        obj.grad = [](const Eigen::VectorXd& x) {
            Eigen::VectorXd g(1);
            g(0) = 4.0 * x(0) * (x(0) * x(0) - 1.0);
            return g;
        };
        return obj;
    }
    if (type == "sphere_quadratic") {
        if (!j.contains("weights"))
            throw UsageError("objective.weights: required for sphere_quadratic");
        const Eigen::VectorXd w = vector_of(j.at("weights"));
        obj.dimension = w.size();
        obj.f = [w](const Eigen::VectorXd& x) { return 0.5 * x.dot(w.cwiseProduct(x)); };
        obj.grad = [w](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return w.cwiseProduct(x);
        };
        return obj;
    }
    if (type == "coordinate") {
        if (!j.contains("dim") || !j.contains("index"))
            throw UsageError("objective: coordinate needs dim and index");
        const Eigen::Index dim = j.at("dim").get<Eigen::Index>();
        const Eigen::Index index = j.at("index").get<Eigen::Index>();
        if (index >= dim) throw UsageError("objective.index: exceeds dim");
        obj.dimension = dim;
        obj.f = [index](const Eigen::VectorXd& x) { return x(index); };
        obj.grad = [dim, index](const Eigen::VectorXd&) -> Eigen::VectorXd {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
            g(index) = 1.0;
            return g;
        };
        return obj;
    }
    if (type == "expr") {
        if (!j.contains("dim") || !j.contains("expr"))
            throw UsageError("objective: expr needs dim and expr");
        const int dim = j.at("dim").get<int>();
        const Expression expr = Expression::parse(j.at("expr").get<std::string>(), dim);
        obj.dimension = dim;
        obj.f = [expr](const Eigen::VectorXd& x) { return expr.eval(x); };
        return obj;  // gradient via finite differences
    }
    throw UsageError("objective.type: unknown type " + type);
}

ConstraintMap constraint_of(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    ConstraintMap con;
    if (type == "none") return con;
    if (type == "circle" || type == "sphere") {
        const Eigen::Index dim = type == "circle" ? 2 : j.value("dim", 3);
        const double radius = j.value("radius", 1.0);
        con.dimension = dim;
        con.count = 1;
        con.H = [radius](const Eigen::VectorXd& x) {
            Eigen::VectorXd h(1);
            h(0) = x.squaredNorm() - radius * radius;
            return h;
        };
        con.JH = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
            return 2.0 * x.transpose();
        };
        return con;
    }
    if (type == "affine") {
        if (!j.contains("A") || !j.contains("b"))
            throw UsageError("constraint: affine needs A and b");
        const Eigen::MatrixXd a = matrix_of(j.at("A"), "constraint.A");
        const Eigen::VectorXd b = vector_of(j.at("b"));
        if (b.size() != a.rows()) throw UsageError("constraint.b: length must match A's rows");
        con.dimension = a.cols();
        con.count = a.rows();
        con.H = [a, b](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x - b; };
        con.JH = [a](const Eigen::VectorXd&) -> Eigen::MatrixXd { return a; };
        return con;
    }
    throw UsageError("constraint.type: unknown type " + type);
}

// ---------------------------------------------------------------------------
// Artifact writers.
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& file, const std::vector<std::string>& header)
        : out_(file, std::ios::binary) {
        if (!out_) throw ResourceError("cannot open " + file.string() + " for writing");
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(values[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json_file(const fs::path& file, const json& j) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ResourceError("cannot open " + file.string() + " for writing");
    out << j.dump(2) << '\n';
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

json eigenvalues_to_json(const Eigen::VectorXcd& eig) {
    json out = json::array();
    for (Eigen::Index i = 0; i < eig.size(); ++i)
        out.push_back(json::array({eig(i).real(), eig(i).imag()}));
    return out;
}

// ---------------------------------------------------------------------------
// Run directory.
// ---------------------------------------------------------------------------

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ull;
    }
    return hash;
}

fs::path resolve_out_root(const json& config, const std::string& override_root) {
    if (!override_root.empty()) return override_root;
    if (const char* env = std::getenv("OUT_DIR"); env && *env) return env;
    if (config.contains("output_dir")) return config.at("output_dir").get<std::string>();
    return "runs";
}

fs::path make_run_dir(const fs::path& root, const std::string& kind, const json& config) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%012llx",
                  static_cast<unsigned long long>(fnv1a(config.dump()) & 0xffffffffffffull));

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);

    const std::string base = kind + "-" + hash + "-" + stamp;
    fs::create_directories(root);
    for (int suffix = 0; suffix < 10000; ++suffix) {
        fs::path candidate =
            root / (suffix == 0 ? base : base + "-" + std::to_string(suffix + 1));
        std::error_code ec;
        if (fs::create_directory(candidate, ec)) return candidate;
    }
    throw ResourceError("cannot create a fresh run directory under " + root.string());
}

// ---------------------------------------------------------------------------
// Kind runners.
// ---------------------------------------------------------------------------

std::vector<Permutation> generators_of(const json& group, const GenomeSpace& space) {
    std::vector<Permutation> gens;
    std::size_t i = 0;
    for (const json& g : group.at("generators")) {
        const std::string field = "group.generators[" + std::to_string(i++) + "]";
        const std::string type = g.at("type").get<std::string>();
        if (type == "rotation") {
            gens.push_back(rotation_permutation(space));
        } else if (type == "translation") {
            if (!g.contains("value")) throw UsageError(field + ".value: required");
            const auto v = g.at("value").get<std::uint64_t>();
            if (v >= space.size()) throw UsageError(field + ".value: outside the space");
            gens.push_back(translation_permutation(space, Genome(space, v)));
        } else {
            if (!g.contains("positions")) throw UsageError(field + ".positions: required");
            gens.push_back(
                digit_position_permutation(space, g.at("positions").get<std::vector<int>>()));
        }
    }
    return gens;
}

void run_orbits(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const GenomeSpace space = space_of(cfg.at("space"));
    const PermutationGroup group = close_group(generators_of(cfg.at("group"), space), space.size());
    const OrbitPartition partition = orbit_partition(group);

    json report;
    report["kind"] = "orbits";
    report["space"] = {{"d", space.d()}, {"l", space.l()}};
    report["degree"] = space.size();
    report["group_order"] = group.order();
    report["class_count"] = partition.size();
    report["classes"] = partition.classes;
    json counting = json::array();
    for (std::uint64_t z = 0; z < space.size(); ++z) {
        const auto orbit = orbit_of(group, z);
        const auto stab = stabilizer_of(group, z);
        counting.push_back({{"point", z},
                            {"orbit_size", orbit.size()},
                            {"stabilizer_order", stab.order()},
                            {"product", orbit.size() * stab.order()}});
    }
    report["orbit_stabilizer"] = counting;
    report["invariant_points"] = invariant_points(group);

    write_json_file(dir / "orbits.json", report);
    artifacts.push_back("orbits.json");
}

void run_schema(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const GenomeSpace space = space_of(cfg.at("space"));
    const auto mask_value = cfg.at("mask").get<std::uint64_t>();
    if (mask_value >= space.size()) throw UsageError("mask: outside the space");
    const Genome mask(space, mask_value);
    if (!mask.is_binary()) throw UsageError("mask: digits must all be 0 or 1");

    const EquivalenceRelation family = schema_family_from_mask(mask);

    // Cross-check: the classes are exactly the orbits of translation by
    // the complement's embedded subgroup.
    const Genome cobar = complement(mask);
    std::vector<Permutation> gens;
    for (int i = 0; i < space.l(); ++i)
        if (cobar.digit(i) != 0) {
            std::vector<int> digits(static_cast<std::size_t>(space.l()), 0);
            digits[static_cast<std::size_t>(i)] = 1;
            gens.push_back(translation_permutation(space, genome_from_digits(space, digits)));
        }
    const OrbitPartition translated = orbit_partition(close_group(gens, space.size()));

    json report;
    report["kind"] = "schema";
    report["space"] = {{"d", space.d()}, {"l", space.l()}};
    report["mask"] = mask_value;
    report["class_count"] = family.partition.size();
    report["classes"] = family.partition.classes;
    report["matches_translation_orbits"] = family.partition == translated;
    write_json_file(dir / "schema.json", report);
    artifacts.push_back("schema.json");
}

void run_coverage(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const GenomeSpace space = space_of(cfg.at("space"));
    int drop = -1;
    if (cfg.contains("drop")) {
        drop = cfg.at("drop").get<int>();
        if (drop >= space.l()) throw UsageError("drop: not a digit position of the space");
    }

    std::vector<EquivalenceRelation> family;
    json used = json::array();
    for (int i = 0; i < space.l(); ++i)
        if (i != drop) {
            family.push_back(digit_relation(space, i));
            used.push_back(i);
        }

    const CoverageResult cov = covers(family, space.size());
    const RepresentationImage image = chromosome_image(family, space.size());

    json report;
    report["kind"] = "coverage";
    report["space"] = {{"d", space.d()}, {"l", space.l()}};
    report["relations_used"] = used;
    report["covers"] = cov.covers;
    report["witness"] =
        cov.witness ? json::array({cov.witness->first, cov.witness->second}) : json();
    report["image_size"] = image.image_size();
    report["injective"] = image.image_size() == space.size();
    write_json_file(dir / "coverage.json", report);
    artifacts.push_back("coverage.json");
}

void run_mix(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const GenomeSpace space = space_of(cfg.at("space"));
    const json& operators = cfg.at("operators");
    const CrossoverSpec cx = crossover_of(operators);
    const double q = operators.at("q").get<double>();
    const ChildKernelD kernel(space, cx, q, order_of(operators));
    const MixingMatrix mm = mixing_matrix(kernel);
    const Eigen::VectorXd p = start_of(cfg.at("population"), space, "population");
    const Eigen::VectorXd mixed = mix(space, mm, p);

    const auto n = static_cast<Eigen::Index>(space.size());
    {
        std::vector<std::string> header{"u"};
        for (Eigen::Index v = 0; v < n; ++v) header.push_back(std::to_string(v));
        CsvWriter csv(dir / "mixing_matrix.csv", header);
        for (Eigen::Index u = 0; u < n; ++u) {
            std::vector<double> row{static_cast<double>(u)};
            for (Eigen::Index v = 0; v < n; ++v) row.push_back(mm.entries(u, v));
            csv.row(row);
        }
        artifacts.push_back("mixing_matrix.csv");
    }
    {
        CsvWriter csv(dir / "mixed.csv", {"genome", "probability"});
        for (Eigen::Index w = 0; w < n; ++w)
            csv.row({static_cast<double>(w), mixed(w)});
        artifacts.push_back("mixed.csv");
    }

    json report;
    report["kind"] = "mix";
    report["space"] = {{"d", space.d()}, {"l", space.l()}};
    report["mass"] = mixed.sum();
    if (space.size() <= 64) {
        std::vector<Permutation> gens;
        for (std::uint64_t v = 0; v < space.size(); ++v)
            gens.push_back(translation_permutation(space, Genome(space, v)));
        const PermutationGroup translations = close_group(gens, space.size());
        if (cfg.value("exact", false)) {
            const auto exact = exact_child_kernel(
                space, cx, rational_of(std::llround(q * 1000000.0), 1000000), kernel.order());
            const CommutationCheck check = commutes_with_action_exact(translations, exact);
            report["commutation"] = {{"mode", "rational"},
                                     {"commutes", check.commutes},
                                     {"max_deviation", check.max_deviation}};
        } else {
            const CommutationCheck check = commutes_with_action(
                translations,
                [&](std::uint64_t u, std::uint64_t v, std::uint64_t w) { return kernel.a(u, v, w); },
                1e-12);
            report["commutation"] = {{"mode", "double"},
                                     {"commutes", check.commutes},
                                     {"max_deviation", check.max_deviation}};
        }
    } else {
        report["commutation"] = {{"mode", "skipped: space larger than the exact-check bound"}};
    }
    write_json_file(dir / "mix_report.json", report);
    artifacts.push_back("mix_report.json");
}

void write_trajectory_csv(const fs::path& file, const Trajectory& traj, std::size_t record_every) {
    const auto n = traj.states.front().size();
    std::vector<std::string> header{"step"};
    for (Eigen::Index i = 0; i < n; ++i) header.push_back(std::to_string(i));
    CsvWriter csv(file, header);
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        if (t % record_every != 0 && t + 1 != traj.states.size()) continue;
        std::vector<double> row{static_cast<double>(t)};
        for (Eigen::Index i = 0; i < n; ++i) row.push_back(traj.states[t](i));
        csv.row(row);
    }
}

void run_evolve(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const GenomeSpace space = space_of(cfg.at("space"));
    const GenerationMap map = map_of(cfg, space);
    const Eigen::VectorXd p0 = start_of(cfg.at("start"), space, "start");
    const auto steps = cfg.at("steps").get<std::size_t>();
    const double tol = cfg.value("tol", 1e-10);
    const auto record_every = cfg.value("record_every", std::size_t{1});

    const Trajectory traj = iterate(map, p0, steps, tol);
    write_trajectory_csv(dir / "trajectory.csv", traj, record_every);
    artifacts.push_back("trajectory.csv");

    const FixedPointReport fp = find_fixed_point(map, traj.states.back());
    json report;
    report["kind"] = "evolve";
    report["stop"] = traj.stop == StopReason::converged ? "converged" : "max_steps";
    report["steps"] = traj.steps();
    report["terminal"] = vector_to_json(traj.states.back());
    report["fixed_point"] = {{"p", vector_to_json(fp.p_star)},
                             {"residual", fp.residual},
                             {"converged", fp.converged},
                             {"eigenvalues", eigenvalues_to_json(fp.eigenvalues)},
                             {"classification", stability_name(fp.classification)}};
    if (fp.converged) {
        const SpectrumReport spec = ea_map_spectrum(map, fp);
        report["fixed_point"]["convergence_rate"] = spec.second_modulus;
    }
    write_json_file(dir / "evolve_report.json", report);
    artifacts.push_back("evolve_report.json");
}

void run_sample(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const GenomeSpace space = space_of(cfg.at("space"));
    const GenerationMap map = map_of(cfg, space);
    const Eigen::VectorXd p0 = start_of(cfg.at("start"), space, "start");
    const auto steps = cfg.at("steps").get<std::size_t>();
    const auto mu = cfg.at("mu").get<std::uint64_t>();
    const auto seed_count = cfg.at("seeds").get<std::size_t>();
    const auto master = cfg.value("seed", std::uint64_t{0});

    std::vector<std::uint64_t> seeds(seed_count);
    for (std::size_t i = 0; i < seed_count; ++i) seeds[i] = master + i;

    const ModelVsSample stats = model_vs_sample(map, p0, mu, steps, seeds);
    {
        CsvWriter csv(dir / "sample.csv", {"generation", "median_linf", "max_linf"});
        for (std::size_t t = 0; t < steps; ++t)
            csv.row({static_cast<double>(t + 1), stats.median_linf[t], stats.max_linf[t]});
        artifacts.push_back("sample.csv");
    }
    json report;
    report["kind"] = "sample";
    report["mu"] = mu;
    report["seeds"] = seed_count;
    report["final_median_linf"] = stats.median_linf.back();
    report["final_max_linf"] = stats.max_linf.back();
    write_json_file(dir / "sample_report.json", report);
    artifacts.push_back("sample_report.json");
}

void run_flow(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const std::string flow = cfg.at("flow").get<std::string>();
    const IntegratorConfig ic = integrator_of(cfg);

    const auto need = [&](const char* key) -> const json& {
        if (!cfg.contains(key))
            throw UsageError(std::string(key) + ": required for flow " + flow);
        return cfg.at(key);
    };

    if (flow == "double_bracket") {
        MatrixFlowProblem problem;
        problem.A = matrix_of(need("A"), "A");
        problem.N = matrix_of(need("N"), "N");
        problem.integrator = ic;
        const DoubleBracketResult result = double_bracket_flow(problem);

        const Eigen::Index k = problem.A.rows();
        std::vector<std::string> header{"t"};
        for (Eigen::Index r = 0; r < k; ++r)
            for (Eigen::Index c = 0; c < k; ++c)
                header.push_back("h" + std::to_string(r) + "_" + std::to_string(c));
        CsvWriter csv(dir / "flow.csv", header);
        for (std::size_t i = 0; i < result.times.size(); ++i) {
            std::vector<double> row{result.times[i]};
            for (Eigen::Index r = 0; r < k; ++r)
                for (Eigen::Index c = 0; c < k; ++c) row.push_back(result.states[i](r, c));
            csv.row(row);
        }
        artifacts.push_back("flow.csv");

        json report;
        report["kind"] = "flow";
        report["flow"] = flow;
        report["converged"] = result.converged;
        report["terminal"] = matrix_to_json(result.terminal());
        report["max_spectrum_drift"] = result.max_spectrum_drift;
        report["terminal_offdiag"] = result.terminal_offdiag;
        write_json_file(dir / "flow_report.json", report);
        artifacts.push_back("flow_report.json");
        return;
    }

    if (flow == "exit") {
        const SmoothObjective obj = objective_of(need("objective"));
        const Eigen::VectorXd x_s = vector_of(need("x0"));
        const Eigen::VectorXd direction = vector_of(need("direction"));
        ConstraintMap con;
        const bool constrained =
            cfg.contains("constraint") && cfg.at("constraint").at("type") != "none";
        if (constrained) con = constraint_of(cfg.at("constraint"));
        const ExitReport exit = exit_point_search(obj, constrained ? &con : nullptr, x_s,
                                                  direction, ic);
        json report;
        report["kind"] = "flow";
        report["flow"] = flow;
        report["found"] = exit.found;
        report["note"] = exit.note;
        if (exit.found) {
            report["x_exit"] = vector_to_json(exit.x_exit);
            report["f_exit"] = exit.f_exit;
            report["t_exit"] = exit.t_exit;
        }
        write_json_file(dir / "exit_report.json", report);
        artifacts.push_back("exit_report.json");
        return;
    }

    const Eigen::VectorXd x0 = vector_of(need("x0"));
    json report;
    report["kind"] = "flow";
    report["flow"] = flow;

    if (flow == "gradient") {
        const SmoothObjective obj = objective_of(need("objective"));
        const GradientFlowResult result = gradient_flow(obj, x0, ic);
        std::vector<std::string> header{"t"};
        for (Eigen::Index i = 0; i < x0.size(); ++i) header.push_back("x" + std::to_string(i));
        header.push_back("f");
        CsvWriter csv(dir / "flow.csv", header);
        for (std::size_t i = 0; i < result.trajectory.times.size(); ++i) {
            std::vector<double> row{result.trajectory.times[i]};
            for (Eigen::Index j = 0; j < x0.size(); ++j)
                row.push_back(result.trajectory.states[i](j));
            row.push_back(obj.f(result.trajectory.states[i]));
            csv.row(row);
        }
        report["converged"] = result.trajectory.converged;
        report["terminal"] = vector_to_json(result.trajectory.terminal());
        report["classification"] = critical_kind_name(result.classification);
        report["hessian_eigenvalues"] = vector_to_json(result.hessian_eigenvalues);
        report["max_objective_increase"] = result.max_objective_increase;
    } else if (flow == "quotient") {
        const ConstraintMap con = constraint_of(need("constraint"));
        const QuotientFlowResult result = quotient_gradient_flow(con, x0, ic);
        std::vector<std::string> header{"t"};
        for (Eigen::Index i = 0; i < x0.size(); ++i) header.push_back("x" + std::to_string(i));
        header.push_back("half_h_sq");
        CsvWriter csv(dir / "flow.csv", header);
        for (std::size_t i = 0; i < result.trajectory.times.size(); ++i) {
            std::vector<double> row{result.trajectory.times[i]};
            for (Eigen::Index j = 0; j < x0.size(); ++j)
                row.push_back(result.trajectory.states[i](j));
            row.push_back(0.5 * con.H(result.trajectory.states[i]).squaredNorm());
            csv.row(row);
        }
        report["converged"] = result.trajectory.converged;
        report["terminal"] = vector_to_json(result.trajectory.terminal());
        report["max_halfsq_increase"] = result.max_halfsq_increase;
    } else if (flow == "projected") {
        const SmoothObjective obj = objective_of(need("objective"));
        const ConstraintMap con = constraint_of(need("constraint"));
        const ProjectedFlowResult result = projected_gradient_flow(obj, con, x0, ic);
        std::vector<std::string> header{"t"};
        for (Eigen::Index i = 0; i < x0.size(); ++i) header.push_back("x" + std::to_string(i));
        header.push_back("f");
        header.push_back("h_inf");
        CsvWriter csv(dir / "flow.csv", header);
        for (std::size_t i = 0; i < result.trajectory.times.size(); ++i) {
            std::vector<double> row{result.trajectory.times[i]};
            for (Eigen::Index j = 0; j < x0.size(); ++j)
                row.push_back(result.trajectory.states[i](j));
            row.push_back(obj.f(result.trajectory.states[i]));
            row.push_back(con.H(result.trajectory.states[i]).lpNorm<Eigen::Infinity>());
            csv.row(row);
        }
        report["converged"] = result.trajectory.converged;
        report["terminal"] = vector_to_json(result.trajectory.terminal());
        report["max_infeasibility"] = result.max_infeasibility;
    } else {
        throw UsageError("flow: unknown flow " + flow);
    }
    artifacts.push_back("flow.csv");
    write_json_file(dir / "flow_report.json", report);
    artifacts.push_back("flow_report.json");
}

void run_spectrum(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    const json& target = cfg.at("target");
    const std::string type = target.at("type").get<std::string>();

    SpectrumReport spec;
    json context;
    if (type == "matrix") {
        if (!target.contains("data")) throw UsageError("target.data: required for type matrix");
        spec = spectrum_of(matrix_of(target.at("data"), "target.data"));
        context["source"] = "matrix";
    } else if (type == "mutation_kernel") {
        if (!target.contains("space") || !target.contains("q"))
            throw UsageError("target: mutation_kernel needs space and q");
        const GenomeSpace space = space_of(target.at("space"));
        spec = spectrum_of(mutation_kernel_matrix(space, target.at("q").get<double>()));
        context["source"] = "mutation_kernel";
    } else {
        for (const char* key : {"space", "operators", "fitness", "start"})
            if (!target.contains(key))
                throw UsageError("target." + std::string(key) + ": required for type ea_map");
        const GenomeSpace space = space_of(target.at("space"));
        const GenerationMap map = map_of(target, space);
        const Eigen::VectorXd p0 = start_of(target.at("start"), space, "target.start");
        const FixedPointReport fp = find_fixed_point(map, p0);
        if (!fp.converged)
            throw NumericError("no fixed point found from the given start (residual " +
                               std::to_string(fp.residual) + ")");
        spec = ea_map_spectrum(map, fp);
        context["source"] = "ea_map";
        context["fixed_point"] = vector_to_json(fp.p_star);
        context["residual"] = fp.residual;
    }

    json report;
    report["kind"] = "spectrum";
    report["context"] = context;
    report["eigenvalues"] = eigenvalues_to_json(spec.eigenvalues);
    report["radius"] = spec.radius;
    report["second_modulus"] = spec.second_modulus;
    write_json_file(dir / "spectrum.json", report);
    artifacts.push_back("spectrum.json");

    CsvWriter csv(dir / "eigenvalues.csv", {"re", "im"});
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
        csv.row({spec.eigenvalues(i).real(), spec.eigenvalues(i).imag()});
    artifacts.push_back("eigenvalues.csv");
}

void run_jsr(const json& cfg, const fs::path& dir, std::vector<std::string>& artifacts) {
    std::vector<Eigen::MatrixXd> set;
    std::size_t i = 0;
    for (const json& m : cfg.at("matrices"))
        set.push_back(matrix_of(m, "matrices[" + std::to_string(i++) + "]"));
    const JsrBounds bounds = jsr_bounds(set, cfg.at("depth").get<int>());

    json report;
    report["kind"] = "jsr";
    report["lower"] = bounds.lower;
    report["upper"] = bounds.upper;
    report["lower_by_depth"] = bounds.lower_by_depth;
    report["upper_by_depth"] = bounds.upper_by_depth;
    report["upper_monotone"] = bounds.upper_monotone;
    write_json_file(dir / "jsr.json", report);
    artifacts.push_back("jsr.json");

    CsvWriter csv(dir / "jsr.csv", {"depth", "lower_at_depth", "upper_at_depth"});
    for (std::size_t j = 0; j < bounds.lower_by_depth.size(); ++j)
        csv.row({static_cast<double>(j + 1), bounds.lower_by_depth[j], bounds.upper_by_depth[j]});
    artifacts.push_back("jsr.csv");
}

RunResult run_validated(const json& config, const std::string& out_root_override) {
    const std::string kind = config.at("kind").get<std::string>();
    const fs::path root = resolve_out_root(config, out_root_override);
    const fs::path dir = make_run_dir(root, kind, config);

    RunResult result;
    result.run_dir = dir.string();
    write_json_file(dir / "config.json", config);
    result.artifacts.push_back("config.json");

    if (kind == "orbits") run_orbits(config, dir, result.artifacts);
    else if (kind == "schema") run_schema(config, dir, result.artifacts);
    else if (kind == "coverage") run_coverage(config, dir, result.artifacts);
    else if (kind == "mix") run_mix(config, dir, result.artifacts);
    else if (kind == "evolve") run_evolve(config, dir, result.artifacts);
    else if (kind == "sample") run_sample(config, dir, result.artifacts);
    else if (kind == "flow") run_flow(config, dir, result.artifacts);
    else if (kind == "spectrum") run_spectrum(config, dir, result.artifacts);
    else run_jsr(config, dir, result.artifacts);
    return result;
}

RunResult run_config_json(const json& config, const std::string& out_root_override) {
    if (!config.is_object()) throw UsageError("config: must be a JSON object");
    if (!config.contains("kind")) throw UsageError("kind: required key is missing");
    if (!config.at("kind").is_string()) throw UsageError("kind: must be a string");
    const std::string kind = config.at("kind").get<std::string>();
    const auto kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
        std::string known;
        for (const auto& k : kinds) known += (known.empty() ? "" : ", ") + k;
        throw UsageError("kind: unknown experiment '" + kind + "' (known: " + known + ")");
    }
    validate_schema(config, experiment_schema(kind), "");
    return run_validated(config, out_root_override);
}

} // namespace

// ---------------------------------------------------------------------------
// Public entry points.
// ---------------------------------------------------------------------------

std::vector<std::string> experiment_kinds() {
    return {"orbits", "schema", "coverage", "mix", "evolve", "sample", "flow", "spectrum", "jsr"};
}

std::string describe_kind(const std::string& kind) {
    const json schema = experiment_schema(kind);
    const json example = experiment_example(kind);
    std::ostringstream os;
    os << "kind: " << kind << "\n\nschema:\n"
       << schema.dump(2) << "\n\nexample config:\n"
       << example.dump(2) << '\n';
    return os.str();
}

RunResult run_experiment(const std::string& config_path) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw UsageError("cannot open config file " + config_path);
    json config;
    try {
        config = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config is not valid JSON: " + std::string(e.what()));
    }
    return run_config_json(config, "");
}

RunResult run_experiment_text(const std::string& config_json,
                              const std::string& out_root_override) {
    json config;
    try {
        config = json::parse(config_json);
    } catch (const json::parse_error& e) {
        throw UsageError("config is not valid JSON: " + std::string(e.what()));
    }
    return run_config_json(config, out_root_override);
}

// ---------------------------------------------------------------------------
// Built-in oracle suite.
// ---------------------------------------------------------------------------

bool run_verify(std::ostream& os, const std::string& inject_fault) {
    struct Check {
        const char* name;
        std::function<bool()> run;
    };

    const std::vector<Check> checks{
        {"digit-arithmetic", [] {
             const GenomeSpace b3(2, 3);
             const Genome g5(b3, 5), g3(b3, 3);
             bool ok = ring_add(g5, g3).value() == 6;
             ok = ok && ring_mul(g5, g3).value() == 1;
             ok = ok && complement(g5).value() == 2;
             ok = ok && embed(g5, 3).value() == 5 && embed(g5, 2).value() == 4;
             const auto [head, tail] = binary_decompose(Genome(b3, 6), g5);
             ok = ok && head.value() == 4 && tail.value() == 2;
             const GenomeSpace t2(3, 2);
             ok = ok && ring_add(Genome(t2, 5), Genome(t2, 4)).value() == 6;
             ok = ok && ring_mul(Genome(t2, 5), Genome(t2, 4)).value() == 5;
             ok = ok && ring_sub(Genome(t2, 6), Genome(t2, 4)).value() == 5;
             ok = ok && negate(Genome(GenomeSpace(3, 1), 1)).value() == 2;
             return ok;
         }},
        {"mix-triple-sum", [] {
             const GenomeSpace space(2, 2);
             const ChildKernelD kernel(space, {CrossoverKind::uniform}, 0.1);
             const MixingMatrix mm = mixing_matrix(kernel);
             RandomSource rng(7);
             for (int trial = 0; trial < 5; ++trial) {
                 Eigen::VectorXd p(4);
                 for (int i = 0; i < 4; ++i) p(i) = rng.uniform01() + 1e-3;
                 p /= p.sum();
                 const Eigen::VectorXd fast = mix(space, mm, p);
                 for (std::uint64_t w = 0; w < 4; ++w) {
                     double direct = 0.0;
                     for (std::uint64_t u = 0; u < 4; ++u)
                         for (std::uint64_t v = 0; v < 4; ++v)
                             direct += p(static_cast<Eigen::Index>(u)) *
                                       p(static_cast<Eigen::Index>(v)) * kernel.a(u, v, w);
                     if (std::abs(direct - fast(static_cast<Eigen::Index>(w))) > 1e-12)
                         return false;
                 }
             }
             return true;
         }},
        {"eigen", [] {
             const SpectrumReport spec =
                 spectrum_of(mutation_kernel_matrix(GenomeSpace(2, 1), 0.05));
             if (std::abs(spec.radius - 1.0) > 1e-12) return false;
             if (std::abs(spec.second_modulus - 0.9) > 1e-12) return false;

             MatrixFlowProblem problem;
             problem.A = Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}};
             problem.N = Eigen::MatrixXd{{1.0, 0.0}, {0.0, 2.0}};
             problem.integrator.max_time = 40.0;
             const DoubleBracketResult db = double_bracket_flow(problem);
             return db.converged && std::abs(db.terminal()(0, 0) + 1.0) < 1e-6 &&
                    std::abs(db.terminal()(1, 1) - 1.0) < 1e-6;
         }},
    };

    bool all_ok = true;
    for (const Check& check : checks) {
        bool ok = false;
        std::string note;
        if (check.name == inject_fault) {
            ok = false;
            note = " (injected fault)";
        } else {
            try {
                ok = check.run();
            } catch (const std::exception& e) {
                ok = false;
                note = std::string(" (") + e.what() + ")";
            }
        }
        os << check.name << ": " << (ok ? "pass" : "FAIL") << note << '\n';
        all_ok = all_ok && ok;
    }
    return all_ok;
}

} // namespace evoflow

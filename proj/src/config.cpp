// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/config.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include <json.hpp>

#include "pnlab/errors.hpp"
#include "pnlab/io.hpp"

namespace pnlab::config {

using nlohmann::json;

namespace {

enum class Kind { number, integer, boolean, text, optional_number };

struct Key {
    const char* name;
    Kind kind;
    std::function<json(const RunConfig&)> get;
    std::function<void(RunConfig&, const json&)> set;
};

template <class T>
Key number_key(const char* name, T RunConfig::*member) {
    return {name, Kind::number, [member](const RunConfig& c) { return json(c.*member); },
            [member](RunConfig& c, const json& v) { c.*member = v.get<double>(); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"domain.kind", Kind::text, [](const RunConfig& c) { return json(geometry::to_string(c.domain.kind)); },
         [](RunConfig& c, const json& v) { c.domain.kind = geometry::domain_kind_from_string(v.get<std::string>()); }},
        {"domain.a", Kind::number, [](const RunConfig& c) { return json(c.domain.a); },
         [](RunConfig& c, const json& v) { c.domain.a = v.get<double>(); }},
        {"domain.b", Kind::number, [](const RunConfig& c) { return json(c.domain.b); },
         [](RunConfig& c, const json& v) { c.domain.b = v.get<double>(); }},
        {"domain.center_x", Kind::number, [](const RunConfig& c) { return json(c.domain.center.x); },
         [](RunConfig& c, const json& v) { c.domain.center.x = v.get<double>(); }},
        {"domain.center_y", Kind::number, [](const RunConfig& c) { return json(c.domain.center.y); },
         [](RunConfig& c, const json& v) { c.domain.center.y = v.get<double>(); }},
        number_key("problem.p", &RunConfig::p),
        {"problem.n", Kind::integer, [](const RunConfig& c) { return json(c.n); },
         [](RunConfig& c, const json& v) { c.n = v.get<int>(); }},
        number_key("problem.f", &RunConfig::f),
        number_key("problem.g", &RunConfig::g),
        {"problem.c", Kind::optional_number,
         [](const RunConfig& c) { return c.expected_c ? json(*c.expected_c) : json(nullptr); },
         [](RunConfig& c, const json& v) {
             if (v.is_null()) c.expected_c.reset();
             else c.expected_c = v.get<double>();
         }},
        number_key("grid.h", &RunConfig::h),
        {"solver.epsilon_over_h", Kind::number, [](const RunConfig& c) { return json(c.solver.epsilon_over_h); },
         [](RunConfig& c, const json& v) { c.solver.epsilon_over_h = v.get<double>(); }},
        {"solver.directions", Kind::integer, [](const RunConfig& c) { return json(c.solver.directions); },
         [](RunConfig& c, const json& v) { c.solver.directions = v.get<int>(); }},
        {"solver.damping", Kind::number, [](const RunConfig& c) { return json(c.solver.damping); },
         [](RunConfig& c, const json& v) { c.solver.damping = v.get<double>(); }},
        {"solver.tolerance", Kind::number, [](const RunConfig& c) { return json(c.solver.tolerance); },
         [](RunConfig& c, const json& v) { c.solver.tolerance = v.get<double>(); }},
        {"solver.max_iterations", Kind::integer, [](const RunConfig& c) { return json(c.solver.max_iterations); },
         [](RunConfig& c, const json& v) { c.solver.max_iterations = v.get<int>(); }},
        {"solver.scheme", Kind::text, [](const RunConfig& c) { return json(solver::to_string(c.solver.scheme)); },
         [](RunConfig& c, const json& v) { c.solver.scheme = solver::scheme_from_string(v.get<std::string>()); }},
        {"solver.boundary_rule", Kind::text,
         [](const RunConfig& c) { return json(solver::to_string(c.solver.boundary_rule)); },
         [](RunConfig& c, const json& v) { c.solver.boundary_rule = solver::boundary_rule_from_string(v.get<std::string>()); }},
        {"solver.moment_matched_mean", Kind::boolean, [](const RunConfig& c) { return json(c.solver.moment_matched_mean); },
         [](RunConfig& c, const json& v) { c.solver.moment_matched_mean = v.get<bool>(); }},
        {"solver.nested_levels", Kind::integer, [](const RunConfig& c) { return json(c.solver.nested_levels); },
         [](RunConfig& c, const json& v) { c.solver.nested_levels = v.get<int>(); }},
        {"solver.inner_sweeps", Kind::integer, [](const RunConfig& c) { return json(c.solver.inner_sweeps); },
         [](RunConfig& c, const json& v) { c.solver.inner_sweeps = v.get<int>(); }},
        {"solver.jacobi_damping", Kind::number, [](const RunConfig& c) { return json(c.solver.jacobi_damping); },
         [](RunConfig& c, const json& v) { c.solver.jacobi_damping = v.get<double>(); }},
        {"solver.grad_floor", Kind::number, [](const RunConfig& c) { return json(c.solver.grad_floor); },
         [](RunConfig& c, const json& v) { c.solver.grad_floor = v.get<double>(); }},
        {"diagnostics.symmetry", Kind::boolean, [](const RunConfig& c) { return json(c.diagnostics.symmetry); },
         [](RunConfig& c, const json& v) { c.diagnostics.symmetry = v.get<bool>(); }},
        {"diagnostics.viscosity", Kind::boolean, [](const RunConfig& c) { return json(c.diagnostics.viscosity); },
         [](RunConfig& c, const json& v) { c.diagnostics.viscosity = v.get<bool>(); }},
        {"diagnostics.pucci", Kind::boolean, [](const RunConfig& c) { return json(c.diagnostics.pucci); },
         [](RunConfig& c, const json& v) { c.diagnostics.pucci = v.get<bool>(); }},
        {"diagnostics.boundary_identity", Kind::boolean,
         [](const RunConfig& c) { return json(c.diagnostics.boundary_identity); },
         [](RunConfig& c, const json& v) { c.diagnostics.boundary_identity = v.get<bool>(); }},
        {"diagnostics.moving_plane", Kind::boolean, [](const RunConfig& c) { return json(c.diagnostics.moving_plane); },
         [](RunConfig& c, const json& v) { c.diagnostics.moving_plane = v.get<bool>(); }},
        {"diagnostics.p_function", Kind::boolean, [](const RunConfig& c) { return json(c.diagnostics.p_function); },
         [](RunConfig& c, const json& v) { c.diagnostics.p_function = v.get<bool>(); }},
        {"diagnostics.samples", Kind::integer, [](const RunConfig& c) { return json(c.diagnostics.samples); },
         [](RunConfig& c, const json& v) { c.diagnostics.samples = v.get<int>(); }},
        {"diagnostics.probe_spacing_h", Kind::number, [](const RunConfig& c) { return json(c.diagnostics.probe_spacing_h); },
         [](RunConfig& c, const json& v) { c.diagnostics.probe_spacing_h = v.get<double>(); }},
        {"diagnostics.assert_ball", Kind::boolean, [](const RunConfig& c) { return json(c.diagnostics.assert_ball); },
         [](RunConfig& c, const json& v) { c.diagnostics.assert_ball = v.get<bool>(); }},
        {"diagnostics.ball_threshold", Kind::number, [](const RunConfig& c) { return json(c.diagnostics.ball_threshold); },
         [](RunConfig& c, const json& v) { c.diagnostics.ball_threshold = v.get<double>(); }},
        {"diagnostics.identity_threshold", Kind::number,
         [](const RunConfig& c) { return json(c.diagnostics.identity_threshold); },
         [](RunConfig& c, const json& v) { c.diagnostics.identity_threshold = v.get<double>(); }},
        {"diagnostics.pucci_fraction", Kind::number, [](const RunConfig& c) { return json(c.diagnostics.pucci_fraction); },
         [](RunConfig& c, const json& v) { c.diagnostics.pucci_fraction = v.get<double>(); }},
        {"output.dir", Kind::text, [](const RunConfig& c) { return json(c.output_dir); },
         [](RunConfig& c, const json& v) { c.output_dir = v.get<std::string>(); }},
    };
    return table;
}

int line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    int line = 1;
    for (std::size_t i = 0; i < offset; ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// Line of the n-th occurrence (0-based) of "key" used as an object key.
int line_of_key(const std::string& text, const std::string& key, int nth = 0) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t pos = 0;
    for (int k = 0;; ++k) {
        pos = text.find(quoted, pos);
        if (pos == std::string::npos) return 0;
        if (k == nth) return line_of_offset(text, pos);
        pos += quoted.size();
    }
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

bool kind_matches(Kind kind, const json& v) {
    switch (kind) {
        case Kind::number: return v.is_number();
        case Kind::integer: return v.is_number_integer();
        case Kind::boolean: return v.is_boolean();
        case Kind::text: return v.is_string();
        case Kind::optional_number: return v.is_number() || v.is_null();
    }
    return false;
}

const char* kind_name(Kind kind) {
    switch (kind) {
        case Kind::number: return "a number";
        case Kind::integer: return "an integer";
        case Kind::boolean: return "true or false";
        case Kind::text: return "a string";
        case Kind::optional_number: return "a number or null";
    }
    return "?";
}

// Range check of one field; returns an error message or "".
std::string check(const RunConfig& c, const std::string& key) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (key == "problem.p" && !(std::isfinite(c.p) && c.p > 1.0)) return "problem.p must be a finite number > 1";
    if (key == "problem.n" && c.n != 2) return "problem.n must be 2 (the grid solver is planar)";
    if (key == "problem.f" && !std::isfinite(c.f)) return "problem.f must be finite";
    if (key == "problem.g" && !std::isfinite(c.g)) return "problem.g must be finite";
    if (key == "grid.h" && !(positive(c.h) && c.h <= 0.25)) return "grid.h must lie in (0, 0.25]";
    if (key == "solver.epsilon_over_h" && !(c.solver.epsilon_over_h >= 2.0 && c.solver.epsilon_over_h <= 10.0))
        return "solver.epsilon_over_h must lie in [2, 10]";
    if (key == "solver.directions" && !(c.solver.directions >= 8 && c.solver.directions <= 4096))
        return "solver.directions must lie in [8, 4096]";
    if (key == "solver.damping" && !(c.solver.damping >= 0.0 && c.solver.damping <= 1.0))
        return "solver.damping must lie in [0, 1] (0 selects the default)";
    if (key == "solver.tolerance" && !positive(c.solver.tolerance)) return "solver.tolerance must be > 0";
    if (key == "solver.max_iterations" && c.solver.max_iterations < 1) return "solver.max_iterations must be >= 1";
    if (key == "solver.nested_levels" && !(c.solver.nested_levels >= 0 && c.solver.nested_levels <= 6))
        return "solver.nested_levels must lie in [0, 6]";
    if (key == "solver.inner_sweeps" && c.solver.inner_sweeps < 1) return "solver.inner_sweeps must be >= 1";
    if (key == "solver.jacobi_damping" && !(c.solver.jacobi_damping > 0.0 && c.solver.jacobi_damping <= 1.0))
        return "solver.jacobi_damping must lie in (0, 1]";
    if (key == "solver.grad_floor" && !(c.solver.grad_floor >= 0.0)) return "solver.grad_floor must be >= 0";
    if (key == "diagnostics.samples" && !(c.diagnostics.samples >= 8)) return "diagnostics.samples must be >= 8";
    if (key == "diagnostics.probe_spacing_h" && !(c.diagnostics.probe_spacing_h >= 0.5 && c.diagnostics.probe_spacing_h <= 8.0))
        return "diagnostics.probe_spacing_h must lie in [0.5, 8]";
    if (key == "diagnostics.ball_threshold" && !positive(c.diagnostics.ball_threshold))
        return "diagnostics.ball_threshold must be > 0";
    if (key == "diagnostics.identity_threshold" && !positive(c.diagnostics.identity_threshold))
        return "diagnostics.identity_threshold must be > 0";
    if (key == "diagnostics.pucci_fraction" && !(c.diagnostics.pucci_fraction >= 0.0 && c.diagnostics.pucci_fraction <= 1.0))
        return "diagnostics.pucci_fraction must lie in [0, 1]";
    if (key == "output.dir" && c.output_dir.empty()) return "output.dir must not be empty";
    if (key.rfind("domain.", 0) == 0) {
        try {
            c.domain.validate();
        } catch (const Error& e) {
            return e.what();
        }
    }
    return "";
}

}  // namespace

solver::ProblemSpec RunConfig::problem() const {
    solver::ProblemSpec pr;
    pr.params = {p, n};
    pr.rhs = f;
    pr.dirichlet_constant = g;
    pr.neumann_target = expected_c;
    return pr;
}

void validate(const RunConfig& c) {
    for (const auto& k : keys()) {
        const std::string msg = check(c, k.name);
        if (!msg.empty()) throw ConfigError(msg);
    }
}

RunConfig parse(const std::string& text, const std::string& source) {
    std::set<std::string> seen;
    std::string duplicate;
    json j;
    try {
        j = json::parse(text, [&](int depth, json::parse_event_t event, json& parsed) {
            if (event == json::parse_event_t::key && depth == 1) {
                const auto name = parsed.get<std::string>();
                if (!seen.insert(name).second && duplicate.empty()) duplicate = name;
            }
            return true;
        });
    } catch (const json::parse_error& e) {
        fail(source, line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON (" + std::string(e.what()) + ")");
    }
    if (!j.is_object()) fail(source, 1, "top level must be a JSON object");
    if (!duplicate.empty()) fail(source, line_of_key(text, duplicate, 1), "duplicate key \"" + duplicate + "\"");

    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& name = it.key();
        const int line = line_of_key(text, name);
        const Key* key = nullptr;
        for (const auto& k : keys())
            if (name == k.name) key = &k;
        if (!key) fail(source, line, "unknown key \"" + name + "\"");
        if (it->is_object() || it->is_array()) fail(source, line, "\"" + name + "\" must be a scalar (keys are flat and dotted)");
        if (!kind_matches(key->kind, *it)) fail(source, line, "\"" + name + "\" must be " + kind_name(key->kind));
        try {
            key->set(c, *it);
        } catch (const Error& e) {
            fail(source, line, e.what());
        }
    }
    for (const auto& k : keys()) {
        const std::string msg = check(c, k.name);
        if (msg.empty()) continue;
        // Domain errors may involve several keys; anchor them at the first one present.
        int line = line_of_key(text, k.name);
        if (line == 0 && std::string(k.name).rfind("domain.", 0) == 0) line = line_of_key(text, "domain.kind");
        fail(source, line == 0 ? 1 : line, msg);
    }
    return c;
}

RunConfig load(const std::string& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse(text, path);
}

std::string serialize(const RunConfig& c) {
    std::string out = "{\n";
    const auto& table = keys();
    for (std::size_t k = 0; k < table.size(); ++k) {
        out += "  " + json(table[k].name).dump() + ": " + table[k].get(c).dump();
        out += k + 1 < table.size() ? ",\n" : "\n";
    }
    out += "}\n";
    return out;
}

}  // namespace pnlab::config

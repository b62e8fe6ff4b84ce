// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end experiments behind `pnlab reproduce` and the acceptance binary.
// Each experiment returns a table of named checks with their thresholds.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnlab/geometry.hpp"
#include "pnlab/solver.hpp"

namespace pnlab::experiments {

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  // "<", "<=", ">", ">=", "=="
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

struct Result {
    std::string name;
    std::vector<Check> checks;
    double seconds = 0.0;

    bool passed() const;
    /// Adds a check and evaluates it.
    Check& check(std::string name, double value, std::string relation, double threshold, std::string note = "");
    /// Informational row, always passing.
    void info(std::string name, double value, std::string note = "");
    std::string table() const;
    nlohmann::json to_json() const;
};

/// Solver settings used by the experiments.
struct Settings {
    double accurate_tolerance = 5e-10;  // convergence-order runs
    double symmetry_tolerance = 1e-8;   // boundary-derivative runs
    int nested_levels = 2;
    std::uint64_t seed = 2026;
    std::ostream* log = nullptr;        // progress lines, optional
};

/// Shares solved fields between experiments.
class Context {
public:
    explicit Context(Settings settings = {});

    const Settings& settings() const { return settings_; }
    const solver::Solution& solve(const geometry::DomainSpec& domain, double p, double h, double tolerance);
    void log(const std::string& line) const;

private:
    Settings settings_;
    std::map<std::string, std::unique_ptr<solver::Solution>> cache_;
};

Result radial_convergence(Context& ctx);
Result center_value(Context& ctx);
Result hopf(Context& ctx);
Result envelope_table(Context& ctx);
Result pucci_sandwich(Context& ctx);
Result symmetry_family(Context& ctx);
Result annulus_infinity(Context& ctx);
Result comparison(Context& ctx);
Result moving_plane(Context& ctx);
Result boundary_identity(Context& ctx);

struct Experiment {
    std::string name;
    int criterion;
    std::string summary;
    std::function<Result(Context&)> run;
};

/// All experiments ordered by criterion number.
const std::vector<Experiment>& registry();
const Experiment* find(const std::string& name);

/// Fixed (p, X) sample for the envelope table: half with p < 2, half with p >= 2.
struct EnvelopeRow {
    double p = 2.0;
    double xx = 0.0, xy = 0.0, yy = 0.0;
    double lower = 0.0, upper = 0.0;            // closed form
    double sampled_lower = 0.0, sampled_upper = 0.0;  // 720 directions
    double refined_lower = 0.0, refined_upper = 0.0;  // 720 directions + polish
};

std::vector<EnvelopeRow> envelope_rows(int count, std::uint64_t seed);

}  // namespace pnlab::experiments

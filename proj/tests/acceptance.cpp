// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Runs every experiment once and prints one PASS/FAIL line per criterion.
// Full tables go to stderr. Exit status 0 only when all criteria pass.
#include <cstdio>
#include <iostream>

#include "pnlab/experiments.hpp"

int main() {
    using namespace pnlab::experiments;
    Settings settings;
    settings.log = &std::cerr;
    Context ctx(settings);
    int failed = 0;
    std::vector<std::string> lines;
    for (const auto& e : registry()) {
        const Result r = e.run(ctx);
        std::cerr << "== " << e.name << "\n" << r.table() << "\n";
        const Check* shown = nullptr;
        for (const auto& c : r.checks)
            if (!c.relation.empty() && !c.pass) {
                shown = &c;
                break;
            }
        char buf[512];
        if (shown) {
            std::snprintf(buf, sizeof buf, "criterion %2d %-20s FAIL  %s = %.6g (needs %s %.6g)  %.1f s", e.criterion,
                          e.name.c_str(), shown->name.c_str(), shown->value, shown->relation.c_str(), shown->threshold,
                          r.seconds);
        } else {
            std::size_t n = 0;
            for (const auto& c : r.checks) n += !c.relation.empty();
            std::snprintf(buf, sizeof buf, "criterion %2d %-20s PASS  %zu checks  %.1f s", e.criterion, e.name.c_str(), n,
                          r.seconds);
        }
        failed += shown != nullptr;
        std::printf("%s\n", buf);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(registry().size()) - failed, registry().size());
    return failed == 0 ? 0 : 1;
}

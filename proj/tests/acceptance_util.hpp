#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

// One acceptance criterion: collects named checks, prints a single
// "[criterion NN] PASS|FAIL" line with the runtime, and hands the verdict to
// doctest so ctest goes red on failure.
struct Criterion {
    int id;
    std::string name;
    bool ok = true;
    std::vector<std::string> failures;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Criterion(int id_, std::string name_) : id(id_), name(std::move(name_)) {}

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            failures.push_back(what);
        }
    }

    // prints the verdict line; returns ok so the caller can CHECK it
    bool finish() const {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[criterion %02d] %s — %s (%.1f s)\n", id, ok ? "PASS" : "FAIL", name.c_str(),
                    seconds);
        for (const auto& f : failures) std::printf("    failed: %s\n", f.c_str());
        std::fflush(stdout);
        return ok;
    }
};

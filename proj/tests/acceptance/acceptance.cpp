// One line per acceptance criterion; exit status is the number of failures.
#include <cstdlib>
#include <iostream>
#include <string>

#include "tsa/harness/checks.hpp"

int main(int argc, char** argv) {
    std::uint64_t seed = 20240611;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--seed" && i + 1 < argc) seed = std::strtoull(argv[++i], nullptr, 10);
        else if (a == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    int failures = 0;
    for (int id = 1; id <= tsa::harness::kCriteria; ++id) {
        if (only && id != only) continue;
        tsa::harness::Check c;
        try {
            c = tsa::harness::run_criterion(id, seed);
        } catch (const std::exception& e) {
            c.id = id;
            c.name = "error";
            c.detail = e.what();
        }
        failures += !c.pass;
        std::cout << tsa::harness::format_check(c) << std::endl;
    }
    return failures;
}

// One line per acceptance criterion; exit status 1 if any fails.

#include <hstv/acceptance.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv)
{
    hstv::AcceptanceOptions options;
    if (argc > 1)
        options.seed = std::stoull(argv[1]);
    int failed = 0;
    for (int id = 1; id <= hstv::kCriterionCount; ++id) {
        const auto r = hstv::run_criterion(id, options);
        std::printf("%s\n", hstv::format_result(r).c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d/%d criteria passed\n", hstv::kCriterionCount - failed, hstv::kCriterionCount);
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

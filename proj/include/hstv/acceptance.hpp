#pragma once

// The acceptance criteria as runnable checks, shared by the acceptance test
// binary and the `selftest` subcommand.

#include <cstdint>
#include <string>
#include <vector>

namespace hstv {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
};

constexpr int kCriterionCount = 7;

/// Runs criterion `id` in 1..7. Exceptions inside a criterion count as a
/// failure with the message as detail.
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// "PASS [3] title: detail (1.23 s)"
std::string format_result(const CriterionResult& r);

} // namespace hstv

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qnet {

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct ValidationOptions {
    /// Step of the fixed-step checks; enlarge it to see them fail.
    double dt = 1e-3;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    /// Hopping convention picked by matching the computed spectrum and steady state.
    std::string selected_convention;
    bool all_passed() const;
};

/// Oracle-vs-numerics suite at the reference parameter sets plus the
/// Hamiltonian convention calibration.
ValidationReport run_validation(const ValidationOptions& options = {});

void print_report(std::ostream& os, const ValidationReport& report);

}  // namespace qnet

#pragma once

#include <string>
#include <vector>

#include "msdflow/matrices.hpp"

namespace msdflow {

struct IdentityCheck {
    std::string name;
    bool passed = false;
    std::string detail;  // empty on success, first failing entry otherwise
};

struct IdentityReport {
    unsigned order = 0;
    std::vector<IdentityCheck> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

// Verifies, in exact rational arithmetic, every closed-form identity of the
// cost-matrix family at order n. The t-dependent identities are evaluated at
// the exact rational samples t in {1, 1/2, 3}; all comparisons demand literal
// equality, never a tolerance. With corrupt_for_selftest set, one entry of M
// is perturbed first so a caller can confirm the suite actually detects
// breakage.
IdentityReport identity_suite(unsigned n, bool corrupt_for_selftest = false);

}  // namespace msdflow

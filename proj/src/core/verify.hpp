#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/spec_io.hpp"

// Property suite run against one channel: trace preservation, positivity,
// agreement of the two markov constructions, memory continuity, and the
// entropy continuity bound on sampled state pairs.

namespace qmc {

struct VerifyCheck {
    std::string name;
    bool applicable = true;  // false when the channel shape rules the check out
    bool passed = false;
    double worst = 0;  // largest measured deviation; passing means worst <= tolerance
    double tolerance = 0;
    int samples = 0;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool ok = true;  // every applicable check passed
};

VerifyReport run_verify(const ParsedChannel& chan, std::uint64_t seed);

}  // namespace qmc

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace arborwalk::cli {

// Exit codes: 0 success, 1 usage error, 2 check failure, 3 budget exceeded.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class Verdict { transient_like, recurrent_like, undecided };

struct VerdictRule {
    double escape_threshold = 0.02;
    double slope_threshold = -0.001; // slope of estimate against depth
};

// Classified from the escape-probability profile over increasing depths.
// Transience additionally requires a certified cookie cap when one applies.
Verdict classify_escape_profile(std::span<const int> depths, std::span<const double> estimates,
                                std::span<const double> ci_lo, const VerdictRule& rule,
                                bool cap_known = true);

const char* verdict_name(Verdict v);

} // namespace arborwalk::cli

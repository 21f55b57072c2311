#include "arborwalk/mdrw.hpp"

#include <cmath>

namespace arborwalk::mdrw {

HittingReport verify_hitting_identity(int path_length, double lambda, int m, std::size_t trials,
                                      std::uint64_t seed) {
    if (path_length < 1) throw std::invalid_argument("verify_hitting_identity: path length must be >= 1");
    const auto t = tree::RootedTree::path(path_length);
    const auto cfg = CookieConfig::homogeneous(lambda, m);

    HittingReport r;
    r.trials = trials;
    r.expected = big_psi_homogeneous(path_length, lambda, m);

    std::size_t hits = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        auto s = rng::stream(seed, rng::Domain::walk_trial, {static_cast<std::uint64_t>(k)});
        hits += run_mdrw_trial(t, cfg, path_length, s).outcome == Outcome::escaped;
    }
    r.estimate = static_cast<double>(hits) / static_cast<double>(trials);
    const double se = std::sqrt(std::max(r.expected * (1.0 - r.expected), 1e-12) /
                                static_cast<double>(trials));
    r.z = (r.estimate - r.expected) / se;
    r.pass = std::abs(r.z) <= 3.0;
    return r;
}

} // namespace arborwalk::mdrw

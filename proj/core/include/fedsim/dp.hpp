#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct PrivacyBudget {
    double epsilon;  // > 0
};

// Laplace scale b = 2 * D_max * T / (n_k * epsilon) plus its inputs.
struct LaplaceNoiseSpec {
    double scale_b;
    double d_max;
    int rounds;
    int n_k;
    double epsilon;
};

LaplaceNoiseSpec laplace_scale(double d_max, int rounds, int n_k, PrivacyBudget eps);

// n independent zero-location Laplace(b) draws; b = 0 yields all zeros.
std::vector<double> sample_laplace(double b, int n, RngStream& rng);

// w plus elementwise i.i.d. Laplace(0, spec.scale_b) noise.
ParamVector perturb_update(const ParamVector& w, const LaplaceNoiseSpec& spec, RngStream& rng);

struct EpsilonSearchResult {
    PrivacyBudget budget;
    bool warning = false;  // set when even the list head fails the rate check
};

// Runs `trial` per candidate, head (largest) first. A candidate preserves
// convergence iff for every t in 2..T the per-round relative loss decrease
// (l_{t-1} - l_t) / l_1 is at least 0.8 * (r(t-1) - r(t)) with r(t) = 1/t or
// 1/sqrt(t). Walks down the candidate list until a candidate fails and
// returns the last passing one; if the head itself fails it is returned
// with the warning flag set.
EpsilonSearchResult epsilon_search(std::span<const double> candidates,
                                   const std::function<std::vector<double>(double)>& trial,
                                   RateClass rate_class);

// The candidate budgets evaluated in the privacy/utility trade-off, in
// descending order.
inline constexpr double kEpsilonCandidates[] = {10.0, 8.0, 5.0, 2.0, 1.0, 0.5, 0.3, 0.1};

}  // namespace fedsim

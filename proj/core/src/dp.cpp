#include "fedsim/dp.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim {

namespace {

double rate(RateClass rc, int t) {
    return rc == RateClass::kInverseT ? 1.0 / t : 1.0 / std::sqrt(static_cast<double>(t));
}

bool preserves_convergence(const std::vector<double>& losses, RateClass rc) {
    const int T = static_cast<int>(losses.size());
    if (T < 2) return true;
    const double l1 = losses[0];
    for (int t = 2; t <= T; ++t) {
        double decrease = (losses[t - 2] - losses[t - 1]) / l1;
        if (decrease < 0.8 * (rate(rc, t - 1) - rate(rc, t))) return false;
    }
    return true;
}

}  // namespace

LaplaceNoiseSpec laplace_scale(double d_max, int rounds, int n_k, PrivacyBudget eps) {
    if (d_max < 0.0) throw std::invalid_argument("D_max must be >= 0");
    if (rounds < 1) throw std::invalid_argument("T must be >= 1");
    if (n_k < 1) throw std::invalid_argument("n_k must be >= 1");
    if (eps.epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
    return {2.0 * d_max * rounds / (n_k * eps.epsilon), d_max, rounds, n_k, eps.epsilon};
}

std::vector<double> sample_laplace(double b, int n, RngStream& rng) {
    if (b < 0.0) throw std::invalid_argument("scale must be >= 0");
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = rng.laplace(b);
    return out;
}

ParamVector perturb_update(const ParamVector& w, const LaplaceNoiseSpec& spec, RngStream& rng) {
    if (w.size() < 1) throw std::invalid_argument("empty parameter vector");
    if (!w.allFinite()) throw std::invalid_argument("non-finite parameter vector");
    ParamVector out = w;
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += rng.laplace(spec.scale_b);
    return out;
}

EpsilonSearchResult epsilon_search(std::span<const double> candidates,
                                   const std::function<std::vector<double>(double)>& trial,
                                   RateClass rate_class) {
    if (candidates.empty()) throw std::invalid_argument("empty candidate list");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i] <= 0.0) throw std::invalid_argument("candidates must be > 0");
        if (i > 0 && candidates[i] >= candidates[i - 1]) {
            throw std::invalid_argument("candidates must be strictly descending");
        }
    }
    if (!preserves_convergence(trial(candidates[0]), rate_class)) {
        return {{candidates[0]}, true};
    }
    double best = candidates[0];
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (!preserves_convergence(trial(candidates[i]), rate_class)) break;
        best = candidates[i];
    }
    return {{best}, false};
}

}  // namespace fedsim

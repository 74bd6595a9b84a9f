#include "fedsim/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedsim {

namespace {

double rate(RateClass rc, int t) {
    return rc == RateClass::kInverseT ? 1.0 / t : 1.0 / std::sqrt(static_cast<double>(t));
}

// uniform sample without replacement, returned in ascending order
std::vector<int> sample_without_replacement(int K, int size, RngStream& rng) {
    std::vector<int> pool(K);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < size; ++i) {
        int j = i + static_cast<int>(rng.below(K - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(size);
    std::sort(pool.begin(), pool.end());
    return pool;
}

ParamVector prefix_mean(const UpdateSet& us, int from, int to) {  // [from, to), 0-based
    ParamVector acc = ParamVector::Zero(us.dim());
    for (int k = from; k < to; ++k) acc += us.updates[k].params;
    return acc / (to - from);
}

}  // namespace

double defense_threshold(int t, RateClass rate_class) {
    if (t < 2) throw std::invalid_argument("defense threshold is defined for t >= 2");
    return 0.8 * (rate(rate_class, t - 1) - rate(rate_class, t));
}

void ConvergenceMonitor::record(int t, double loss) {
    if (t != static_cast<int>(history_.size()) + 1) {
        throw std::logic_error("rounds must be recorded in order starting at 1");
    }
    history_.push_back(loss);
}

bool ConvergenceMonitor::detect(int t, double l_t) const {
    if (history_.empty()) throw std::logic_error("l_1 has not been recorded");
    if (t < 2 || t > static_cast<int>(history_.size()) + 1) {
        throw std::logic_error("detect requires rounds 1..t-1 recorded");
    }
    double decrease = (history_[t - 2] - l_t) / history_.front();
    return decrease < defense_threshold(t, rate_class_);
}

double ConvergenceMonitor::l1() const {
    if (history_.empty()) throw std::logic_error("l_1 has not been recorded");
    return history_.front();
}

SybilSearchResult binary_search_sybils(const UpdateSet& us, const CostOracle& oracle,
                                       double client_fraction, RngStream& rng) {
    const int K = us.size();
    if (K < 2) throw std::invalid_argument("binary search requires K >= 2");
    if (client_fraction <= 0.0 || client_fraction > 1.0) {
        throw std::invalid_argument("client fraction must be in (0, 1]");
    }

    const int limit = std::max(K / 10, 2);
    const int sample_size = std::max(static_cast<int>(std::ceil(client_fraction * K)), 1);

    SybilSearchResult result;
    int i = 1, h = K;
    while (h - i > limit) {
        const int m = (i + h) / 2;
        ParamVector w_lo = prefix_mean(us, 0, m);
        ParamVector w_hi = prefix_mean(us, m, K);

        auto sampled = sample_without_replacement(K, sample_size, rng);
        double sum_lo = 0.0, sum_hi = 0.0;
        int reporters = 0;
        for (int k : sampled) {
            auto a = oracle(us.updates[k].client_id, w_lo);
            auto b = oracle(us.updates[k].client_id, w_hi);
            if (!a || !b) continue;  // failed report drops the client
            sum_lo += *a;
            sum_hi += *b;
            ++reporters;
        }
        if (reporters == 0) return result;  // search aborts, no exclusion

        if (sum_lo / reporters < sum_hi / reporters) {
            i = m + 1;
        } else {
            h = m;
        }
        ++result.iterations;
        result.trace.emplace_back(i, h);
    }
    result.range = ExclusionRange{i, h, us.round};
    return result;
}

ParamVector aggregate_excluding(const UpdateSet& us, const std::optional<ExclusionRange>& ex) {
    if (!ex) return fed_avg(us);
    const int K = us.size();
    if (ex->lo < 1 || ex->hi > K || ex->lo > ex->hi) {
        throw std::invalid_argument("exclusion range out of bounds");
    }

    ParamVector acc = ParamVector::Zero(us.dim());
    int kept = 0;
    for (int k = 0; k < K; ++k) {
        int pos = k + 1;
        if (pos >= ex->lo && pos <= ex->hi) continue;
        acc += us.updates[k].params;
        ++kept;
    }
    if (kept == 0) throw std::runtime_error("exclusion removed every client");
    return acc / kept;
}

}  // namespace fedsim

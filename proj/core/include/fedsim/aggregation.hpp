#pragma once

#include <utility>
#include <vector>

#include "fedsim/model.hpp"

namespace fedsim {

// One client's round output. The sybil tag is ground truth for the harness
// and attack modules only; aggregators and the defense never read it.
struct ClientUpdate {
    int client_id = 0;
    ParamVector params;
    int n_k = 0;
    bool sybil = false;
};

// Updates in canonical client order; this order is what the defense's
// binary search ranges refer to.
struct UpdateSet {
    std::vector<ClientUpdate> updates;
    int round = 0;

    int size() const { return static_cast<int>(updates.size()); }
    Eigen::Index dim() const { return updates.empty() ? 0 : updates.front().params.size(); }
};

enum class AggregatorKind { kFedAvg, kKrum, kMultiKrum, kTrimmedMean };

struct AggregationRule {
    AggregatorKind kind = AggregatorKind::kFedAvg;
    int c = 0;  // assumed compromised count (krum / trimmed-mean)
    int m = 1;  // multi-krum selection count
};

// Elementwise mean over all updates.
ParamVector fed_avg(const UpdateSet& us);

// score_k = sum of the smallest K-c-2 squared Euclidean distances from
// update k to the other updates. Requires K - c - 2 >= 1.
std::vector<double> krum_scores(const UpdateSet& us, int c);

// argmin of krum_scores; ties broken by lowest client index.
std::pair<int, ParamVector> krum_select(const UpdateSet& us, int c);

// Mean of the m lowest-score updates (ties by lowest index).
ParamVector multi_krum(const UpdateSet& us, int c, int m);

// Per coordinate: drop the c largest and c smallest values, average the
// remaining K - 2c. Requires K - 2c >= 1.
ParamVector trimmed_mean(const UpdateSet& us, int c);

ParamVector aggregate(const UpdateSet& us, const AggregationRule& rule);

}  // namespace fedsim

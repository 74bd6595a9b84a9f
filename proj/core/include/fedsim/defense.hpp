#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fedsim/aggregation.hpp"
#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Per-round loss-decrease floor: 0.8 * (r(t-1) - r(t)) with r(t) = 1/t or
// 1/sqrt(t). Defined for t >= 2.
double defense_threshold(int t, RateClass rate_class);

// Tracks the average training loss per round; l_1 anchors the convergence
// check.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(RateClass rate_class) : rate_class_(rate_class) {}

    // Record the round-t average loss; rounds must arrive in order from 1.
    void record(int t, double loss);

    // True iff (l_{t-1} - l_t) / l_1 < defense_threshold(t). Requires that
    // rounds 1..t-1 have been recorded.
    bool detect(int t, double l_t) const;

    double l1() const;
    const std::vector<double>& history() const { return history_; }

private:
    RateClass rate_class_;
    std::vector<double> history_;
};

// Clients to exclude, as 1-based positions into the canonical client order.
struct ExclusionRange {
    int lo = 0;
    int hi = 0;
    int round = 0;

    int width() const { return hi - lo + 1; }
};

// A client's reported prediction cost for a candidate model, or nothing if
// the report failed.
using CostOracle = std::function<std::optional<double>(int client_id, const ParamVector& w)>;

struct SybilSearchResult {
    std::optional<ExclusionRange> range;           // empty when the search aborted
    int iterations = 0;
    std::vector<std::pair<int, int>> trace;        // (i, h) after each iteration
};

// Binary search over the client vector: split at m, average updates 1..m
// and m+1..K, let a random client sample report costs for both means, and
// recurse into the half with the larger mean cost. Terminates when
// h - i <= max(floor(K/10), 2). Sampled clients whose report fails are
// dropped; if a whole sample fails the search aborts with no exclusion.
SybilSearchResult binary_search_sybils(const UpdateSet& us, const CostOracle& oracle,
                                       double client_fraction, RngStream& rng);

// Mean of all updates outside [ex.lo, ex.hi]; with no exclusion this is
// exactly fed_avg.
ParamVector aggregate_excluding(const UpdateSet& us, const std::optional<ExclusionRange>& ex);

}  // namespace fedsim

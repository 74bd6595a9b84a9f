#include "fedsim/aggregation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fedsim {

namespace {

void check_dims(const UpdateSet& us) {
    if (us.updates.empty()) throw std::invalid_argument("empty update set");
    const Eigen::Index d = us.dim();
    for (const auto& u : us.updates) {
        if (u.params.size() != d) throw std::invalid_argument("update dimension mismatch");
    }
}

}  // namespace

ParamVector fed_avg(const UpdateSet& us) {
    check_dims(us);
    ParamVector acc = ParamVector::Zero(us.dim());
    for (const auto& u : us.updates) acc += u.params;
    return acc / us.size();
}

std::vector<double> krum_scores(const UpdateSet& us, int c) {
    check_dims(us);
    const int K = us.size();
    const int keep = K - c - 2;
    if (c < 0 || keep < 1) throw std::invalid_argument("krum requires K - c - 2 >= 1");

    // full pairwise squared-distance matrix; K is at most a few hundred
    std::vector<std::vector<double>> d2(K, std::vector<double>(K, 0.0));
    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            d2[i][j] = d2[j][i] = (us.updates[i].params - us.updates[j].params).squaredNorm();
        }
    }

    std::vector<double> scores(K);
    std::vector<double> row;
    row.reserve(K - 1);
    for (int i = 0; i < K; ++i) {
        row.clear();
        for (int j = 0; j < K; ++j) {
            if (j != i) row.push_back(d2[i][j]);
        }
        std::sort(row.begin(), row.end());
        double s = 0.0;
        for (int j = 0; j < keep; ++j) s += row[j];  // ascending order, fixed
        scores[i] = s;
    }
    return scores;
}

std::pair<int, ParamVector> krum_select(const UpdateSet& us, int c) {
    auto scores = krum_scores(us, c);
    int best = 0;
    for (int i = 1; i < us.size(); ++i) {
        if (scores[i] < scores[best]) best = i;  // strict: ties keep lowest index
    }
    return {best, us.updates[best].params};
}

ParamVector multi_krum(const UpdateSet& us, int c, int m) {
    if (m < 1 || m > us.size()) throw std::invalid_argument("multi-krum requires 1 <= m <= K");
    auto scores = krum_scores(us, c);
    std::vector<int> order(us.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
    });
    std::vector<int> chosen(order.begin(), order.begin() + m);
    std::sort(chosen.begin(), chosen.end());  // sum in client order

    ParamVector acc = ParamVector::Zero(us.dim());
    for (int idx : chosen) acc += us.updates[idx].params;
    return acc / m;
}

ParamVector trimmed_mean(const UpdateSet& us, int c) {
    check_dims(us);
    const int K = us.size();
    if (c < 0 || K - 2 * c < 1) throw std::invalid_argument("trimmed-mean requires K - 2c >= 1");

    const Eigen::Index d = us.dim();
    ParamVector out(d);
    std::vector<int> order(K);
    std::vector<char> dropped(K);
    for (Eigen::Index j = 0; j < d; ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return us.updates[a].params[j] < us.updates[b].params[j];
        });
        std::fill(dropped.begin(), dropped.end(), 0);
        for (int t = 0; t < c; ++t) {
            dropped[order[t]] = 1;
            dropped[order[K - 1 - t]] = 1;
        }
        // sum kept values in client order so that c = 0 reproduces fed_avg
        // bit for bit
        double s = 0.0;
        for (int k = 0; k < K; ++k) {
            if (!dropped[k]) s += us.updates[k].params[j];
        }
        out[j] = s / (K - 2 * c);
    }
    return out;
}

ParamVector aggregate(const UpdateSet& us, const AggregationRule& rule) {
    switch (rule.kind) {
        case AggregatorKind::kFedAvg:
            return fed_avg(us);
        case AggregatorKind::kKrum:
            return krum_select(us, rule.c).second;
        case AggregatorKind::kMultiKrum:
            return multi_krum(us, rule.c, rule.m);
        case AggregatorKind::kTrimmedMean:
            return trimmed_mean(us, rule.c);
    }
    throw std::logic_error("unknown aggregation rule");
}

}  // namespace fedsim

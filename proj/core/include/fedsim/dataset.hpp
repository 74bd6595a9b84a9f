#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace fedsim {

// Labeled examples. One row of `features` per example; every label lies in
// [0, num_classes).
struct Dataset {
    Eigen::MatrixXd features;  // n x feature_dim
    std::vector<int> labels;   // size n
    int num_classes = 0;

    int size() const { return static_cast<int>(labels.size()); }
    int feature_dim() const { return static_cast<int>(features.cols()); }
};

enum class PartitionScheme { kIid, kNonIidShards };

// Disjoint assignment of example indices to clients. Index sets cover the
// partitioned subset; every client owns at least one example.
struct PartitionPlan {
    std::vector<std::vector<int>> assignment;  // one index set per client
    PartitionScheme scheme = PartitionScheme::kIid;
};

// Reads an IDX image/label file pair (big-endian, magic 0x00000803 for
// images and 0x00000801 for labels). Pixels are scaled to [0, 1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Per-class Gaussian blobs around random class means; linearly separable
// with noise. Deterministic for a fixed seed.
Dataset generate_synthetic(int n, int feature_dim, int num_classes, std::uint64_t seed);

// iid: uniform random disjoint split. noniid-shards: sort by label, cut into
// 2K equal shards, hand each client 2 shards.
PartitionPlan partition(const Dataset& ds, int K, PartitionScheme scheme, std::uint64_t seed);

// Keeps the first `n` examples.
Dataset take_prefix(const Dataset& ds, int n);

}  // namespace fedsim

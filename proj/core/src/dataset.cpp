#include "fedsim/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
    unsigned char buf[4];
    if (!f.read(reinterpret_cast<char*>(buf), 4)) {
        throw std::runtime_error("IDX format error: truncated header in " + path);
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void shuffle_indices(std::vector<int>& idx, RngStream& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgf(images_path, std::ios::binary);
    if (!imgf) throw std::runtime_error("cannot open " + images_path);
    std::ifstream lblf(labels_path, std::ios::binary);
    if (!lblf) throw std::runtime_error("cannot open " + labels_path);

    if (read_be32(imgf, images_path) != kImagesMagic) {
        throw std::runtime_error("IDX format error: bad image magic in " + images_path);
    }
    std::uint32_t n_images = read_be32(imgf, images_path);
    std::uint32_t rows = read_be32(imgf, images_path);
    std::uint32_t cols = read_be32(imgf, images_path);

    if (read_be32(lblf, labels_path) != kLabelsMagic) {
        throw std::runtime_error("IDX format error: bad label magic in " + labels_path);
    }
    std::uint32_t n_labels = read_be32(lblf, labels_path);

    if (n_images != n_labels) {
        throw std::runtime_error("IDX consistency error: " + std::to_string(n_images) +
                                 " images vs " + std::to_string(n_labels) + " labels");
    }

    const int n = static_cast<int>(n_images);
    const int dim = static_cast<int>(rows * cols);

    Dataset ds;
    ds.features.resize(n, dim);
    ds.labels.resize(n);

    std::vector<unsigned char> px(dim);
    for (int i = 0; i < n; ++i) {
        if (!imgf.read(reinterpret_cast<char*>(px.data()), dim)) {
            throw std::runtime_error("IDX format error: truncated image data in " + images_path);
        }
        for (int j = 0; j < dim; ++j) ds.features(i, j) = px[j] / 255.0;
    }
    std::vector<unsigned char> lbl(n);
    if (!lblf.read(reinterpret_cast<char*>(lbl.data()), n)) {
        throw std::runtime_error("IDX format error: truncated label data in " + labels_path);
    }
    int max_label = 0;
    for (int i = 0; i < n; ++i) {
        ds.labels[i] = lbl[i];
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.num_classes = std::max(max_label + 1, 10);
    return ds;
}

Dataset generate_synthetic(int n, int feature_dim, int num_classes, std::uint64_t seed) {
    if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
    if (n < num_classes) throw std::invalid_argument("n must be >= num_classes");

    RngStream rng = RngStream::derive(seed, {0x5f4e7});

    Eigen::MatrixXd means(num_classes, feature_dim);
    for (int c = 0; c < num_classes; ++c) {
        for (int j = 0; j < feature_dim; ++j) means(c, j) = rng.uniform(-1.0, 1.0);
    }

    const double noise_sigma = 0.6;
    Dataset ds;
    ds.num_classes = num_classes;
    ds.features.resize(n, feature_dim);
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        int c = i % num_classes;
        ds.labels[i] = c;
        for (int j = 0; j < feature_dim; ++j) {
            ds.features(i, j) = means(c, j) + rng.normal(noise_sigma);
        }
    }
    return ds;
}

PartitionPlan partition(const Dataset& ds, int K, PartitionScheme scheme, std::uint64_t seed) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    const int n = ds.size();
    if (scheme == PartitionScheme::kNonIidShards && n < 2 * K) {
        throw std::invalid_argument("dataset too small for noniid-shards partition");
    }
    if (n < K) throw std::invalid_argument("dataset too small: fewer examples than clients");

    RngStream rng = RngStream::derive(seed, {0x9a47});
    PartitionPlan plan;
    plan.scheme = scheme;
    plan.assignment.resize(K);

    if (scheme == PartitionScheme::kIid) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        shuffle_indices(idx, rng);
        int base = n / K, extra = n % K;
        int pos = 0;
        for (int k = 0; k < K; ++k) {
            int take = base + (k < extra ? 1 : 0);
            plan.assignment[k].assign(idx.begin() + pos, idx.begin() + pos + take);
            pos += take;
        }
    } else {
        // label-sorted indices, 2K equal shards, 2 shards per client;
        // any remainder past 2K*shard_size is left unassigned
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return ds.labels[a] < ds.labels[b]; });
        const int num_shards = 2 * K;
        const int shard_size = n / num_shards;
        std::vector<int> shard_order(num_shards);
        std::iota(shard_order.begin(), shard_order.end(), 0);
        shuffle_indices(shard_order, rng);
        for (int k = 0; k < K; ++k) {
            for (int s = 0; s < 2; ++s) {
                int shard = shard_order[2 * k + s];
                auto begin = idx.begin() + shard * shard_size;
                plan.assignment[k].insert(plan.assignment[k].end(), begin, begin + shard_size);
            }
        }
    }
    return plan;
}

Dataset take_prefix(const Dataset& ds, int n) {
    if (n > ds.size()) throw std::invalid_argument("take_prefix: n exceeds dataset size");
    Dataset out;
    out.num_classes = ds.num_classes;
    out.features = ds.features.topRows(n);
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + n);
    return out;
}

}  // namespace fedsim

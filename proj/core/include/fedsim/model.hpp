#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Flat parameter vector; the currency between clients, attacks, aggregators
// and the defense.
using ParamVector = Eigen::VectorXd;

enum class ModelKind { kLogisticRegression, kMlp };
enum class RateClass { kInverseT, kInverseSqrtT };

// Fully-connected softmax classifier: logistic regression (no hidden layer)
// or a one-hidden-layer ReLU MLP. Loss is cross-entropy throughout.
struct ModelSpec {
    ModelKind kind = ModelKind::kLogisticRegression;
    std::vector<int> layer_sizes;  // first = feature_dim, last = num_classes

    static ModelSpec logistic(int feature_dim, int num_classes);
    static ModelSpec mlp(int feature_dim, int hidden, int num_classes);

    int param_count() const;
};

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

// Seeded uniform(-0.05, 0.05) initialization.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// E epochs of mini-batch SGD over the given example indices; batching order
// is a pure function of the stream. eta = 0 returns w unchanged. Throws on
// non-finite parameters so the harness can flag divergence.
ParamVector local_train(const ModelSpec& spec, const ParamVector& w, const Dataset& ds,
                        std::span<const int> indices, int epochs, int batch_size, double eta,
                        RngStream& rng);

// Mean cross-entropy and argmax accuracy over a whole dataset.
EvalResult evaluate(const ModelSpec& spec, const ParamVector& w, const Dataset& ds);

// Mean over batches of the per-batch mean loss (batches of size B cut from
// the index sequence in order; the final batch may be short and counts as
// one batch regardless).
double client_cost(const ModelSpec& spec, const ParamVector& w, const Dataset& ds,
                   std::span<const int> indices, int batch_size);

// Mean cross-entropy over the given examples (single "batch" of everything).
double subset_loss(const ModelSpec& spec, const ParamVector& w, const Dataset& ds,
                   std::span<const int> indices);

}  // namespace fedsim

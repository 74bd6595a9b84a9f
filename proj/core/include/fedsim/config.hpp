#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fedsim/aggregation.hpp"
#include "fedsim/attacks.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

enum class DefenseMode { kNone, kProposed };
enum class DatasetKind { kMnist, kSynthetic };
enum class SybilPlacement { kRandomPerRound, kContiguousBlock };

// Every knob of one experiment. Defaults follow the reference federated
// setup: K=100, C=0.1, c=20, T=50, B=10, E=5, eta=0.01, epsilon_h=8.0,
// epsilon_s=0.3.
struct ExperimentConfig {
    int K = 100;       // number of clients
    double C = 0.1;    // fraction of clients sampled for loss reports
    int c = 20;        // number of compromised clients
    int T = 50;        // communication rounds
    int B = 10;        // local batch size
    int E = 5;         // local epochs
    double eta = 0.01; // learning rate
    double epsilon_h = 8.0;
    double epsilon_s = 0.3;

    AggregatorKind aggregator = AggregatorKind::kFedAvg;
    std::optional<int> aggregator_c;  // server's assumed compromised count; defaults to c
    int multikrum_m = 1;

    AttackKind attack = AttackKind::kNone;
    Knowledge knowledge = Knowledge::kOmniscient;
    double gaussian_sigma = 0.3;

    DefenseMode defense = DefenseMode::kNone;
    bool persistent_exclusion = false;  // extension: excluded clients stay excluded

    RateClass rate_class = RateClass::kInverseSqrtT;
    SybilPlacement sybil_placement = SybilPlacement::kRandomPerRound;

    DatasetKind dataset = DatasetKind::kSynthetic;
    PartitionScheme partition = PartitionScheme::kIid;
    ModelKind model = ModelKind::kMlp;
    int hidden = 64;

    std::uint64_t seed = 1;
    int workers = 1;  // local-training worker threads; output is identical for any count

    // MNIST IDX paths (dataset = mnist)
    std::string mnist_train_images, mnist_train_labels;
    std::string mnist_test_images, mnist_test_labels;
    int train_limit = 0;  // 0 = use everything
    int test_limit = 0;

    // synthetic dataset shape (dataset = synthetic); a held-out 20% of the
    // generated examples becomes the test split
    int synthetic_n = 2500;
    int synthetic_dim = 32;
    int synthetic_classes = 10;

    int effective_aggregator_c() const { return aggregator_c.value_or(c); }
};

// Flat key=value config file; '#' starts a comment. Keys are named exactly
// like the fields above. Unknown keys are an error.
ExperimentConfig load_config_file(const std::string& path);

// Applies one key=value pair (used for both file lines and CLI overrides).
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

void validate(const ExperimentConfig& cfg);

std::string to_string(AggregatorKind k);
std::string to_string(AttackKind k);
std::string to_string(DefenseMode m);
std::string to_string(DatasetKind d);

}  // namespace fedsim

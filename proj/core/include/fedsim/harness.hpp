#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/defense.hpp"

namespace fedsim {

// One row of the metrics log. avg_train_loss is the loss of the global
// model entering round t (what the defense monitors); the test columns
// describe the model the round produced.
struct RoundRecord {
    int round = 0;
    double avg_train_loss = 0.0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
    double error_rate = 0.0;
    bool defense_triggered = false;
    std::optional<ExclusionRange> excluded;
    std::vector<int> sybil_ids;  // ground truth, not part of the CSV schema
};

struct ExperimentResult {
    std::vector<RoundRecord> records;
    bool diverged = false;
    ParamVector final_model;

    double final_error() const { return records.empty() ? 1.0 : records.back().error_rate; }
};

// Runs the full round loop: local training for every client, honest DP
// perturbation, attack rewrite of the coalition, defense or configured
// aggregation, test evaluation. Deterministic per config (including seed),
// for any worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Uniform sample without replacement of size max(ceil(C*K), 1), ascending.
std::vector<int> sample_clients(int K, double C, RngStream& rng);

double error_rate(double test_accuracy);

enum class MetricsFormat { kCsv, kJsonLines };

// CSV header:
// round,avg_train_loss,test_loss,test_accuracy,error_rate,defense_triggered,excluded_lo,excluded_hi
// Reals carry 6 significant digits; excluded_lo/hi are 0 when nothing was
// excluded. json-lines mirrors the same fields.
void emit_metrics(const std::vector<RoundRecord>& records, const std::string& out_path,
                  MetricsFormat format);

std::string format_metrics(const std::vector<RoundRecord>& records, MetricsFormat format);

}  // namespace fedsim

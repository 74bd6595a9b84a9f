#include "fedsim/config.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace fedsim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

AggregatorKind parse_aggregator(const std::string& v) {
    if (v == "fedavg") return AggregatorKind::kFedAvg;
    if (v == "krum") return AggregatorKind::kKrum;
    if (v == "multi-krum") return AggregatorKind::kMultiKrum;
    if (v == "trimmed-mean") return AggregatorKind::kTrimmedMean;
    throw std::invalid_argument("unknown aggregator: " + v);
}

AttackKind parse_attack(const std::string& v) {
    if (v == "none") return AttackKind::kNone;
    if (v == "gaussian") return AttackKind::kGaussian;
    if (v == "budget") return AttackKind::kBudget;
    if (v == "sync-laplace") return AttackKind::kSyncLaplace;
    if (v == "krum-collusion") return AttackKind::kKrumCollusion;
    if (v == "tm-directional") return AttackKind::kTmDirectional;
    throw std::invalid_argument("unknown attack: " + v);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected a boolean, got: " + v);
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "K") cfg.K = std::stoi(v);
    else if (key == "C") cfg.C = std::stod(v);
    else if (key == "c") cfg.c = std::stoi(v);
    else if (key == "T") cfg.T = std::stoi(v);
    else if (key == "B") cfg.B = std::stoi(v);
    else if (key == "E") cfg.E = std::stoi(v);
    else if (key == "eta") cfg.eta = std::stod(v);
    else if (key == "epsilon_h") cfg.epsilon_h = std::stod(v);
    else if (key == "epsilon_s") cfg.epsilon_s = std::stod(v);
    else if (key == "aggregator") cfg.aggregator = parse_aggregator(v);
    else if (key == "aggregator_c") cfg.aggregator_c = std::stoi(v);
    else if (key == "multikrum_m") cfg.multikrum_m = std::stoi(v);
    else if (key == "attack") cfg.attack = parse_attack(v);
    else if (key == "knowledge") {
        if (v == "omniscient") cfg.knowledge = Knowledge::kOmniscient;
        else if (v == "history-only") cfg.knowledge = Knowledge::kHistoryOnly;
        else throw std::invalid_argument("unknown knowledge mode: " + v);
    }
    else if (key == "gaussian_sigma") cfg.gaussian_sigma = std::stod(v);
    else if (key == "defense") {
        if (v == "none") cfg.defense = DefenseMode::kNone;
        else if (v == "proposed") cfg.defense = DefenseMode::kProposed;
        else throw std::invalid_argument("unknown defense: " + v);
    }
    else if (key == "persistent_exclusion") cfg.persistent_exclusion = parse_bool(v);
    else if (key == "rate_class") {
        if (v == "inverse-t") cfg.rate_class = RateClass::kInverseT;
        else if (v == "inverse-sqrt-t") cfg.rate_class = RateClass::kInverseSqrtT;
        else throw std::invalid_argument("unknown rate class: " + v);
    }
    else if (key == "sybil_placement") {
        if (v == "random-per-round") cfg.sybil_placement = SybilPlacement::kRandomPerRound;
        else if (v == "contiguous-block") cfg.sybil_placement = SybilPlacement::kContiguousBlock;
        else throw std::invalid_argument("unknown sybil placement: " + v);
    }
    else if (key == "dataset") {
        if (v == "mnist") cfg.dataset = DatasetKind::kMnist;
        else if (v == "synthetic") cfg.dataset = DatasetKind::kSynthetic;
        else throw std::invalid_argument("unknown dataset: " + v);
    }
    else if (key == "partition") {
        if (v == "iid") cfg.partition = PartitionScheme::kIid;
        else if (v == "noniid-shards") cfg.partition = PartitionScheme::kNonIidShards;
        else throw std::invalid_argument("unknown partition scheme: " + v);
    }
    else if (key == "model") {
        if (v == "logistic-regression") cfg.model = ModelKind::kLogisticRegression;
        else if (v == "mlp") cfg.model = ModelKind::kMlp;
        else throw std::invalid_argument("unknown model: " + v);
    }
    else if (key == "hidden") cfg.hidden = std::stoi(v);
    else if (key == "seed") cfg.seed = std::stoull(v);
    else if (key == "workers") cfg.workers = std::stoi(v);
    else if (key == "mnist_train_images") cfg.mnist_train_images = v;
    else if (key == "mnist_train_labels") cfg.mnist_train_labels = v;
    else if (key == "mnist_test_images") cfg.mnist_test_images = v;
    else if (key == "mnist_test_labels") cfg.mnist_test_labels = v;
    else if (key == "train_limit") cfg.train_limit = std::stoi(v);
    else if (key == "test_limit") cfg.test_limit = std::stoi(v);
    else if (key == "synthetic_n") cfg.synthetic_n = std::stoi(v);
    else if (key == "synthetic_dim") cfg.synthetic_dim = std::stoi(v);
    else if (key == "synthetic_classes") cfg.synthetic_classes = std::stoi(v);
    else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        apply_config_entry(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.K < 1) throw std::invalid_argument("K must be >= 1");
    if (cfg.C <= 0.0 || cfg.C > 1.0) throw std::invalid_argument("C must be in (0, 1]");
    if (cfg.c < 0 || cfg.c >= cfg.K) throw std::invalid_argument("c must satisfy 0 <= c < K");
    if (cfg.T < 1 || cfg.B < 1 || cfg.E < 1) throw std::invalid_argument("T, B, E must be >= 1");
    if (cfg.eta < 0.0) throw std::invalid_argument("eta must be >= 0");
    if (cfg.epsilon_h <= 0.0) throw std::invalid_argument("epsilon_h must be > 0");
    if (cfg.attack != AttackKind::kNone && cfg.attack != AttackKind::kGaussian &&
        (cfg.epsilon_s <= 0.0 || cfg.epsilon_s >= cfg.epsilon_h)) {
        throw std::invalid_argument("attack requires 0 < epsilon_s < epsilon_h");
    }
    if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
}

std::string to_string(AggregatorKind k) {
    switch (k) {
        case AggregatorKind::kFedAvg: return "fedavg";
        case AggregatorKind::kKrum: return "krum";
        case AggregatorKind::kMultiKrum: return "multi-krum";
        case AggregatorKind::kTrimmedMean: return "trimmed-mean";
    }
    return "?";
}

std::string to_string(AttackKind k) {
    switch (k) {
        case AttackKind::kNone: return "none";
        case AttackKind::kGaussian: return "gaussian";
        case AttackKind::kBudget: return "budget";
        case AttackKind::kSyncLaplace: return "sync-laplace";
        case AttackKind::kKrumCollusion: return "krum-collusion";
        case AttackKind::kTmDirectional: return "tm-directional";
    }
    return "?";
}

std::string to_string(DefenseMode m) {
    return m == DefenseMode::kNone ? "none" : "proposed";
}

std::string to_string(DatasetKind d) {
    return d == DatasetKind::kMnist ? "mnist" : "synthetic";
}

}  // namespace fedsim

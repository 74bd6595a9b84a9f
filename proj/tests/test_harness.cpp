#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "fedsim/harness.hpp"

using namespace fedsim;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.K = 10;
    cfg.C = 0.5;
    cfg.c = 2;
    cfg.T = 6;
    cfg.B = 5;
    cfg.E = 1;
    cfg.eta = 0.05;
    cfg.dataset = DatasetKind::kSynthetic;
    cfg.synthetic_n = 400;
    cfg.synthetic_dim = 8;
    cfg.synthetic_classes = 4;
    cfg.model = ModelKind::kMlp;
    cfg.hidden = 8;
    cfg.seed = 7;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sample_clients returns a sorted sample of ceil(C*K) distinct ids") {
    RngStream rng = RngStream::derive(1, {1});
    auto picked = sample_clients(100, 0.1, rng);
    CHECK(picked.size() == 10);
    std::set<int> seen;
    int prev = -1;
    for (int id : picked) {
        CHECK(id >= 0);
        CHECK(id < 100);
        CHECK(id > prev);
        prev = id;
        seen.insert(id);
    }
    CHECK(seen.size() == 10);

    RngStream r2 = RngStream::derive(1, {2});
    CHECK(sample_clients(7, 0.001, r2).size() == 1);  // never empty
    CHECK_THROWS_AS(sample_clients(10, 0.0, r2), std::invalid_argument);
    CHECK_THROWS_AS(sample_clients(10, 1.5, r2), std::invalid_argument);
}

TEST_CASE("error_rate is the complement of accuracy") {
    CHECK(error_rate(0.97) == doctest::Approx(0.03));
    CHECK(error_rate(1.0) == 0.0);
    CHECK_THROWS_AS(error_rate(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(error_rate(1.1), std::invalid_argument);
}

TEST_CASE("run_experiment is deterministic, independent of worker count") {
    ExperimentConfig cfg = tiny_config();
    ExperimentResult a = run_experiment(cfg);
    ExperimentResult b = run_experiment(cfg);
    CHECK(format_metrics(a.records, MetricsFormat::kCsv) ==
          format_metrics(b.records, MetricsFormat::kCsv));
    CHECK(a.final_model == b.final_model);  // bitwise

    cfg.workers = 3;
    ExperimentResult c = run_experiment(cfg);
    CHECK(format_metrics(a.records, MetricsFormat::kCsv) ==
          format_metrics(c.records, MetricsFormat::kCsv));
    CHECK(a.final_model == c.final_model);

    cfg.workers = 1;
    cfg.seed = 8;
    ExperimentResult d = run_experiment(cfg);
    CHECK(format_metrics(a.records, MetricsFormat::kCsv) !=
          format_metrics(d.records, MetricsFormat::kCsv));
}

TEST_CASE("with attack=none the marked coalition changes nothing") {
    ExperimentConfig a = tiny_config();
    a.attack = AttackKind::kNone;
    a.c = 2;
    ExperimentConfig b = a;
    b.c = 5;
    CHECK(format_metrics(run_experiment(a).records, MetricsFormat::kCsv) ==
          format_metrics(run_experiment(b).records, MetricsFormat::kCsv));
}

TEST_CASE("csv output carries the exact schema and 6 significant digits") {
    ExperimentConfig cfg = tiny_config();
    cfg.T = 3;
    ExperimentResult res = run_experiment(cfg);
    std::string csv = format_metrics(res.records, MetricsFormat::kCsv);

    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "round,avg_train_loss,test_loss,test_accuracy,error_rate,defense_triggered,"
          "excluded_lo,excluded_hi");

    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 8);
        CHECK(std::stoi(fields[0]) == rows);
        // %.6g round-trip: re-rendering the parsed value reproduces the field
        for (int j = 1; j <= 4; ++j) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6g", std::stod(fields[j]));
            CHECK(fields[j] == buf);
        }
        CHECK((fields[5] == "0" || fields[5] == "1"));
        CHECK(fields[6] == "0");  // no defense in this run
        CHECK(fields[7] == "0");
    }
    CHECK(rows == 3);
}

TEST_CASE("json-lines output mirrors the csv fields") {
    ExperimentConfig cfg = tiny_config();
    cfg.T = 2;
    ExperimentResult res = run_experiment(cfg);
    std::string jsonl = format_metrics(res.records, MetricsFormat::kJsonLines);

    std::istringstream in(jsonl);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        for (const char* key : {"\"round\"", "\"avg_train_loss\"", "\"test_loss\"",
                                "\"test_accuracy\"", "\"error_rate\"", "\"defense_triggered\"",
                                "\"excluded_lo\"", "\"excluded_hi\""}) {
            CHECK(line.find(key) != std::string::npos);
        }
        CHECK(line.front() == '{');
        CHECK(line.back() == '}');
    }
    CHECK(rows == 2);
}

TEST_CASE("emit_metrics writes the formatted bytes to disk") {
    ExperimentConfig cfg = tiny_config();
    cfg.T = 2;
    ExperimentResult res = run_experiment(cfg);
    auto path = std::filesystem::temp_directory_path() / "fedsim_t_metrics.csv";
    emit_metrics(res.records, path.string(), MetricsFormat::kCsv);
    CHECK(slurp(path) == format_metrics(res.records, MetricsFormat::kCsv));
}

TEST_CASE("config files parse exact keys and reject unknown ones") {
    auto path = std::filesystem::temp_directory_path() / "fedsim_t_config.cfg";
    {
        std::ofstream f(path);
        f << "# experiment knobs\n"
          << "K=20\n"
          << "C=0.25\n"
          << "epsilon_h=4.0\n"
          << "aggregator=trimmed-mean\n"
          << "attack=budget\n"
          << "defense=proposed\n"
          << "persistent_exclusion=true\n"
          << "dataset=synthetic\n"
          << "model=logistic-regression\n"
          << "sybil_placement=contiguous-block\n"
          << "rate_class=inverse-t\n"
          << "seed=99\n";
    }
    ExperimentConfig cfg = load_config_file(path.string());
    CHECK(cfg.K == 20);
    CHECK(cfg.C == doctest::Approx(0.25));
    CHECK(cfg.epsilon_h == doctest::Approx(4.0));
    CHECK(cfg.aggregator == AggregatorKind::kTrimmedMean);
    CHECK(cfg.attack == AttackKind::kBudget);
    CHECK(cfg.defense == DefenseMode::kProposed);
    CHECK(cfg.persistent_exclusion);
    CHECK(cfg.dataset == DatasetKind::kSynthetic);
    CHECK(cfg.model == ModelKind::kLogisticRegression);
    CHECK(cfg.sybil_placement == SybilPlacement::kContiguousBlock);
    CHECK(cfg.rate_class == RateClass::kInverseT);
    CHECK(cfg.seed == 99);

    ExperimentConfig other;
    CHECK_THROWS_AS(apply_config_entry(other, "no_such_key", "1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_entry(other, "aggregator", "bogus"), std::invalid_argument);

    ExperimentConfig bad = tiny_config();
    bad.C = 2.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("golden reference run matches the committed csv byte for byte") {
    ExperimentConfig cfg =
        load_config_file(std::string(FEDSIM_TEST_DATA_DIR) + "/golden_config.cfg");
    ExperimentResult res = run_experiment(cfg);
    std::string expected = slurp(std::string(FEDSIM_TEST_DATA_DIR) + "/golden_reference.csv");
    CHECK(format_metrics(res.records, MetricsFormat::kCsv) == expected);
}

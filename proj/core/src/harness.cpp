#include "fedsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <atomic>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "fedsim/attacks.hpp"
#include "fedsim/dp.hpp"

namespace fedsim {

namespace {

// stream tags; one namespace per consumer keeps draws independent of
// scheduling and of other modules' consumption
enum StreamTag : std::uint64_t {
    kTagData = 1,
    kTagInit = 2,
    kTagPlacement = 3,
    kTagTrain = 4,
    kTagDp = 5,
    kTagAttack = 6,
    kTagDefense = 7,
    kTagLoss = 8,
};

struct Splits {
    Dataset train;
    Dataset test;
};

Splits prepare_data(const ExperimentConfig& cfg) {
    Splits s;
    if (cfg.dataset == DatasetKind::kMnist) {
        s.train = load_idx(cfg.mnist_train_images, cfg.mnist_train_labels);
        s.test = load_idx(cfg.mnist_test_images, cfg.mnist_test_labels);
    } else {
        Dataset all = generate_synthetic(cfg.synthetic_n, cfg.synthetic_dim,
                                         cfg.synthetic_classes, cfg.seed);
        // held-out 20% tail is the test split
        int n_train = cfg.synthetic_n - cfg.synthetic_n / 5;
        s.train = take_prefix(all, n_train);
        s.test.num_classes = all.num_classes;
        s.test.features = all.features.bottomRows(all.size() - n_train);
        s.test.labels.assign(all.labels.begin() + n_train, all.labels.end());
    }
    if (cfg.train_limit > 0 && cfg.train_limit < s.train.size()) {
        s.train = take_prefix(s.train, cfg.train_limit);
    }
    if (cfg.test_limit > 0 && cfg.test_limit < s.test.size()) {
        s.test = take_prefix(s.test, cfg.test_limit);
    }
    return s;
}

std::vector<int> pick_sybils(const ExperimentConfig& cfg, int round) {
    if (cfg.attack == AttackKind::kNone || cfg.c == 0) return {};
    if (cfg.sybil_placement == SybilPlacement::kContiguousBlock) {
        RngStream rng = RngStream::derive(cfg.seed, {kTagPlacement});
        int start = static_cast<int>(rng.below(cfg.K - cfg.c + 1));
        std::vector<int> ids(cfg.c);
        std::iota(ids.begin(), ids.end(), start);
        return ids;
    }
    RngStream rng = RngStream::derive(cfg.seed, {kTagPlacement, static_cast<std::uint64_t>(round)});
    return sample_clients(cfg.K, static_cast<double>(cfg.c) / cfg.K, rng);
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mu;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int count = std::min(workers, n);
    pool.reserve(count);
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<int> sample_clients(int K, double C, RngStream& rng) {
    if (C <= 0.0 || C > 1.0) throw std::invalid_argument("C must be in (0, 1]");
    int size = std::max(static_cast<int>(std::ceil(C * K)), 1);
    std::vector<int> pool(K);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < size; ++i) {
        int j = i + static_cast<int>(rng.below(K - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(size);
    std::sort(pool.begin(), pool.end());
    return pool;
}

double error_rate(double test_accuracy) {
    if (test_accuracy < 0.0 || test_accuracy > 1.0) {
        throw std::invalid_argument("accuracy must be in [0, 1]");
    }
    return 1.0 - test_accuracy;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);

    Splits data = prepare_data(cfg);
    PartitionPlan plan = partition(data.train, cfg.K, cfg.partition,
                                   mix64(cfg.seed ^ kTagData));

    ModelSpec spec = cfg.model == ModelKind::kMlp
                         ? ModelSpec::mlp(data.train.feature_dim(), cfg.hidden,
                                          data.train.num_classes)
                         : ModelSpec::logistic(data.train.feature_dim(), data.train.num_classes);

    ParamVector global = init_params(spec, mix64(cfg.seed ^ kTagInit));
    ConvergenceMonitor monitor(cfg.rate_class);
    std::vector<char> banned(cfg.K, 0);  // persistent-exclusion extension

    auto cost_of = [&](int client, const ParamVector& w) {
        return client_cost(spec, w, data.train, plan.assignment[client], cfg.B);
    };

    ExperimentResult result;
    ParamVector prev_global;            // global model of the previous round
    std::vector<ParamVector> prev_honest;  // honest updates of the previous round

    for (int t = 1; t <= cfg.T; ++t) {
        std::vector<int> sybil_ids = pick_sybils(cfg, t);
        std::vector<char> is_sybil(cfg.K, 0);
        for (int id : sybil_ids) is_sybil[id] = 1;

        // participants, in canonical client order
        std::vector<int> participants;
        participants.reserve(cfg.K);
        for (int k = 0; k < cfg.K; ++k) {
            if (!banned[k]) participants.push_back(k);
        }

        RoundRecord rec;
        rec.round = t;
        rec.sybil_ids = sybil_ids;

        // l_t: mean ClientCost over a fresh sample of max(ceil(C*K),1) reporters
        RngStream loss_rng =
            RngStream::derive(cfg.seed, {kTagLoss, static_cast<std::uint64_t>(t)});
        std::vector<int> reporters =
            sample_clients(static_cast<int>(participants.size()), cfg.C, loss_rng);
        double loss_sum = 0.0;
        for (int r : reporters) loss_sum += cost_of(participants[r], global);
        rec.avg_train_loss = loss_sum / reporters.size();

        try {
            UpdateSet us;
            us.round = t;
            us.updates.resize(participants.size());
            parallel_for(static_cast<int>(participants.size()), cfg.workers, [&](int i) {
                int k = participants[i];
                RngStream train_rng = RngStream::derive(
                    cfg.seed, {kTagTrain, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(k)});
                ParamVector w_k = local_train(spec, global, data.train, plan.assignment[k],
                                              cfg.E, cfg.B, cfg.eta, train_rng);
                us.updates[i] = {k, std::move(w_k), static_cast<int>(plan.assignment[k].size()),
                                 is_sybil[k] != 0};
            });

            // honest clients perturb at the honest budget; coalition members
            // stay raw for the attack to rewrite
            for (auto& u : us.updates) {
                if (u.sybil) continue;
                double d_max = u.params.cwiseAbs().maxCoeff();
                auto noise = laplace_scale(d_max, cfg.T, u.n_k, {cfg.epsilon_h});
                RngStream dp_rng = RngStream::derive(
                    cfg.seed, {kTagDp, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(u.client_id)});
                u.params = perturb_update(u.params, noise, dp_rng);
            }

            std::vector<ClientUpdate*> members;
            std::vector<const ParamVector*> honest_now;
            for (auto& u : us.updates) {
                if (u.sybil) members.push_back(&u);
                else honest_now.push_back(&u.params);
            }

            if (cfg.attack != AttackKind::kNone && !members.empty()) {
                RngStream atk_rng =
                    RngStream::derive(cfg.seed, {kTagAttack, static_cast<std::uint64_t>(t)});
                const std::vector<const ParamVector*> no_view;
                std::vector<const ParamVector*> history_view;
                for (const auto& h : prev_honest) history_view.push_back(&h);
                const auto& visible =
                    cfg.knowledge == Knowledge::kOmniscient ? honest_now : history_view;

                switch (cfg.attack) {
                    case AttackKind::kGaussian:
                        attack_gaussian(members, cfg.gaussian_sigma, atk_rng);
                        break;
                    case AttackKind::kBudget:
                        attack_fedavg_budget(members, cfg.epsilon_s, cfg.epsilon_h, cfg.T, atk_rng);
                        break;
                    case AttackKind::kSyncLaplace:
                        attack_fedavg_sync(members, cfg.epsilon_s, cfg.epsilon_h, cfg.T, atk_rng);
                        break;
                    case AttackKind::kKrumCollusion: {
                        std::vector<double> cand;
                        for (double e : kEpsilonCandidates) {
                            if (e < cfg.epsilon_h) cand.push_back(e);
                        }
                        attack_krum_collusion(members, visible, cfg.epsilon_h, cand, cfg.T,
                                              atk_rng);
                        break;
                    }
                    case AttackKind::kTmDirectional: {
                        Eigen::VectorXd dir;
                        if (cfg.knowledge == Knowledge::kOmniscient && !honest_now.empty()) {
                            ParamVector mean = ParamVector::Zero(global.size());
                            for (const ParamVector* h : honest_now) mean += *h;
                            mean /= static_cast<double>(honest_now.size());
                            dir = intended_direction(mean, global);
                        } else if (prev_global.size() == global.size()) {
                            dir = intended_direction(global, prev_global);
                        } else {
                            dir = Eigen::VectorXd::Zero(global.size());  // stalled: no-op
                        }
                        attack_trimmed_mean(members, visible, dir, cfg.epsilon_s, cfg.T, atk_rng);
                        break;
                    }
                    default:
                        break;
                }
            }

            // aggregation (defense replaces the configured rule when active)
            ParamVector next;
            if (cfg.defense == DefenseMode::kProposed) {
                bool triggered = t >= 2 && monitor.detect(t, rec.avg_train_loss);
                rec.defense_triggered = triggered;
                if (triggered) {
                    RngStream def_rng = RngStream::derive(
                        cfg.seed, {kTagDefense, static_cast<std::uint64_t>(t)});
                    auto oracle = [&](int client_id, const ParamVector& w)
                        -> std::optional<double> { return cost_of(client_id, w); };
                    auto search = binary_search_sybils(us, oracle, cfg.C, def_rng);
                    rec.excluded = search.range;
                    next = aggregate_excluding(us, search.range);
                    if (cfg.persistent_exclusion && search.range) {
                        // ban at most half of the original population; past
                        // that point exclusions stay per-round only
                        int already = cfg.K - static_cast<int>(participants.size());
                        if (already + search.range->width() <= cfg.K / 2) {
                            for (int pos = search.range->lo; pos <= search.range->hi; ++pos) {
                                banned[us.updates[pos - 1].client_id] = 1;
                            }
                        }
                    }
                } else {
                    next = fed_avg(us);
                }
            } else {
                AggregationRule rule{cfg.aggregator, cfg.effective_aggregator_c(),
                                     cfg.multikrum_m};
                next = aggregate(us, rule);
            }

            if (!next.allFinite()) throw std::runtime_error("global model diverged");

            monitor.record(t, rec.avg_train_loss);
            EvalResult ev = evaluate(spec, next, data.test);
            rec.test_loss = ev.loss;
            rec.test_accuracy = ev.accuracy;
            rec.error_rate = error_rate(ev.accuracy);
            result.records.push_back(std::move(rec));

            prev_honest.clear();
            for (const auto& u : us.updates) {
                if (!u.sybil) prev_honest.push_back(u.params);
            }
            prev_global = global;
            global = std::move(next);
        } catch (const std::runtime_error&) {
            // divergence is an expected attack outcome, not a failure
            result.diverged = true;
            break;
        }
    }
    result.final_model = global;
    return result;
}

std::string format_metrics(const std::vector<RoundRecord>& records, MetricsFormat format) {
    if (records.empty()) throw std::invalid_argument("no records to emit");
    auto real = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };

    std::string out;
    if (format == MetricsFormat::kCsv) {
        out += "round,avg_train_loss,test_loss,test_accuracy,error_rate,"
               "defense_triggered,excluded_lo,excluded_hi\n";
        for (const auto& r : records) {
            out += std::to_string(r.round) + ',' + real(r.avg_train_loss) + ',' +
                   real(r.test_loss) + ',' + real(r.test_accuracy) + ',' + real(r.error_rate) +
                   ',' + (r.defense_triggered ? "1" : "0") + ',' +
                   std::to_string(r.excluded ? r.excluded->lo : 0) + ',' +
                   std::to_string(r.excluded ? r.excluded->hi : 0) + '\n';
        }
    } else {
        for (const auto& r : records) {
            out += "{\"round\":" + std::to_string(r.round) +
                   ",\"avg_train_loss\":" + real(r.avg_train_loss) +
                   ",\"test_loss\":" + real(r.test_loss) +
                   ",\"test_accuracy\":" + real(r.test_accuracy) +
                   ",\"error_rate\":" + real(r.error_rate) +
                   ",\"defense_triggered\":" + (r.defense_triggered ? "true" : "false") +
                   ",\"excluded_lo\":" + std::to_string(r.excluded ? r.excluded->lo : 0) +
                   ",\"excluded_hi\":" + std::to_string(r.excluded ? r.excluded->hi : 0) + "}\n";
        }
    }
    return out;
}

void emit_metrics(const std::vector<RoundRecord>& records, const std::string& out_path,
                  MetricsFormat format) {
    std::string body = format_metrics(records, format);
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + out_path);
    f << body;
    if (!f) throw std::runtime_error("write failed: " + out_path);
}

}  // namespace fedsim

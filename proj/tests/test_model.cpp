#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fedsim/model.hpp"

using namespace fedsim;

namespace {

std::vector<int> all_indices(const Dataset& ds) {
    std::vector<int> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

// Recover the gradient local_train used for a single full-batch step.
ParamVector one_step_gradient(const ModelSpec& spec, const ParamVector& w, const Dataset& ds,
                              double eta) {
    auto idx = all_indices(ds);
    RngStream rng = RngStream::derive(1, {1});
    ParamVector next = local_train(spec, w, ds, idx, 1, ds.size(), eta, rng);
    return (w - next) / eta;
}

}  // namespace

TEST_CASE("param_count matches layer shapes") {
    CHECK(ModelSpec::logistic(784, 10).param_count() == 784 * 10 + 10);
    CHECK(ModelSpec::mlp(784, 64, 10).param_count() == 784 * 64 + 64 + 64 * 10 + 10);
}

TEST_CASE("init_params is seed-deterministic and bounded") {
    ModelSpec spec = ModelSpec::mlp(6, 4, 3);
    ParamVector a = init_params(spec, 11);
    ParamVector b = init_params(spec, 11);
    ParamVector c = init_params(spec, 12);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == spec.param_count());
    CHECK(a.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("analytic gradient matches central finite differences") {
    Dataset ds = generate_synthetic(30, 4, 3, 21);
    const double h = 1e-4;

    for (ModelSpec spec : {ModelSpec::logistic(4, 3), ModelSpec::mlp(4, 6, 3)}) {
        ParamVector w = init_params(spec, 5);
        // move off the tiny init so ReLU kinks are unlikely to sit on the FD step
        w *= 10.0;
        ParamVector g = one_step_gradient(spec, w, ds, 0.1);
        auto idx = all_indices(ds);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            ParamVector wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            double fd = (subset_loss(spec, wp, ds, idx) - subset_loss(spec, wm, ds, idx)) / (2 * h);
            worst = std::max(worst, std::abs(g[j] - fd));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("single logistic step reproduces the hand-computed softmax gradient") {
    // one example x = (1, 2), label 0, weights all zero: softmax = (1/2, 1/2),
    // delta = p - onehot = (-1/2, 1/2), gW = x deltaT, gb = delta
    Dataset ds;
    ds.features.resize(1, 2);
    ds.features << 1.0, 2.0;
    ds.labels = {0};
    ds.num_classes = 2;

    ModelSpec spec = ModelSpec::logistic(2, 2);
    ParamVector w = ParamVector::Zero(spec.param_count());
    ParamVector g = one_step_gradient(spec, w, ds, 0.5);

    // layout: W (2x2 column-major) then b(2)
    CHECK(g[0] == doctest::Approx(-0.5).epsilon(1e-6));  // W(0,0)
    CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-6));  // W(1,0)
    CHECK(g[2] == doctest::Approx(0.5).epsilon(1e-6));   // W(0,1)
    CHECK(g[3] == doctest::Approx(1.0).epsilon(1e-6));   // W(1,1)
    CHECK(g[4] == doctest::Approx(-0.5).epsilon(1e-6));  // b(0)
    CHECK(g[5] == doctest::Approx(0.5).epsilon(1e-6));   // b(1)
}

TEST_CASE("local_train is deterministic in the stream and exact identity at eta=0") {
    Dataset ds = generate_synthetic(40, 5, 4, 31);
    ModelSpec spec = ModelSpec::mlp(5, 6, 4);
    ParamVector w = init_params(spec, 2);
    auto idx = all_indices(ds);

    RngStream r1 = RngStream::derive(3, {7});
    RngStream r2 = RngStream::derive(3, {7});
    ParamVector a = local_train(spec, w, ds, idx, 3, 8, 0.05, r1);
    ParamVector b = local_train(spec, w, ds, idx, 3, 8, 0.05, r2);
    CHECK(a == b);

    RngStream r3 = RngStream::derive(3, {7});
    ParamVector frozen = local_train(spec, w, ds, idx, 3, 8, 0.0, r3);
    CHECK(frozen == w);  // bitwise

    RngStream r4 = RngStream::derive(4, {7});
    ParamVector c = local_train(spec, w, ds, idx, 3, 8, 0.05, r4);
    CHECK(a != c);  // a different shuffle order changes the SGD path
}

TEST_CASE("local_train reduces the training loss") {
    Dataset ds = generate_synthetic(200, 6, 3, 41);
    ModelSpec spec = ModelSpec::mlp(6, 8, 3);
    ParamVector w = init_params(spec, 1);
    auto idx = all_indices(ds);
    RngStream rng = RngStream::derive(1, {2});
    ParamVector trained = local_train(spec, w, ds, idx, 5, 10, 0.05, rng);
    CHECK(subset_loss(spec, trained, ds, idx) < subset_loss(spec, w, ds, idx));
}

TEST_CASE("local_train rejects bad arguments and non-finite blow-ups") {
    Dataset ds = generate_synthetic(20, 4, 2, 51);
    ModelSpec spec = ModelSpec::logistic(4, 2);
    ParamVector w = init_params(spec, 1);
    auto idx = all_indices(ds);
    RngStream rng = RngStream::derive(1, {3});

    CHECK_THROWS_AS(local_train(spec, w, ds, idx, 0, 8, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(local_train(spec, w, ds, idx, 1, 0, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(local_train(spec, w, ds, idx, 1, 8, -0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(local_train(spec, w, ds, {}, 1, 8, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(local_train(spec, ParamVector::Zero(3), ds, idx, 1, 8, 0.1, rng),
                    std::invalid_argument);
    // a non-finite weight poisons the whole SGD pass
    ParamVector winf = w;
    winf[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(local_train(spec, winf, ds, idx, 1, 4, 0.1, rng), std::runtime_error);
}

TEST_CASE("uniform zero weights give loss ln(num_classes)") {
    Dataset ds = generate_synthetic(60, 5, 6, 61);
    ModelSpec spec = ModelSpec::logistic(5, 6);
    ParamVector w = ParamVector::Zero(spec.param_count());
    EvalResult r = evaluate(spec, w, ds);
    CHECK(r.loss == doctest::Approx(std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("client_cost with equal batches equals the plain mean loss") {
    Dataset ds = generate_synthetic(64, 4, 4, 71);
    ModelSpec spec = ModelSpec::mlp(4, 5, 4);
    ParamVector w = init_params(spec, 9);
    auto idx = all_indices(ds);
    // 64 = 8 batches of 8: mean of batch means == overall mean
    CHECK(client_cost(spec, w, ds, idx, 8) ==
          doctest::Approx(subset_loss(spec, w, ds, idx)).epsilon(1e-12));
    CHECK(client_cost(spec, w, ds, idx, 64) ==
          doctest::Approx(evaluate(spec, w, take_prefix(ds, 64)).loss).epsilon(1e-12));
}

TEST_CASE("client_cost averages per-batch means over uneven tail batches") {
    Dataset ds = generate_synthetic(10, 3, 2, 81);
    ModelSpec spec = ModelSpec::logistic(3, 2);
    ParamVector w = init_params(spec, 4);
    std::vector<int> idx = {0, 1, 2, 3, 4, 5, 6};  // batches of 3: {3,3,1}

    double b1 = subset_loss(spec, w, ds, std::vector<int>{0, 1, 2});
    double b2 = subset_loss(spec, w, ds, std::vector<int>{3, 4, 5});
    double b3 = subset_loss(spec, w, ds, std::vector<int>{6});
    CHECK(client_cost(spec, w, ds, idx, 3) == doctest::Approx((b1 + b2 + b3) / 3.0).epsilon(1e-12));
}

TEST_CASE("evaluate reports exact accuracy on a separable toy set") {
    Dataset ds;
    ds.features.resize(4, 1);
    ds.features << -2.0, -1.0, 1.0, 2.0;
    ds.labels = {0, 0, 1, 1};
    ds.num_classes = 2;
    ModelSpec spec = ModelSpec::logistic(1, 2);
    ParamVector w(spec.param_count());
    w << -1.0, 1.0, 0.0, 0.0;  // W = (-1, 1), b = 0: logit_1 > logit_0 iff x > 0
    CHECK(evaluate(spec, w, ds).accuracy == doctest::Approx(1.0));
    CHECK_THROWS_AS(evaluate(spec, w, Dataset{}), std::invalid_argument);
}

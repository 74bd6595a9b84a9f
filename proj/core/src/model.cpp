#include "fedsim/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedsim {

namespace {

// Forward/backward over one batch, templated on scalar: float for the SGD
// inner loop (throughput), double for loss reporting and evaluation.
template <typename Scalar>
struct Net {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    struct LayerView {
        Eigen::Map<const Mat> W;
        Eigen::Map<const Vec> b;
    };

    static std::vector<LayerView> map_layers(const ModelSpec& spec, const Scalar* p) {
        std::vector<LayerView> layers;
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
            int in = spec.layer_sizes[l], out = spec.layer_sizes[l + 1];
            layers.push_back({Eigen::Map<const Mat>(p + off, in, out),
                              Eigen::Map<const Vec>(p + off + std::size_t(in) * out, out)});
            off += std::size_t(in) * out + out;
        }
        return layers;
    }

    // Returns (mean loss, correct predictions); fills *grad with the mean
    // cross-entropy gradient when given.
    static std::pair<double, int> batch(const ModelSpec& spec, const Vec& w, Mat X,
                                        const int* labels, int count, Vec* grad) {
        auto layers = map_layers(spec, w.data());
        const int L = static_cast<int>(layers.size());

        std::vector<Mat> acts;  // acts[l] = input of layer l
        acts.reserve(L + 1);
        acts.push_back(std::move(X));
        for (int l = 0; l < L; ++l) {
            Mat z = (acts[l] * layers[l].W).rowwise() + layers[l].b.transpose();
            if (l + 1 < L) z = z.cwiseMax(Scalar(0));
            acts.push_back(std::move(z));
        }

        Mat& logits = acts[L];
        Vec row_max = logits.rowwise().maxCoeff();
        Mat shifted = logits.colwise() - row_max;
        Mat expz = shifted.array().exp();
        Vec denom = expz.rowwise().sum();

        double loss = 0.0;
        int correct = 0;
        for (int i = 0; i < count; ++i) {
            loss += double(std::log(denom(i))) - double(shifted(i, labels[i]));
            int arg;
            logits.row(i).maxCoeff(&arg);
            if (arg == labels[i]) ++correct;
        }
        loss /= count;

        if (grad != nullptr) {
            grad->resize(w.size());
            // softmax probabilities minus one-hot targets, batch-averaged
            Mat delta = expz.array().colwise() / denom.array();
            for (int i = 0; i < count; ++i) delta(i, labels[i]) -= Scalar(1);
            delta /= Scalar(count);

            std::size_t off = w.size();
            for (int l = L - 1; l >= 0; --l) {
                int in = spec.layer_sizes[l], out = spec.layer_sizes[l + 1];
                off -= std::size_t(in) * out + out;
                Eigen::Map<Mat> gW(grad->data() + off, in, out);
                Eigen::Map<Vec> gb(grad->data() + off + std::size_t(in) * out, out);
                gW.noalias() = acts[l].transpose() * delta;
                gb = delta.colwise().sum();
                if (l > 0) {
                    Mat da = delta * layers[l].W.transpose();
                    delta = da.cwiseProduct(
                        (acts[l].array() > Scalar(0)).template cast<Scalar>().matrix());
                }
            }
        }
        return {loss, correct};
    }

    // Per-example cross-entropy losses for one forward pass.
    static std::vector<double> example_losses(const ModelSpec& spec, const Vec& w, Mat X,
                                              const int* labels, int count) {
        auto layers = map_layers(spec, w.data());
        const int L = static_cast<int>(layers.size());
        Mat act = std::move(X);
        for (int l = 0; l < L; ++l) {
            Mat z = (act * layers[l].W).rowwise() + layers[l].b.transpose();
            if (l + 1 < L) z = z.cwiseMax(Scalar(0));
            act = std::move(z);
        }
        Vec row_max = act.rowwise().maxCoeff();
        Mat shifted = act.colwise() - row_max;
        Vec denom = shifted.array().exp().rowwise().sum();
        std::vector<double> losses(count);
        for (int i = 0; i < count; ++i) {
            losses[i] = double(std::log(denom(i))) - double(shifted(i, labels[i]));
        }
        return losses;
    }

    static Mat gather_rows(const Mat& X, std::span<const int> idx, int begin, int count) {
        Mat out(count, X.cols());
        for (int i = 0; i < count; ++i) out.row(i) = X.row(idx[begin + i]);
        return out;
    }
};

using NetF = Net<float>;
using NetD = Net<double>;

}  // namespace

ModelSpec ModelSpec::logistic(int feature_dim, int num_classes) {
    return {ModelKind::kLogisticRegression, {feature_dim, num_classes}};
}

ModelSpec ModelSpec::mlp(int feature_dim, int hidden, int num_classes) {
    return {ModelKind::kMlp, {feature_dim, hidden, num_classes}};
}

int ModelSpec::param_count() const {
    int total = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        total += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
    }
    return total;
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    RngStream rng = RngStream::derive(seed, {0x1417});
    ParamVector w(spec.param_count());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.uniform(-0.05, 0.05);
    return w;
}

ParamVector local_train(const ModelSpec& spec, const ParamVector& w, const Dataset& ds,
                        std::span<const int> indices, int epochs, int batch_size, double eta,
                        RngStream& rng) {
    if (w.size() != spec.param_count()) throw std::invalid_argument("parameter dimension mismatch");
    if (epochs < 1 || batch_size < 1) throw std::invalid_argument("epochs and batch size must be >= 1");
    if (eta < 0.0) throw std::invalid_argument("learning rate must be >= 0");
    if (indices.empty()) throw std::invalid_argument("client owns no examples");

    NetF::Vec wf = w.cast<float>();
    NetF::Vec grad(w.size());
    const float eta_f = static_cast<float>(eta);

    const int n = static_cast<int>(indices.size());
    // gather the client's rows once; epochs then shuffle local positions only
    NetF::Mat base(n, ds.features.cols());
    for (int i = 0; i < n; ++i) base.row(i) = ds.features.row(indices[i]).cast<float>();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> batch_labels;

    for (int e = 0; e < epochs; ++e) {
        for (int i = n; i > 1; --i) {
            int j = static_cast<int>(rng.below(i));
            std::swap(order[i - 1], order[j]);
        }
        for (int start = 0; start < n; start += batch_size) {
            int count = std::min(batch_size, n - start);
            NetF::Mat X(count, base.cols());
            for (int i = 0; i < count; ++i) X.row(i) = base.row(order[start + i]);
            batch_labels.resize(count);
            for (int i = 0; i < count; ++i) batch_labels[i] = ds.labels[indices[order[start + i]]];
            NetF::batch(spec, wf, std::move(X), batch_labels.data(), count, &grad);
            if (eta != 0.0) wf -= eta_f * grad;
        }
    }
    if (!wf.allFinite()) throw std::runtime_error("local training produced non-finite parameters");
    if (eta == 0.0) return w;  // exact identity, no float round-trip
    return wf.cast<double>();
}

EvalResult evaluate(const ModelSpec& spec, const ParamVector& w, const Dataset& ds) {
    if (ds.size() == 0) throw std::invalid_argument("cannot evaluate on an empty dataset");
    if (w.size() != spec.param_count()) throw std::invalid_argument("parameter dimension mismatch");

    const int chunk = 512;
    double loss_sum = 0.0;
    int correct = 0;
    for (int start = 0; start < ds.size(); start += chunk) {
        int count = std::min(chunk, ds.size() - start);
        NetD::Mat X = ds.features.middleRows(start, count);
        auto [loss, ok] = NetD::batch(spec, w, std::move(X), ds.labels.data() + start, count, nullptr);
        loss_sum += loss * count;
        correct += ok;
    }
    return {loss_sum / ds.size(), static_cast<double>(correct) / ds.size()};
}

double client_cost(const ModelSpec& spec, const ParamVector& w, const Dataset& ds,
                   std::span<const int> indices, int batch_size) {
    if (indices.empty()) throw std::invalid_argument("client owns no examples");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (w.size() != spec.param_count()) throw std::invalid_argument("parameter dimension mismatch");

    const int n = static_cast<int>(indices.size());
    NetD::Mat X = NetD::gather_rows(ds.features, indices, 0, n);
    std::vector<int> batch_labels(n);
    for (int i = 0; i < n; ++i) batch_labels[i] = ds.labels[indices[i]];
    std::vector<double> losses =
        NetD::example_losses(spec, w, std::move(X), batch_labels.data(), n);

    // Mean of per-batch mean losses over consecutive batch_size-sized cuts.
    double sum = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += batch_size) {
        int count = std::min(batch_size, n - start);
        double batch_sum = 0.0;
        for (int i = 0; i < count; ++i) batch_sum += losses[start + i];
        sum += batch_sum / count;
        ++batches;
    }
    return sum / batches;
}

double subset_loss(const ModelSpec& spec, const ParamVector& w, const Dataset& ds,
                   std::span<const int> indices) {
    return client_cost(spec, w, ds, indices, static_cast<int>(indices.size()));
}

}  // namespace fedsim

#include "robin/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace robin {

scalar bce_loss(const Vector& probs, const Vector& labels) {
    if (probs.size() != labels.size())
        throw ShapeError("bce_loss: probs/labels length mismatch");
    const auto p = probs.array().max(1e-12).min(1.0 - 1e-12);
    const auto y = labels.array();
    return -(y * p.log() + (1.0 - y) * (1.0 - p).log()).mean();
}

Matrix bce_dlogits(const Vector& probs, const Vector& labels) {
    const scalar n = static_cast<scalar>(probs.size());
    Matrix d(probs.size(), 1);
    d.col(0) = (probs - labels) / n;
    return d;
}

void adam_step(Vector& params, const Vector& grads, AdamState& state,
               const TrainConfig& cfg) {
    if (params.size() != grads.size())
        throw ShapeError("adam_step: params/grads size mismatch");
    if (state.t == 0) {
        state.m = Vector::Zero(params.size());
        state.v = Vector::Zero(params.size());
    }
    ++state.t;
    state.m = cfg.adam_beta1 * state.m + (1.0 - cfg.adam_beta1) * grads;
    state.v = cfg.adam_beta2 * state.v.array().matrix() +
              (1.0 - cfg.adam_beta2) * grads.array().square().matrix();
    const scalar bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<scalar>(state.t));
    const scalar bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<scalar>(state.t));
    params.array() -= cfg.learning_rate * (state.m.array() / bc1) /
                      ((state.v.array() / bc2).sqrt() + cfg.adam_eps);
}

Model train(const ModelConfig& mcfg, const Dataset& dataset, const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw DataError("train: epochs must be >= 1");
    if (cfg.learning_rate <= 0) throw DataError("train: learning_rate must be > 0");
    const index_t n = dataset.n();
    if (n < 1) throw DataError("train: empty dataset");

    ModelConfig mc = mcfg;
    mc.input_dim = static_cast<int>(dataset.k());
    Model model = build(mc);
    model.feature_names = dataset.schema.feature_names();
    model.norm_stats = dataset.norm_stats;
    for (auto* se : [&] {
             std::vector<SELayer*> v;
             if (model.se_input) v.push_back(&*model.se_input);
             for (auto& l : model.se) v.push_back(&l);
             return v;
         }())
        se->ema_beta = cfg.ema_beta;

    Vector theta = flatten_params(model);
    AdamState adam;
    Rng shuffle_rng(Rng::derive(cfg.seed, 0x5Eu));

    const index_t batch = (cfg.batch_size <= 0) ? n : std::min<index_t>(cfg.batch_size, n);
    std::vector<index_t> order(n);
    std::iota(order.begin(), order.end(), index_t(0));

    model.train_log.clear();
    model.train_log.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) {
            for (index_t i = n - 1; i > 0; --i) {
                const index_t j =
                    static_cast<index_t>(shuffle_rng.uniform_int(i + 1));
                std::swap(order[i], order[j]);
            }
        }
        scalar epoch_loss = 0;
        index_t seen = 0;
        for (index_t start = 0; start < n; start += batch) {
            const index_t b = std::min(batch, n - start);
            Matrix X(b, dataset.k());
            Vector y(b);
            for (index_t i = 0; i < b; ++i) {
                X.row(i) = dataset.features.row(order[start + i]);
                y(i) = dataset.labels(order[start + i]);
            }
            ForwardCache cache;
            const Vector probs = forward(model, X, Mode::Train, &cache);
            const scalar loss = bce_loss(probs, y);
            if (!std::isfinite(loss)) {
                std::ostringstream os;
                os << "train: non-finite loss at epoch " << epoch;
                throw NumericError(os.str());
            }
            epoch_loss += loss * static_cast<scalar>(b);
            seen += b;
            const Vector grads =
                backward(model, cache, Mode::Train, bce_dlogits(probs, y));
            if (cfg.optimizer == Optimizer::Adam) {
                adam_step(theta, grads, adam, cfg);
            } else {
                theta -= cfg.learning_rate * grads;
            }
            set_params(model, theta);
            update_frozen_stats(model, se_batch_descriptors(model, cache));
        }
        model.train_log.push_back(epoch_loss / static_cast<scalar>(seen));
    }
    return model;
}

void export_loss_curve(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write loss curve: " + path);
    out << "epoch,loss\n";
    out.precision(17);
    for (std::size_t e = 0; e < model.train_log.size(); ++e)
        out << e << "," << model.train_log[e] << "\n";
}

}  // namespace robin

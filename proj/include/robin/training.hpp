#pragma once

#include "robin/data.hpp"
#include "robin/model.hpp"

namespace robin {

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
    int epochs = 500;
    int batch_size = 0;  // 0 = full batch
    scalar learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    scalar adam_beta1 = 0.9;
    scalar adam_beta2 = 0.999;
    scalar adam_eps = 1e-8;
    scalar ema_beta = 0.9;
    std::uint64_t seed = 0;
};

/// Mean over the batch of per-sample binary cross-entropy; probabilities are
/// clamped to [1e-12, 1-1e-12] before the logs.
scalar bce_loss(const Vector& probs, const Vector& labels);

/// dLoss/dlogit for the sigmoid head under mean BCE: (p - y) / n.
Matrix bce_dlogits(const Vector& probs, const Vector& labels);

struct AdamState {
    Vector m, v;
    long t = 0;
};

/// One bias-corrected Adam update in place.
void adam_step(Vector& params, const Vector& grads, AdamState& state,
               const TrainConfig& cfg);

/// Run the optimizer on the (normalized) dataset; records loss per epoch and
/// freezes every SE layer's descriptor at completion. Deterministic given the
/// config seed. NaN loss aborts with the epoch in the message.
Model train(const ModelConfig& mcfg, const Dataset& dataset, const TrainConfig& cfg);

void export_loss_curve(const Model& model, const std::string& path);

}  // namespace robin

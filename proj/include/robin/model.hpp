#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robin/data.hpp"
#include "robin/layers.hpp"
#include "robin/types.hpp"

namespace robin {

enum class Variant { Robin, Senn, Sann, Dnn, Mlp };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct ModelConfig {
    Variant variant = Variant::Robin;
    int input_dim = 0;
    std::vector<int> block_widths = {64, 48, 32, 16};
    int embed_dim = 8;
    int reduction_ratio = 4;
    scalar attn_temperature = 1.0;
    std::uint64_t seed = 0;
};

struct Model {
    ModelConfig config;
    // robin: input-level SE + one SA + L (dense,SE) robustness blocks.
    // senn: input-level SE + L (dense,SE) blocks. sann: L SA layers.
    // dnn: L dense layers. mlp: 1 dense layer. Head is dense->sigmoid always.
    std::optional<SELayer> se_input;
    std::optional<SALayer> sa;
    std::vector<SALayer> sa_stack;
    std::vector<DenseLayer> blocks;
    std::vector<SELayer> se;  // parallel to blocks
    DenseLayer head;
    std::vector<scalar> train_log;
    std::vector<std::string> feature_names;  // frozen attribute descriptors
    std::optional<NormStats> norm_stats;     // training min-max, if trained

    bool has_se() const { return se_input.has_value(); }
    bool has_sa() const { return sa.has_value() || !sa_stack.empty(); }
};

/// Assemble and initialize an untrained model (Glorot-uniform weights,
/// zero biases, seeded).
Model build(const ModelConfig& config);

struct ForwardCache {
    Matrix X;
    std::vector<SACache> sa_caches;
    std::vector<std::vector<SACache>> sann_caches;
    Matrix sa_out;
    SECache se_input_cache;
    std::vector<DenseCache> block_caches;
    std::vector<SECache> se_caches;
    DenseCache head_cache;
    Matrix logits;  // n x 1
    Matrix hidden;  // h_L before any concat (representation export)
};

struct Artifacts {
    std::vector<Matrix> attn;          // per-sample d x d maps (if SA present)
    Vector se_importance;              // first-SE scores, one per attribute
    std::vector<Vector> se_deep;       // deeper SE scores (derived channels)
    Matrix hidden;                     // final hidden representation
};

/// Probabilities in (0,1). Train mode uses batch SE statistics; eval mode
/// requires frozen descriptors.
Vector forward(const Model& model, const Matrix& X, Mode mode,
               ForwardCache* cache = nullptr, Artifacts* artifacts = nullptr);

Vector predict(const Model& model, const Matrix& X, scalar threshold = 0.5);

// Trainable parameters in a fixed canonical order (frozen_z is state, not a
// parameter).
std::vector<const Matrix*> param_blocks(const Model& model);
std::vector<Matrix*> param_blocks(Model& model);
std::vector<std::string> param_names(const Model& model);
Vector flatten_params(const Model& model);
void set_params(Model& model, const Vector& theta);
index_t param_count(const Model& model);

/// Gradient of the mean-BCE training loss w.r.t. all parameters, flattened in
/// param_blocks order. `dlogits` is dLoss/dlogit, shape n x 1.
Vector backward(const Model& model, const ForwardCache& cache, Mode mode,
                const Matrix& dlogits);

/// Batch descriptors needed for the frozen-statistics EMA (one per SE layer,
/// input SE first), taken from a train-mode forward cache.
std::vector<Vector> se_batch_descriptors(const Model& model,
                                         const ForwardCache& cache);
void update_frozen_stats(Model& model, const std::vector<Vector>& descriptors);

}  // namespace robin

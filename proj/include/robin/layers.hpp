#pragma once

#include <vector>

#include "robin/numeric.hpp"
#include "robin/types.hpp"

namespace robin {

enum class Mode { Train, Eval };
enum class Activation { None, Relu, Sigmoid };

// ---------------------------------------------------------------------------
// Dense layer

struct DenseLayer {
    Matrix W;  // in x out
    Matrix b;  // 1 x out
    Activation act = Activation::Relu;
};

struct DenseCache {
    Matrix in;
    Matrix pre;  // pre-activation
};

struct DenseGrads {
    Matrix dW, db;
};

Matrix dense_forward(const DenseLayer& layer, const Matrix& X,
                     DenseCache* cache = nullptr);

/// Returns dX; fills parameter gradients.
Matrix dense_backward(const DenseLayer& layer, const DenseCache& cache,
                      const Matrix& dout, DenseGrads& grads);

// ---------------------------------------------------------------------------
// Squeeze-and-excitation

struct SELayer {
    Matrix W1;  // d x h, bottleneck h = max(d/r, min(d, 4))
    Matrix W2;  // h x d
    int reduction = 4;
    scalar ema_beta = 0.9;
    Vector frozen_z;  // batch-descriptor EMA, frozen at end of training
    bool has_frozen = false;
};

int se_bottleneck_width(int d, int reduction);

/// Per-column batch mean (the attribute descriptor).
Vector squeeze(const Matrix& X);

/// sigmoid(W2' relu(W1' z)) -- the importance scores, each in (0,1).
Vector excite(const SELayer& layer, const Vector& z);

struct SECache {
    Matrix in;
    Vector z, t, a, s;  // descriptor, bottleneck pre/post, scores
};

/// Train mode scores come from the current batch descriptor; eval mode from
/// frozen_z only (error if absent). Forward is pure: the EMA update is the
/// separate se_update_frozen step driven by the training loop.
Matrix se_forward(const SELayer& layer, const Matrix& X, Mode mode,
                  SECache* cache = nullptr);

void se_update_frozen(SELayer& layer, const Vector& batch_z);

struct SEGrads {
    Matrix dW1, dW2;
};

Matrix se_backward(const SELayer& layer, const SECache& cache, Mode mode,
                   const Matrix& dout, SEGrads& grads);

// ---------------------------------------------------------------------------
// Self-attention over attributes-as-tokens

struct SALayer {
    Matrix embed_w;  // d x e, per-attribute scalar-to-embedding weight
    Matrix embed_b;  // d x e
    Matrix Wk, Wq, Wv;  // e x e
    Matrix out_proj;    // e x 1
    scalar temperature = 1.0;  // softmax temperature for the scores
};

struct SACache {
    Vector x;
    Matrix E, K, Q, V, attn, context;
};

/// Per sample: tokens E[j] = x_j * embed_w[j] + embed_b[j]; K/Q/V = E * W;
/// attn = softmax_rows(Q K') (rows = queries); out = (attn V) out_proj.
/// No 1/sqrt(e) scaling.
Matrix sa_forward(const SALayer& layer, const Matrix& X,
                  std::vector<SACache>* caches = nullptr);

/// Attention maps only (one d x d row-stochastic matrix per sample).
std::vector<Matrix> sa_attention(const SALayer& layer, const Matrix& X);

struct SAGrads {
    Matrix dembed_w, dembed_b, dWk, dWq, dWv, dout_proj;
};

/// Returns dX; fills parameter gradients (accumulated over the batch).
Matrix sa_backward(const SALayer& layer, const std::vector<SACache>& caches,
                   const Matrix& dout, SAGrads& grads);

}  // namespace robin

#include "robin/model.hpp"

#include <cassert>

namespace robin {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Robin: return "robin";
        case Variant::Senn: return "senn";
        case Variant::Sann: return "sann";
        case Variant::Dnn: return "dnn";
        case Variant::Mlp: return "mlp";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    if (name == "robin") return Variant::Robin;
    if (name == "senn") return Variant::Senn;
    if (name == "sann") return Variant::Sann;
    if (name == "dnn") return Variant::Dnn;
    if (name == "mlp") return Variant::Mlp;
    throw DataError("unknown model variant: " + name);
}

namespace {

Matrix glorot(Rng& rng, index_t rows, index_t cols, index_t fan_in, index_t fan_out) {
    const scalar limit = std::sqrt(6.0 / static_cast<scalar>(fan_in + fan_out));
    Matrix m(rows, cols);
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j)
            m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    return m;
}

DenseLayer make_dense(Rng& rng, int in, int out, Activation act) {
    DenseLayer l;
    l.W = glorot(rng, in, out, in, out);
    l.b = Matrix::Zero(1, out);
    l.act = act;
    return l;
}

SELayer make_se(Rng& rng, int d, int reduction) {
    SELayer l;
    const int h = se_bottleneck_width(d, reduction);
    l.W1 = glorot(rng, d, h, d, h);
    l.W2 = glorot(rng, h, d, h, d);
    l.reduction = reduction;
    return l;
}

SALayer make_sa(Rng& rng, int d, int e, scalar temperature) {
    SALayer l;
    l.temperature = temperature;
    l.embed_w = glorot(rng, d, e, 1, e);
    l.embed_b = Matrix::Zero(d, e);
    l.Wk = glorot(rng, e, e, e, e);
    l.Wq = glorot(rng, e, e, e, e);
    l.Wv = glorot(rng, e, e, e, e);
    l.out_proj = glorot(rng, e, 1, e, 1);
    return l;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a;
    out.rightCols(b.cols()) = b;
    return out;
}

}  // namespace

Model build(const ModelConfig& config) {
    if (config.input_dim < 1) throw DataError("build: input_dim must be >= 1");
    if (config.block_widths.empty())
        throw DataError("build: block_widths must be non-empty");
    for (int w : config.block_widths)
        if (w < 1) throw DataError("build: block widths must be positive");

    Model m;
    m.config = config;
    if (config.variant == Variant::Mlp)
        m.config.block_widths = {config.block_widths.front()};

    Rng rng(Rng::derive(config.seed, 0xA11CE));
    const int k = config.input_dim;
    const auto& widths = m.config.block_widths;
    const int L = static_cast<int>(widths.size());

    switch (config.variant) {
        case Variant::Robin:
            m.se_input = make_se(rng, k, config.reduction_ratio);
            m.sa = make_sa(rng, k, config.embed_dim, config.attn_temperature);
            for (int l = 0; l < L; ++l) {
                const int in = (l == 0) ? k : widths[l - 1] + k;
                m.blocks.push_back(make_dense(rng, in, widths[l], Activation::Relu));
                m.se.push_back(make_se(rng, widths[l], config.reduction_ratio));
            }
            m.head = make_dense(rng, widths.back() + k, 1, Activation::None);
            break;
        case Variant::Senn:
            m.se_input = make_se(rng, k, config.reduction_ratio);
            for (int l = 0; l < L; ++l) {
                const int in = (l == 0) ? k : widths[l - 1];
                m.blocks.push_back(make_dense(rng, in, widths[l], Activation::Relu));
                m.se.push_back(make_se(rng, widths[l], config.reduction_ratio));
            }
            m.head = make_dense(rng, widths.back(), 1, Activation::None);
            break;
        case Variant::Sann:
            for (int l = 0; l < L; ++l)
                m.sa_stack.push_back(
                    make_sa(rng, k, config.embed_dim, config.attn_temperature));
            m.head = make_dense(rng, k, 1, Activation::None);
            break;
        case Variant::Dnn:
        case Variant::Mlp:
            for (std::size_t l = 0; l < widths.size(); ++l) {
                const int in = (l == 0) ? k : widths[l - 1];
                m.blocks.push_back(make_dense(rng, in, widths[l], Activation::Relu));
            }
            m.head = make_dense(rng, widths.back(), 1, Activation::None);
            break;
    }
    return m;
}

Vector forward(const Model& model, const Matrix& X, Mode mode,
               ForwardCache* cache, Artifacts* artifacts) {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.X = X;
    const Variant v = model.config.variant;
    const int L = static_cast<int>(model.blocks.size());

    Matrix a;
    switch (v) {
        case Variant::Robin: {
            // the input gate feeds both paths, so frozen descriptors damp
            // low-importance attributes before attention as well
            a = se_forward(*model.se_input, X, mode, &c.se_input_cache);
            c.sa_out = sa_forward(*model.sa, a, &c.sa_caches);
            c.block_caches.resize(L);
            c.se_caches.resize(L);
            for (int l = 0; l < L; ++l) {
                const Matrix in = (l == 0) ? a : hconcat(a, c.sa_out);
                const Matrix h =
                    dense_forward(model.blocks[l], in, &c.block_caches[l]);
                a = se_forward(model.se[l], h, mode, &c.se_caches[l]);
            }
            c.hidden = a;
            a = hconcat(a, c.sa_out);
            break;
        }
        case Variant::Senn: {
            a = se_forward(*model.se_input, X, mode, &c.se_input_cache);
            c.block_caches.resize(L);
            c.se_caches.resize(L);
            for (int l = 0; l < L; ++l) {
                const Matrix h =
                    dense_forward(model.blocks[l], a, &c.block_caches[l]);
                a = se_forward(model.se[l], h, mode, &c.se_caches[l]);
            }
            c.hidden = a;
            break;
        }
        case Variant::Sann: {
            a = X;
            c.sann_caches.resize(model.sa_stack.size());
            for (std::size_t i = 0; i < model.sa_stack.size(); ++i)
                a = sa_forward(model.sa_stack[i], a, &c.sann_caches[i]);
            c.hidden = a;
            break;
        }
        case Variant::Dnn:
        case Variant::Mlp: {
            a = X;
            c.block_caches.resize(L);
            for (int l = 0; l < L; ++l)
                a = dense_forward(model.blocks[l], a, &c.block_caches[l]);
            c.hidden = a;
            break;
        }
    }

    c.logits = dense_forward(model.head, a, &c.head_cache);
    Vector probs = sigmoid(c.logits).col(0);

    if (artifacts) {
        artifacts->hidden = c.hidden;
        if (v == Variant::Robin) {
            artifacts->attn.clear();
            for (const auto& sc : c.sa_caches) artifacts->attn.push_back(sc.attn);
        } else if (v == Variant::Sann && !c.sann_caches.empty()) {
            artifacts->attn.clear();
            for (const auto& sc : c.sann_caches.front())
                artifacts->attn.push_back(sc.attn);
        }
        if (model.se_input) {
            artifacts->se_importance = c.se_input_cache.s;
            artifacts->se_deep.clear();
            for (const auto& sc : c.se_caches) artifacts->se_deep.push_back(sc.s);
        }
    }
    return probs;
}

Vector predict(const Model& model, const Matrix& X, scalar threshold) {
    const Vector probs = forward(model, X, Mode::Eval);
    return (probs.array() >= threshold).cast<scalar>();
}

namespace {

template <typename ModelT, typename MatT>
std::vector<MatT*> collect_params(ModelT& m) {
    std::vector<MatT*> out;
    auto add_sa = [&out](auto& sa) {
        out.push_back(&sa.embed_w);
        out.push_back(&sa.embed_b);
        out.push_back(&sa.Wk);
        out.push_back(&sa.Wq);
        out.push_back(&sa.Wv);
        out.push_back(&sa.out_proj);
    };
    if (m.se_input) {
        out.push_back(&m.se_input->W1);
        out.push_back(&m.se_input->W2);
    }
    if (m.sa) add_sa(*m.sa);
    for (auto& sa : m.sa_stack) add_sa(sa);
    for (std::size_t l = 0; l < m.blocks.size(); ++l) {
        out.push_back(&m.blocks[l].W);
        out.push_back(&m.blocks[l].b);
        if (l < m.se.size()) {
            out.push_back(&m.se[l].W1);
            out.push_back(&m.se[l].W2);
        }
    }
    out.push_back(&m.head.W);
    out.push_back(&m.head.b);
    return out;
}

}  // namespace

std::vector<const Matrix*> param_blocks(const Model& model) {
    return collect_params<const Model, const Matrix>(model);
}

std::vector<Matrix*> param_blocks(Model& model) {
    return collect_params<Model, Matrix>(model);
}

std::vector<std::string> param_names(const Model& model) {
    std::vector<std::string> names;
    auto add_sa = [&names](const std::string& p) {
        for (const char* s : {"embed_w", "embed_b", "Wk", "Wq", "Wv", "out_proj"})
            names.push_back(p + "." + s);
    };
    if (model.se_input) {
        names.push_back("se_input.W1");
        names.push_back("se_input.W2");
    }
    if (model.sa) add_sa("sa");
    for (std::size_t i = 0; i < model.sa_stack.size(); ++i)
        add_sa("sa" + std::to_string(i));
    for (std::size_t l = 0; l < model.blocks.size(); ++l) {
        names.push_back("block" + std::to_string(l) + ".W");
        names.push_back("block" + std::to_string(l) + ".b");
        if (l < model.se.size()) {
            names.push_back("se" + std::to_string(l) + ".W1");
            names.push_back("se" + std::to_string(l) + ".W2");
        }
    }
    names.push_back("head.W");
    names.push_back("head.b");
    return names;
}

index_t param_count(const Model& model) {
    index_t n = 0;
    for (const Matrix* p : param_blocks(model)) n += p->size();
    return n;
}

Vector flatten_params(const Model& model) {
    Vector theta(param_count(model));
    index_t off = 0;
    for (const Matrix* p : param_blocks(model)) {
        for (index_t i = 0; i < p->rows(); ++i)
            for (index_t j = 0; j < p->cols(); ++j) theta(off++) = (*p)(i, j);
    }
    return theta;
}

void set_params(Model& model, const Vector& theta) {
    if (theta.size() != param_count(model))
        throw ShapeError("set_params: parameter vector size mismatch");
    index_t off = 0;
    for (Matrix* p : param_blocks(model)) {
        for (index_t i = 0; i < p->rows(); ++i)
            for (index_t j = 0; j < p->cols(); ++j) (*p)(i, j) = theta(off++);
    }
}

namespace {

void append_flat(Vector& out, index_t& off, const Matrix& g) {
    for (index_t i = 0; i < g.rows(); ++i)
        for (index_t j = 0; j < g.cols(); ++j) out(off++) = g(i, j);
}

}  // namespace

Vector backward(const Model& model, const ForwardCache& cache, Mode mode,
                const Matrix& dlogits) {
    const Variant v = model.config.variant;
    const int L = static_cast<int>(model.blocks.size());
    const int k = model.config.input_dim;

    DenseGrads head_g;
    Matrix dhead_in = dense_backward(model.head, cache.head_cache, dlogits, head_g);

    SEGrads se_input_g;
    SAGrads sa_g;
    std::vector<SAGrads> sann_g(model.sa_stack.size());
    std::vector<DenseGrads> block_g(L);
    std::vector<SEGrads> se_g(model.se.size());

    switch (v) {
        case Variant::Robin: {
            const int wL = model.config.block_widths.back();
            Matrix da = dhead_in.leftCols(wL);
            Matrix dsa_out = dhead_in.rightCols(k);
            for (int l = L - 1; l >= 0; --l) {
                const Matrix dh = se_backward(model.se[l], cache.se_caches[l],
                                              mode, da, se_g[l]);
                const Matrix din = dense_backward(model.blocks[l],
                                                  cache.block_caches[l], dh,
                                                  block_g[l]);
                if (l > 0) {
                    const int wp = model.config.block_widths[l - 1];
                    da = din.leftCols(wp);
                    dsa_out += din.rightCols(k);
                } else {
                    da = din;
                }
            }
            da += sa_backward(*model.sa, cache.sa_caches, dsa_out, sa_g);
            se_backward(*model.se_input, cache.se_input_cache, mode, da,
                        se_input_g);
            break;
        }
        case Variant::Senn: {
            Matrix da = dhead_in;
            for (int l = L - 1; l >= 0; --l) {
                const Matrix dh = se_backward(model.se[l], cache.se_caches[l],
                                              mode, da, se_g[l]);
                da = dense_backward(model.blocks[l], cache.block_caches[l], dh,
                                    block_g[l]);
            }
            se_backward(*model.se_input, cache.se_input_cache, mode, da,
                        se_input_g);
            break;
        }
        case Variant::Sann: {
            Matrix da = dhead_in;
            for (int i = static_cast<int>(model.sa_stack.size()) - 1; i >= 0; --i)
                da = sa_backward(model.sa_stack[i], cache.sann_caches[i], da,
                                 sann_g[i]);
            break;
        }
        case Variant::Dnn:
        case Variant::Mlp: {
            Matrix da = dhead_in;
            for (int l = L - 1; l >= 0; --l)
                da = dense_backward(model.blocks[l], cache.block_caches[l], da,
                                    block_g[l]);
            break;
        }
    }

    Vector flat(param_count(model));
    index_t off = 0;
    auto append_sa = [&](const SAGrads& g) {
        append_flat(flat, off, g.dembed_w);
        append_flat(flat, off, g.dembed_b);
        append_flat(flat, off, g.dWk);
        append_flat(flat, off, g.dWq);
        append_flat(flat, off, g.dWv);
        append_flat(flat, off, g.dout_proj);
    };
    if (model.se_input) {
        append_flat(flat, off, se_input_g.dW1);
        append_flat(flat, off, se_input_g.dW2);
    }
    if (model.sa) append_sa(sa_g);
    for (const auto& g : sann_g) append_sa(g);
    for (int l = 0; l < L; ++l) {
        append_flat(flat, off, block_g[l].dW);
        append_flat(flat, off, block_g[l].db);
        if (l < static_cast<int>(se_g.size())) {
            append_flat(flat, off, se_g[l].dW1);
            append_flat(flat, off, se_g[l].dW2);
        }
    }
    append_flat(flat, off, head_g.dW);
    append_flat(flat, off, head_g.db);
    assert(off == flat.size());
    return flat;
}

std::vector<Vector> se_batch_descriptors(const Model& model,
                                         const ForwardCache& cache) {
    std::vector<Vector> out;
    if (model.se_input) out.push_back(cache.se_input_cache.z);
    for (const auto& sc : cache.se_caches) out.push_back(sc.z);
    return out;
}

void update_frozen_stats(Model& model, const std::vector<Vector>& descriptors) {
    std::size_t i = 0;
    if (model.se_input) se_update_frozen(*model.se_input, descriptors.at(i++));
    for (auto& layer : model.se) se_update_frozen(layer, descriptors.at(i++));
}

}  // namespace robin

#include "robin/layers.hpp"

#include <sstream>

namespace robin {

namespace {

Matrix apply_activation(const Matrix& pre, Activation act) {
    switch (act) {
        case Activation::None: return pre;
        case Activation::Relu: return relu(pre);
        case Activation::Sigmoid: return sigmoid(pre);
    }
    return pre;
}

Matrix activation_backward(const Matrix& pre, Activation act, const Matrix& dout) {
    switch (act) {
        case Activation::None:
            return dout;
        case Activation::Relu:
            return (pre.array() > 0).cast<scalar>() * dout.array();
        case Activation::Sigmoid: {
            const Matrix s = sigmoid(pre);
            return s.array() * (1.0 - s.array()) * dout.array();
        }
    }
    return dout;
}

}  // namespace

// ---------------------------------------------------------------------------

Matrix dense_forward(const DenseLayer& layer, const Matrix& X, DenseCache* cache) {
    if (X.cols() != layer.W.rows()) {
        std::ostringstream os;
        os << "dense_forward: input width " << X.cols() << " != layer in_dim "
           << layer.W.rows();
        throw ShapeError(os.str());
    }
    Matrix pre = X * layer.W;
    pre.rowwise() += layer.b.row(0);
    if (cache) {
        cache->in = X;
        cache->pre = pre;
    }
    return apply_activation(pre, layer.act);
}

Matrix dense_backward(const DenseLayer& layer, const DenseCache& cache,
                      const Matrix& dout, DenseGrads& grads) {
    const Matrix dpre = activation_backward(cache.pre, layer.act, dout);
    grads.dW = cache.in.transpose() * dpre;
    grads.db = dpre.colwise().sum();
    return dpre * layer.W.transpose();
}

// ---------------------------------------------------------------------------

int se_bottleneck_width(int d, int reduction) {
    int h = std::max(d / reduction, 1);
    return std::max(h, std::min(d, 4));  // floor at 4, never above d
}

Vector squeeze(const Matrix& X) {
    if (X.rows() < 1) throw ShapeError("squeeze: empty batch");
    return X.colwise().mean().transpose();
}

Vector excite(const SELayer& layer, const Vector& z) {
    const Vector t = layer.W1.transpose() * z;
    const Vector a = t.cwiseMax(scalar(0));
    const Vector u = layer.W2.transpose() * a;
    return u.unaryExpr([](scalar x) { return sigmoid(x); });
}

Matrix se_forward(const SELayer& layer, const Matrix& X, Mode mode,
                  SECache* cache) {
    if (X.cols() != layer.W1.rows())
        throw ShapeError("se_forward: input width does not match layer");
    Vector z;
    if (mode == Mode::Train) {
        z = squeeze(X);
    } else {
        if (!layer.has_frozen)
            throw NumericError("se_forward: model not trained (no frozen descriptor)");
        z = layer.frozen_z;
    }
    const Vector t = layer.W1.transpose() * z;
    const Vector a = t.cwiseMax(scalar(0));
    const Vector u = layer.W2.transpose() * a;
    const Vector s = u.unaryExpr([](scalar x) { return sigmoid(x); });
    if (cache) {
        cache->in = X;
        cache->z = z;
        cache->t = t;
        cache->a = a;
        cache->s = s;
    }
    return X.array().rowwise() * s.transpose().array();
}

void se_update_frozen(SELayer& layer, const Vector& batch_z) {
    if (!layer.has_frozen) {
        layer.frozen_z = batch_z;
        layer.has_frozen = true;
    } else {
        layer.frozen_z =
            layer.ema_beta * layer.frozen_z + (1.0 - layer.ema_beta) * batch_z;
    }
}

Matrix se_backward(const SELayer& layer, const SECache& cache, Mode mode,
                   const Matrix& dout, SEGrads& grads) {
    const index_t b = cache.in.rows();
    // direct scaling path
    Matrix dX = dout.array().rowwise() * cache.s.transpose().array();
    // through the scores
    const Vector ds = (dout.array() * cache.in.array()).colwise().sum().transpose();
    const Vector du =
        cache.s.array() * (1.0 - cache.s.array()) * ds.array();
    grads.dW2 = cache.a * du.transpose();
    const Vector da = layer.W2 * du;
    const Vector dt = (cache.t.array() > 0).cast<scalar>() * da.array();
    grads.dW1 = cache.z * dt.transpose();
    if (mode == Mode::Train) {
        // z is the batch column mean of the input
        const Vector dz = layer.W1 * dt;
        dX.array().rowwise() += (dz / static_cast<scalar>(b)).transpose().array();
    }
    return dX;
}

// ---------------------------------------------------------------------------

Matrix sa_forward(const SALayer& layer, const Matrix& X,
                  std::vector<SACache>* caches) {
    const index_t d = layer.embed_w.rows();
    if (X.cols() != d)
        throw ShapeError("sa_forward: input width does not match attribute count");
    const index_t n = X.rows();
    Matrix out(n, d);
    if (caches) caches->resize(n);
    for (index_t i = 0; i < n; ++i) {
        const Vector x = X.row(i).transpose();
        Matrix E = layer.embed_w.array().colwise() * x.array();
        E += layer.embed_b;
        const Matrix K = E * layer.Wk;
        const Matrix Q = E * layer.Wq;
        const Matrix V = E * layer.Wv;
        const Matrix attn =
            softmax_rows((Q * K.transpose()) / layer.temperature);
        const Matrix context = attn * V;
        out.row(i) = (context * layer.out_proj).transpose();
        if (caches) {
            SACache& c = (*caches)[i];
            c.x = x;
            c.E = E;
            c.K = K;
            c.Q = Q;
            c.V = V;
            c.attn = attn;
            c.context = context;
        }
    }
    return out;
}

std::vector<Matrix> sa_attention(const SALayer& layer, const Matrix& X) {
    std::vector<SACache> caches;
    sa_forward(layer, X, &caches);
    std::vector<Matrix> maps;
    maps.reserve(caches.size());
    for (auto& c : caches) maps.push_back(std::move(c.attn));
    return maps;
}

Matrix sa_backward(const SALayer& layer, const std::vector<SACache>& caches,
                   const Matrix& dout, SAGrads& grads) {
    const index_t d = layer.embed_w.rows();
    const index_t e = layer.embed_w.cols();
    const index_t n = dout.rows();
    grads.dembed_w = Matrix::Zero(d, e);
    grads.dembed_b = Matrix::Zero(d, e);
    grads.dWk = Matrix::Zero(e, e);
    grads.dWq = Matrix::Zero(e, e);
    grads.dWv = Matrix::Zero(e, e);
    grads.dout_proj = Matrix::Zero(e, 1);
    Matrix dX = Matrix::Zero(n, d);

    for (index_t i = 0; i < n; ++i) {
        const SACache& c = caches[i];
        const Vector dy = dout.row(i).transpose();  // d
        const Matrix dcontext = dy * layer.out_proj.transpose();  // d x e
        grads.dout_proj += c.context.transpose() * dy;
        const Matrix dattn = dcontext * c.V.transpose();  // d x d
        Matrix dV = c.attn.transpose() * dcontext;        // d x e
        // softmax rows backward
        Matrix dscores(d, d);
        for (index_t r = 0; r < d; ++r) {
            const auto a = c.attn.row(r).array();
            const scalar dot = (dattn.row(r).array() * a).sum();
            dscores.row(r) = (a * (dattn.row(r).array() - dot)).matrix();
        }
        dscores /= layer.temperature;
        const Matrix dQ = dscores * c.K;
        const Matrix dK = dscores.transpose() * c.Q;
        grads.dWk += c.E.transpose() * dK;
        grads.dWq += c.E.transpose() * dQ;
        grads.dWv += c.E.transpose() * dV;
        const Matrix dE = dK * layer.Wk.transpose() + dQ * layer.Wq.transpose() +
                          dV * layer.Wv.transpose();
        grads.dembed_w += (dE.array().colwise() * c.x.array()).matrix();
        grads.dembed_b += dE;
        dX.row(i) = (dE.array() * layer.embed_w.array())
                        .rowwise()
                        .sum()
                        .matrix()
                        .transpose();
    }
    return dX;
}

}  // namespace robin

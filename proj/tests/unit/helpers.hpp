#pragma once

#include <string>
#include <vector>

#include "robin/data.hpp"
#include "robin/model.hpp"
#include "robin/training.hpp"

namespace test_helpers {

using namespace robin;

inline std::string asset(const std::string& name) {
    return std::string(ROBIN_ASSET_DIR) + "/" + name;
}

inline Matrix random_matrix(index_t rows, index_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline Vector random_vector(index_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(n);
    for (index_t i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

/// Minimal schema: k categorical feature attributes F0..F{k-1} with category
/// lists c0..c3, plus a LABEL target with positive label "pos".
inline Schema toy_schema(int k) {
    Schema s;
    s.positive_label = "pos";
    for (int j = 0; j < k; ++j) {
        AttributeSchema a;
        a.name = "F" + std::to_string(j);
        a.kind = AttrKind::Categorical;
        a.categories = {"c0", "c1", "c2", "c3"};
        s.attributes.push_back(std::move(a));
    }
    AttributeSchema t;
    t.name = "LABEL";
    t.kind = AttrKind::Categorical;
    t.categories = {"pos", "neg"};
    t.is_target = true;
    t.is_feature = false;
    s.attributes.push_back(std::move(t));
    return s;
}

/// Random dataset in [0,1] with labels from a noiseless linear rule on the
/// first two features (separable by construction when noise == 0).
inline Dataset separable_dataset(index_t n, int k, std::uint64_t seed,
                                 scalar label_noise = 0.0) {
    Rng rng(seed);
    Dataset ds;
    ds.schema = toy_schema(k);
    ds.features.resize(n, k);
    ds.labels.resize(n);
    for (index_t i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) ds.features(i, j) = rng.uniform();
        bool y = ds.features(i, 0) + ds.features(i, 1) > 1.0;
        if (label_noise > 0 && rng.uniform() < label_noise) y = !y;
        ds.labels(i) = y ? 1.0 : 0.0;
    }
    return ds;
}

/// Flat-parameter training-loss closure for whole-model gradient checks.
inline scalar model_loss_at(const Model& model, const Vector& theta,
                            const Matrix& X, const Vector& y, Mode mode) {
    Model probe = model;
    set_params(probe, theta);
    return bce_loss(forward(probe, X, mode), y);
}

/// Freeze SE descriptors from one train-mode pass so eval mode works.
inline void freeze_from_batch(Model& model, const Matrix& X) {
    ForwardCache cache;
    forward(model, X, Mode::Train, &cache);
    update_frozen_stats(model, se_batch_descriptors(model, cache));
}

}  // namespace test_helpers

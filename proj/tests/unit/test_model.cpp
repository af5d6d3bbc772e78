#include <doctest.h>

#include <cstdio>

#include "helpers.hpp"
#include "robin/model.hpp"
#include "robin/model_io.hpp"

using namespace robin;
using test_helpers::freeze_from_batch;
using test_helpers::model_loss_at;
using test_helpers::random_matrix;

namespace {

ModelConfig small_config(Variant v, int k) {
    ModelConfig c;
    c.variant = v;
    c.input_dim = k;
    c.block_widths = {7, 5};
    c.embed_dim = 3;
    c.seed = 17;
    return c;
}

}  // namespace

TEST_CASE("build dimension bookkeeping follows the concat rule") {
    ModelConfig c;
    c.variant = Variant::Robin;
    c.input_dim = 31;
    c.block_widths = {64, 48, 32, 16};
    const Model m = build(c);
    REQUIRE(m.blocks.size() == 4);
    CHECK(m.blocks[0].W.rows() == 31);
    CHECK(m.blocks[1].W.rows() == 64 + 31);
    CHECK(m.blocks[2].W.rows() == 48 + 31);
    CHECK(m.blocks[3].W.rows() == 32 + 31);
    CHECK(m.head.W.rows() == 16 + 31);
    CHECK(m.se_input.has_value());
    CHECK(m.sa.has_value());
    CHECK(m.se.size() == 4);

    c.variant = Variant::Senn;
    const Model s = build(c);
    CHECK(s.blocks[1].W.rows() == 64);
    CHECK(s.head.W.rows() == 16);
    CHECK_FALSE(s.has_sa());

    c.variant = Variant::Sann;
    const Model a = build(c);
    CHECK(a.sa_stack.size() == 4);
    CHECK(a.blocks.empty());
    CHECK(a.head.W.rows() == 31);
}

TEST_CASE("mlp forces a single layer and has the affine parameter count") {
    ModelConfig c = small_config(Variant::Mlp, 9);
    c.block_widths = {12, 34, 56};
    const Model m = build(c);
    CHECK(m.blocks.size() == 1);
    CHECK(param_count(m) == (9 + 1) * 12 + (12 + 1) * 1);
}

TEST_CASE("zero head weights give probability one half") {
    Model m = build(small_config(Variant::Dnn, 4));
    m.head.W.setZero();
    m.head.b.setZero();
    const Vector p = forward(m, random_matrix(6, 4, 1), Mode::Eval);
    CHECK((p.array() - 0.5).abs().maxCoeff() < 1e-15);
}

TEST_CASE("eval mode is batch-composition invariant") {
    Model m = build(small_config(Variant::Robin, 5));
    freeze_from_batch(m, random_matrix(12, 5, 2));

    const Matrix batch_a = random_matrix(4, 5, 3);
    Matrix batch_b = random_matrix(7, 5, 4);
    batch_b.row(2) = batch_a.row(0);
    const Vector pa = forward(m, batch_a, Mode::Eval);
    const Vector pb = forward(m, batch_b, Mode::Eval);
    CHECK(pa(0) == pb(2));
}

TEST_CASE("predict threshold rules") {
    Model m = build(small_config(Variant::Dnn, 3));
    m.head.W.setZero();
    m.head.b.setZero();  // every probability is exactly 0.5
    const Matrix X = random_matrix(4, 3, 5);
    CHECK(predict(m, X, 0.5).minCoeff() == 1.0);  // >= rule at the boundary
    CHECK(predict(m, X, 0.0).minCoeff() == 1.0);
    CHECK(predict(m, X, 0.9).maxCoeff() == 0.0);
}

TEST_CASE("whole-model gradients pass grad_check for every variant") {
    const Matrix X = random_matrix(8, 6, 6).cwiseAbs();
    Vector y(8);
    y << 1, 0, 1, 1, 0, 0, 1, 0;

    for (Variant v : {Variant::Robin, Variant::Senn, Variant::Sann,
                      Variant::Dnn, Variant::Mlp}) {
        CAPTURE(variant_name(v));
        Model m = build(small_config(v, 6));
        const Vector theta = flatten_params(m);

        ForwardCache cache;
        const Vector probs = forward(m, X, Mode::Train, &cache);
        const Vector analytic =
            backward(m, cache, Mode::Train, bce_dlogits(probs, y));

        auto f = [&](const Vector& t) {
            return model_loss_at(m, t, X, y, Mode::Train);
        };
        CHECK(grad_check_vec(f, theta, analytic, 1e-4) < 1e-4);
    }
}

TEST_CASE("robin collapses to senn when the attention path is zeroed") {
    ModelConfig rc = small_config(Variant::Robin, 6);
    Model robin = build(rc);
    robin.sa->out_proj.setZero();  // sa_out becomes identically zero

    // senn twin sharing the non-attention parameters; concat columns that
    // consumed sa_out are dropped
    ModelConfig sc = rc;
    sc.variant = Variant::Senn;
    Model senn = build(sc);
    senn.se_input = robin.se_input;
    senn.se = robin.se;
    const int k = rc.input_dim;
    for (std::size_t l = 0; l < robin.blocks.size(); ++l) {
        senn.blocks[l] = robin.blocks[l];
        if (l > 0)
            senn.blocks[l].W =
                robin.blocks[l].W.topRows(robin.blocks[l].W.rows() - k);
    }
    senn.head = robin.head;
    senn.head.W = robin.head.W.topRows(robin.head.W.rows() - k);

    const Matrix X = random_matrix(9, 6, 7);
    const Vector pr = forward(robin, X, Mode::Train);
    const Vector ps = forward(senn, X, Mode::Train);
    CHECK((pr - ps).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("parameter flatten/set round trip and canonical naming") {
    Model m = build(small_config(Variant::Robin, 5));
    const Vector theta = flatten_params(m);
    CHECK(theta.size() == param_count(m));
    const auto names = param_names(m);
    CHECK(names.size() == param_blocks(m).size());
    CHECK(names.front() == "se_input.W1");
    CHECK(names.back() == "head.b");

    Model other = build(small_config(Variant::Robin, 5));
    Vector shifted = theta;
    shifted.array() += 0.25;
    set_params(other, shifted);
    CHECK(flatten_params(other) == shifted);
    CHECK_THROWS_AS(set_params(other, Vector::Zero(3)), ShapeError);
}

TEST_CASE("serialization round trip is bit-exact") {
    Model m = build(small_config(Variant::Robin, 6));
    m.feature_names = {"a", "b", "c", "d", "e", "f"};
    freeze_from_batch(m, random_matrix(10, 6, 8));
    m.train_log = {0.7, 0.6, 0.5};
    NormStats ns;
    ns.col_min = test_helpers::random_vector(6, 9);
    ns.col_max = ns.col_min.array() + 1.0;
    m.norm_stats = ns;

    const std::string path = "/tmp/robin_test_model.json";
    save_model(m, path);
    const Model loaded = load_model(path);

    CHECK(flatten_params(loaded) == flatten_params(m));
    CHECK(loaded.feature_names == m.feature_names);
    CHECK(loaded.train_log == m.train_log);
    REQUIRE(loaded.norm_stats.has_value());
    CHECK(loaded.norm_stats->col_min == ns.col_min);
    CHECK(loaded.se_input->frozen_z == m.se_input->frozen_z);

    const Matrix X = random_matrix(20, 6, 10);
    const Vector before = forward(m, X, Mode::Eval);
    const Vector after = forward(loaded, X, Mode::Eval);
    CHECK(before == after);  // bitwise
}

TEST_CASE("artifacts expose attention maps and importance scores") {
    Model m = build(small_config(Variant::Robin, 5));
    freeze_from_batch(m, random_matrix(8, 5, 11));
    Artifacts art;
    const Matrix X = random_matrix(3, 5, 12);
    forward(m, X, Mode::Eval, nullptr, &art);
    CHECK(art.attn.size() == 3);
    CHECK(art.attn.front().rows() == 5);
    CHECK(art.se_importance.size() == 5);
    CHECK(art.se_deep.size() == 2);
    CHECK(art.hidden.rows() == 3);
    CHECK(art.hidden.cols() == 5);  // final block width

    CHECK_THROWS_AS(parse_variant("tree"), DataError);
}

TEST_CASE("eval before training reports the missing frozen state") {
    const Model m = build(small_config(Variant::Senn, 4));
    CHECK_THROWS_AS(forward(m, random_matrix(2, 4, 13), Mode::Eval),
                    NumericError);
}

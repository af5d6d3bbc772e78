// Acceptance suite: ten self-contained criteria, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "robin/data.hpp"
#include "robin/evaluation.hpp"
#include "robin/interpret.hpp"
#include "robin/model_io.hpp"
#include "robin/stress.hpp"
#include "robin/training.hpp"

using namespace robin;

namespace {

std::string asset(const std::string& name) {
    return std::string(ROBIN_ASSET_DIR) + "/" + name;
}

Matrix random_matrix(index_t rows, index_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

Dataset synthetic_dataset(std::uint64_t seed, index_t n, scalar missing_rate) {
    const Schema schema = load_schema(asset("schema.json"));
    const GeneratorConfig gen =
        load_generator_config(asset("generator_config.json"), schema);
    const RawTable t = synth_generate(gen, schema, seed, n, 0.6, missing_rate);
    return label_encode(t, schema);
}

scalar pair_count_auc(const Vector& scores, const Vector& labels) {
    scalar wins = 0;
    long pairs = 0;
    for (index_t i = 0; i < scores.size(); ++i) {
        if (labels(i) == 0.0) continue;
        for (index_t j = 0; j < scores.size(); ++j) {
            if (labels(j) != 0.0) continue;
            ++pairs;
            if (scores(i) > scores(j)) wins += 1.0;
            else if (scores(i) == scores(j)) wins += 0.5;
        }
    }
    return wins / static_cast<scalar>(pairs);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------

bool criterion_gradients() {
    // instance chosen so no relu pre-activation sits exactly on its kink,
    // where a two-sided difference and the subgradient legitimately disagree
    const Matrix X = random_matrix(8, 6, 6).cwiseAbs();
    Vector y(8);
    y << 1, 0, 1, 1, 0, 0, 1, 0;
    for (Variant v : {Variant::Robin, Variant::Senn, Variant::Sann,
                      Variant::Dnn, Variant::Mlp}) {
        ModelConfig mc;
        mc.variant = v;
        mc.input_dim = 6;
        mc.block_widths = {7, 5};
        mc.embed_dim = 3;
        mc.seed = 17;
        Model m = build(mc);
        ForwardCache cache;
        const Vector probs = forward(m, X, Mode::Train, &cache);
        const Vector analytic =
            backward(m, cache, Mode::Train, bce_dlogits(probs, y));
        auto f = [&](const Vector& theta) {
            Model probe = m;
            set_params(probe, theta);
            return bce_loss(forward(probe, X, Mode::Train), y);
        };
        const scalar err = grad_check_vec(f, flatten_params(m), analytic, 1e-4);
        if (err >= 1e-4) {
            std::cerr << "  gradient error " << err << " for "
                      << variant_name(v) << "\n";
            return false;
        }
    }
    return true;
}

bool criterion_attention_rows() {
    Rng meta(202);
    for (int call = 0; call < 1000; ++call) {
        const index_t d = 2 + static_cast<index_t>(meta.uniform_int(6));
        const index_t e = 2 + static_cast<index_t>(meta.uniform_int(4));
        SALayer layer;
        layer.embed_w = random_matrix(d, e, 5000 + call);
        layer.embed_b = random_matrix(d, e, 6000 + call);
        layer.Wk = random_matrix(e, e, 7000 + call);
        layer.Wq = random_matrix(e, e, 8000 + call);
        layer.Wv = random_matrix(e, e, 9000 + call);
        layer.out_proj = random_matrix(e, 1, 10000 + call);
        const Matrix X = 4.0 * random_matrix(2, d, 11000 + call);
        for (const Matrix& attn : sa_attention(layer, X))
            for (index_t r = 0; r < attn.rows(); ++r)
                if (std::abs(attn.row(r).sum() - 1.0) >= 1e-9) return false;
    }
    return true;
}

bool criterion_metric_oracles() {
    Rng rng(303);
    for (int trial = 0; trial < 1000; ++trial) {
        ConfusionCounts c;
        c.tp = static_cast<long>(rng.uniform_int(40));
        c.tn = static_cast<long>(rng.uniform_int(40));
        c.fp = static_cast<long>(rng.uniform_int(40));
        c.fn = static_cast<long>(rng.uniform_int(40));
        if (c.total() == 0) c.tn = 1;
        const MetricsReport r = metrics_from_counts(c);
        const scalar tp = c.tp, tn = c.tn, fp = c.fp, fn = c.fn;
        auto safe = [](scalar num, scalar den) { return den > 0 ? num / den : 0.0; };
        const scalar prec = safe(tp, tp + fp);
        const scalar sens = safe(tp, tp + fn);
        if (std::abs(r.accuracy - (tp + tn) / (tp + tn + fp + fn)) >= 1e-15)
            return false;
        if (std::abs(r.precision - prec) >= 1e-15) return false;
        if (std::abs(r.sensitivity - sens) >= 1e-15) return false;
        if (std::abs(r.specificity - safe(tn, tn + fp)) >= 1e-15) return false;
        if (std::abs(r.f1 - safe(2.0 * prec * sens, prec + sens)) >= 1e-15)
            return false;
    }
    for (int trial = 0; trial < 500; ++trial) {
        Vector s(14), y(14);
        bool pos = false, neg = false;
        for (int i = 0; i < 14; ++i) {
            s(i) = static_cast<scalar>(rng.uniform_int(7)) / 6.0;
            y(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
            (y(i) != 0.0 ? pos : neg) = true;
        }
        if (!pos) y(0) = 1.0;
        if (!neg) y(1) = 0.0;
        if (std::abs(roc_auc(s, y) - pair_count_auc(s, y)) >= 1e-12)
            return false;
    }
    return true;
}

bool criterion_static_importance() {
    const Dataset ds = normalize(synthetic_dataset(404, 180, 0.05));
    ModelConfig mc;
    mc.variant = Variant::Senn;
    mc.block_widths = {16, 8};
    mc.seed = 404;
    TrainConfig tc;
    tc.epochs = 80;
    tc.seed = 404;
    const Model model = train(mc, ds, tc);

    const Dataset probe = normalize(synthetic_dataset(405, 200, 0.05));
    Vector reference;
    for (int b = 0; b < 10; ++b) {
        Artifacts art;
        forward(model, probe.features.middleRows(b * 20, 20), Mode::Eval,
                nullptr, &art);
        if (b == 0) reference = art.se_importance;
        else if (!(art.se_importance == reference)) return false;  // bitwise
    }
    return true;
}

bool criterion_separable_performance() {
    const Dataset ds = synthetic_dataset(505, 400, 0.1);
    ModelConfig robin_cfg;
    robin_cfg.variant = Variant::Robin;
    robin_cfg.block_widths = {32, 16};
    robin_cfg.embed_dim = 4;
    TrainConfig tc;
    tc.epochs = 150;

    const EvalReport robin_rep = kfold_cv(ds, 10, robin_cfg, tc, 505);
    ModelConfig mlp_cfg = robin_cfg;
    mlp_cfg.variant = Variant::Mlp;
    const EvalReport mlp_rep = kfold_cv(ds, 10, mlp_cfg, tc, 505);

    const scalar acc = robin_rep.metric("accuracy").mean;
    const scalar auc = robin_rep.metric("auc").mean;
    const scalar mlp_auc = mlp_rep.metric("auc").mean;
    std::cerr << "  robin acc " << acc << ", auc " << auc << "; mlp auc "
              << mlp_auc << "\n";
    return acc >= 0.90 && auc >= 0.95 && auc > mlp_auc;
}

bool criterion_stress_monotonicity() {
    ModelConfig mc;
    mc.block_widths = {24, 12};
    mc.embed_dim = 4;
    mc.attn_temperature = 8.0;  // soft attention favours token averaging
    TrainConfig tc;
    tc.epochs = 200;

    int degrade_ok = 0, ordering_ok = 0;
    for (int s = 0; s < 3; ++s) {
        const Dataset ds = synthetic_dataset(600 + s, 240, 0.05);
        const StressReport report = stress_protocol(
            ds, {Variant::Robin, Variant::Dnn}, {StressKind::Noise},
            {0.2, 0.5}, 25, mc, tc, 600 + s, false, 1);

        auto auc_of = [&](const std::string& variant, const std::string& kind,
                          scalar strength) {
            for (const auto& cell : report.cells)
                if (cell.variant == variant && cell.kind == kind &&
                    cell.strength == strength)
                    return cell.metric("auc").mean;
            throw DataError("missing stress cell");
        };
        const scalar robin_base = auc_of("robin", "baseline", 0.0);
        const scalar dnn_base = auc_of("dnn", "baseline", 0.0);
        const bool degrades =
            auc_of("robin", "noise", 0.5) < robin_base &&
            auc_of("dnn", "noise", 0.5) < dnn_base;
        const scalar robin_drop = robin_base - auc_of("robin", "noise", 0.2);
        const scalar dnn_drop = dnn_base - auc_of("dnn", "noise", 0.2);
        if (degrades) ++degrade_ok;
        if (robin_drop <= dnn_drop) ++ordering_ok;
        std::cerr << "  seed " << s << ": degrade=" << degrades
                  << " robin_drop=" << robin_drop << " dnn_drop=" << dnn_drop
                  << "\n";
    }
    return degrade_ok >= 2 && ordering_ok >= 2;
}

bool criterion_collapse_detection() {
    const Dataset ds = synthetic_dataset(707, 220, 0.05);
    ModelConfig mc;
    mc.block_widths = {24, 12};
    mc.embed_dim = 4;
    TrainConfig tc;
    tc.epochs = 200;
    const StressReport report = stress_protocol(
        ds, {Variant::Robin, Variant::Dnn, Variant::Mlp}, {StressKind::Both},
        {0.5}, 5, mc, tc, 707, false, 1);

    bool non_se_flagged = false;
    for (const auto& cell : report.cells)
        if (cell.collapse_flagged &&
            (cell.variant == "dnn" || cell.variant == "mlp" ||
             cell.variant == "sann"))
            non_se_flagged = true;
    const std::string json = stress_report_to_json(report);
    const bool states_no_collapse =
        json.find("no majority-class collapse detected") != std::string::npos;
    std::cerr << "  non-SE flagged=" << non_se_flagged
              << " explicit-no-collapse=" << states_no_collapse << "\n";
    return non_se_flagged || states_no_collapse;
}

bool criterion_cli_determinism() {
    const Schema schema = load_schema(asset("schema.json"));
    const GeneratorConfig gen =
        load_generator_config(asset("generator_config.json"), schema);
    const std::string csv = "/tmp/robin_accept_data.csv";
    save_csv(csv, schema, synth_generate(gen, schema, 808, 151, 0.64, 0.05));

    auto run = [&](const std::string& out) {
        std::ostringstream cmd;
        cmd << ROBIN_CLI_PATH << " crossval --schema " << asset("schema.json")
            << " --data " << csv << " --variant dnn --epochs 60 --k 5"
            << " --seed 99 --out " << out << " > /dev/null";
        return std::system(cmd.str().c_str());
    };
    if (run("/tmp/robin_accept_report_a.json") != 0) return false;
    if (run("/tmp/robin_accept_report_b.json") != 0) return false;
    return read_file("/tmp/robin_accept_report_a.json") ==
           read_file("/tmp/robin_accept_report_b.json");
}

bool criterion_serialization() {
    const Dataset ds = normalize(synthetic_dataset(909, 120, 0.05));
    ModelConfig mc;
    mc.variant = Variant::Robin;
    mc.block_widths = {12, 8};
    mc.embed_dim = 4;
    mc.seed = 909;
    TrainConfig tc;
    tc.epochs = 40;
    tc.seed = 909;
    const Model model = train(mc, ds, tc);
    save_model(model, "/tmp/robin_accept_model.json");
    const Model loaded = load_model("/tmp/robin_accept_model.json");

    const Matrix X = random_matrix(100, ds.k(), 910);
    const Vector a = forward(model, X, Mode::Eval);
    const Vector b = forward(loaded, X, Mode::Eval);
    return a == b;  // bitwise over 100 random rows
}

bool criterion_pipeline_fidelity() {
    const Schema s = load_schema(asset("schema.json"));
    RawTable t;
    for (int i = 0; i < 5; ++i) {
        std::vector<std::string> row(s.attributes.size());
        for (std::size_t a = 0; a < s.attributes.size(); ++a)
            row[a] = s.attributes[a].kind == AttrKind::Numeric
                         ? std::to_string(20 + i)
                         : s.attributes[a].categories.front();
        row[s.index_of("SPEECH")] = "";  // one missing cell per row
        t.rows.push_back(std::move(row));
    }
    t.rows[1][s.target_index()] = "major depressive disorder";
    const Dataset encoded = label_encode(t, s);
    index_t speech_col = -1;
    const auto names = s.feature_names();
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] == "SPEECH") speech_col = static_cast<index_t>(j);
    for (index_t i = 0; i < 5; ++i)
        if (encoded.features(i, speech_col) != -1.0) return false;
    if (encoded.labels(1) != 0.0 || encoded.labels(0) != 1.0) return false;

    const Dataset train = normalize(synthetic_dataset(111, 60, 0.1));
    if (train.features.minCoeff() < 0.0 || train.features.maxCoeff() > 1.0)
        return false;

    // test rows transform with training statistics only
    const Dataset test_raw = synthetic_dataset(112, 40, 0.1);
    const Dataset test = apply_normalization(test_raw, *train.norm_stats);
    for (index_t j = 0; j < test.k(); ++j) {
        const scalar lo = train.norm_stats->col_min(j);
        const scalar hi = train.norm_stats->col_max(j);
        for (index_t i = 0; i < test.n(); ++i) {
            const scalar want = hi > lo
                                    ? (test_raw.features(i, j) - lo) / (hi - lo)
                                    : 0.0;
            if (test.features(i, j) != want) return false;
        }
    }
    return true;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<bool()>>> criteria = {
        {"1 gradient correctness across all variants", criterion_gradients},
        {"2 attention rows sum to one", criterion_attention_rows},
        {"3 metric formula and auc pair-count oracles", criterion_metric_oracles},
        {"4 SE importance static across test batches", criterion_static_importance},
        {"5 separable-synthetic cross-validation performance",
         criterion_separable_performance},
        {"6 stress degradation and robustness ordering",
         criterion_stress_monotonicity},
        {"7 majority-class collapse detector exercised",
         criterion_collapse_detection},
        {"8 CLI crossval determinism", criterion_cli_determinism},
        {"9 serialization round trip bit-exact", criterion_serialization},
        {"10 pipeline encoding and normalization fidelity",
         criterion_pipeline_fidelity},
    };

    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        std::string note;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        std::printf("%s: criterion %s [%.1fs]%s\n", ok ? "PASS" : "FAIL",
                    name.c_str(), secs, note.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}

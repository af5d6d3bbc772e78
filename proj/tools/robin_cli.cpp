// Command-line front end: synth / train / crossval / evaluate / stress /
// explain. One command per invocation; every artifact-producing command
// writes a manifest next to its outputs.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "robin/data.hpp"
#include "robin/evaluation.hpp"
#include "robin/interpret.hpp"
#include "robin/model_io.hpp"
#include "robin/stress.hpp"
#include "robin/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace robin;

namespace {

constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char ch;
    while (in.get(ch)) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

struct Manifest {
    std::string command;
    json config = json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_clock_seconds = 0;

    void write(const std::string& path) const {
        json j;
        j["command"] = command;
        j["config"] = config;
        j["seed"] = seed;
        json in = json::object();
        for (const auto& p : inputs) in[p] = hex64(fnv1a_file(p));
        j["input_hashes"] = std::move(in);
        j["outputs"] = outputs;
        j["wall_clock_seconds"] = wall_clock_seconds;
        j["version"] = kVersion;
        std::ofstream out(path);
        if (!out) throw DataError("cannot write manifest: " + path);
        out << j.dump(2) << "\n";
    }
};

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += " ";
        s += argv[i];
    }
    return s;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ROBIN_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 0;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    json j;
    in >> j;
    if (!j.is_object()) throw DataError("config file must hold a JSON object");
    return j;
}

// Flags win over config-file values: a config key applies only when the
// matching long flag was not passed on the command line.
template <typename T>
void merge_key(const CLI::App& app, const json& cfg, const std::string& key,
               T& value) {
    if (cfg.contains(key) && app.count("--" + key) == 0)
        value = cfg.at(key).get<T>();
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

Dataset load_encoded(const std::string& schema_path,
                     const std::string& data_path) {
    const Schema schema = load_schema(schema_path);
    return label_encode(load_csv(data_path, schema), schema);
}

Optimizer parse_optimizer(const std::string& name) {
    if (name == "adam") return Optimizer::Adam;
    if (name == "sgd") return Optimizer::Sgd;
    throw CLI::ValidationError("--optimizer", "must be adam or sgd");
}

struct CommonTrainFlags {
    std::string schema = "assets/schema.json";
    std::string data;
    std::string variant = "robin";
    std::string optimizer = "adam";
    int epochs = 500;
    int batch = 0;
    double lr = 1e-3;
    std::uint64_t seed = default_seed();
    int jobs = 1;
    std::string config_path;

    void add_to(CLI::App* cmd, bool need_data = true) {
        cmd->add_option("--schema", schema, "Schema JSON path");
        auto* d = cmd->add_option("--data", data, "Input CSV path");
        if (need_data) d->required();
        cmd->add_option("--variant", variant,
                        "Model variant: robin|senn|sann|dnn|mlp");
        cmd->add_option("--epochs", epochs, "Training epochs");
        cmd->add_option("--batch", batch, "Mini-batch size (0 = full batch)");
        cmd->add_option("--lr", lr, "Learning rate");
        cmd->add_option("--optimizer", optimizer, "adam or sgd");
        cmd->add_option("--seed", seed, "Seed (falls back to ROBIN_SEED env)");
        cmd->add_option("--jobs", jobs, "Worker thread cap");
        cmd->add_option("--config", config_path,
                        "JSON config file; explicit flags override its keys");
    }

    void merge(const CLI::App& app) {
        const json cfg = load_config_file(config_path);
        merge_key(app, cfg, "schema", schema);
        merge_key(app, cfg, "data", data);
        merge_key(app, cfg, "variant", variant);
        merge_key(app, cfg, "epochs", epochs);
        merge_key(app, cfg, "batch", batch);
        merge_key(app, cfg, "lr", lr);
        merge_key(app, cfg, "optimizer", optimizer);
        merge_key(app, cfg, "seed", seed);
        merge_key(app, cfg, "jobs", jobs);
    }

    ModelConfig model_config() const {
        ModelConfig mc;
        mc.variant = parse_variant(variant);
        mc.seed = seed;
        return mc;
    }

    TrainConfig train_config() const {
        TrainConfig tc;
        tc.epochs = epochs;
        tc.batch_size = batch;
        tc.learning_rate = lr;
        tc.optimizer = parse_optimizer(optimizer);
        tc.seed = seed;
        return tc;
    }

    json snapshot() const {
        return {{"schema", schema}, {"data", data},         {"variant", variant},
                {"epochs", epochs}, {"batch", batch},       {"lr", lr},
                {"optimizer", optimizer}, {"jobs", jobs}};
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Interpretable attention-based tabular classifier"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic CSV");
    struct {
        std::string schema = "assets/schema.json";
        std::string gen_config = "assets/generator_config.json";
        std::uint64_t seed = default_seed();
        int n = 151;
        double positive_fraction = 0.6424;
        double missing_rate = 0.0;
        std::string out;
        std::string config_path;
    } sy;
    synth->add_option("--schema", sy.schema, "Schema JSON path");
    synth->add_option("--gen-config", sy.gen_config, "Generator config path");
    synth->add_option("--seed", sy.seed, "Seed (falls back to ROBIN_SEED env)");
    synth->add_option("--n", sy.n, "Number of rows")->check(CLI::PositiveNumber);
    synth->add_option("--positive-fraction", sy.positive_fraction,
                      "Positive-label fraction")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--missing-rate", sy.missing_rate,
                      "Per-cell blanking probability")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--out", sy.out, "Output CSV path")->required();
    synth->add_option("--config", sy.config_path,
                      "JSON config file; explicit flags override its keys");

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "Train one model on a CSV");
    CommonTrainFlags tr;
    tr.add_to(train_cmd);
    std::string out_model, loss_curve;
    train_cmd->add_option("--out-model", out_model, "Model JSON output path")
        ->required();
    train_cmd->add_option("--loss-curve", loss_curve,
                          "Optional per-epoch loss CSV");

    // ---- crossval ----
    auto* cv_cmd =
        app.add_subcommand("crossval", "Stratified k-fold cross-validation");
    CommonTrainFlags cv;
    cv.add_to(cv_cmd);
    int cv_k = 10;
    std::string cv_out;
    cv_cmd->add_option("--k", cv_k, "Fold count")->check(CLI::Range(2, 1000));
    cv_cmd->add_option("--out", cv_out, "Report JSON output path")->required();

    // ---- evaluate ----
    auto* ev_cmd =
        app.add_subcommand("evaluate", "Repeated stratified-split evaluation");
    CommonTrainFlags ev;
    ev.add_to(ev_cmd);
    double ev_split = 0.5;
    int ev_runs = 25;
    std::string ev_out;
    ev_cmd->add_option("--split", ev_split, "Training fraction")
        ->check(CLI::Range(0.01, 0.99));
    ev_cmd->add_option("--runs", ev_runs, "Repetitions")
        ->check(CLI::PositiveNumber);
    ev_cmd->add_option("--out", ev_out, "Report JSON output path")->required();

    // ---- stress ----
    auto* st_cmd = app.add_subcommand(
        "stress", "Perturbation robustness protocol over repeated splits");
    CommonTrainFlags st;
    st.add_to(st_cmd);
    std::string st_variants = "robin,senn,sann,dnn,mlp";
    std::string st_kinds = "noise,erase,both";
    std::string st_levels = "0.1,0.2,0.3333,0.5";
    int st_runs = 25;
    bool st_free = false;
    std::string st_out_dir;
    st_cmd->add_option("--variants", st_variants, "Comma-separated variants");
    st_cmd->add_option("--kinds", st_kinds,
                       "Comma-separated kinds: noise,erase,both");
    st_cmd->add_option("--levels", st_levels, "Comma-separated strengths");
    st_cmd->add_option("--runs", st_runs, "Repetitions")
        ->check(CLI::PositiveNumber);
    st_cmd->add_flag("--allow-free-levels", st_free,
                     "Permit strengths outside the declared set");
    st_cmd->add_option("--out-dir", st_out_dir, "Output directory")->required();

    // ---- explain ----
    auto* ex_cmd = app.add_subcommand(
        "explain", "Interpretability exports for a trained model");
    struct {
        std::string model;
        std::string schema = "assets/schema.json";
        std::string data;
        std::string samples = "0,1,2";
        std::string out_dir;
    } ex;
    ex_cmd->add_option("--model", ex.model, "Trained model JSON")->required();
    ex_cmd->add_option("--schema", ex.schema, "Schema JSON path");
    ex_cmd->add_option("--data", ex.data, "CSV to explain")->required();
    ex_cmd->add_option("--samples", ex.samples,
                       "Comma-separated row ids for heatmaps");
    ex_cmd->add_option("--out-dir", ex.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // normalize every parse failure to the usage exit code
        return app.exit(e) == 0 ? 0 : 1;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Manifest manifest;
    manifest.command = join_args(argc, argv);

    if (*synth) {
        const json cfg = load_config_file(sy.config_path);
        merge_key(*synth, cfg, "schema", sy.schema);
        merge_key(*synth, cfg, "gen-config", sy.gen_config);
        merge_key(*synth, cfg, "seed", sy.seed);
        merge_key(*synth, cfg, "n", sy.n);
        merge_key(*synth, cfg, "positive-fraction", sy.positive_fraction);
        merge_key(*synth, cfg, "missing-rate", sy.missing_rate);

        const Schema schema = load_schema(sy.schema);
        const GeneratorConfig gen = load_generator_config(sy.gen_config, schema);
        const RawTable table = synth_generate(gen, schema, sy.seed, sy.n,
                                              sy.positive_fraction,
                                              sy.missing_rate);
        save_csv(sy.out, schema, table);

        manifest.seed = sy.seed;
        manifest.config = {{"schema", sy.schema},
                           {"gen-config", sy.gen_config},
                           {"n", sy.n},
                           {"positive-fraction", sy.positive_fraction},
                           {"missing-rate", sy.missing_rate}};
        manifest.inputs = {sy.schema, sy.gen_config};
        manifest.outputs = {sy.out};
    } else if (*train_cmd) {
        tr.merge(*train_cmd);
        const Dataset encoded = load_encoded(tr.schema, tr.data);
        const Dataset normed = normalize(encoded);
        const Model model = train(tr.model_config(), normed, tr.train_config());
        save_model(model, out_model);
        manifest.outputs = {out_model};
        if (!loss_curve.empty()) {
            export_loss_curve(model, loss_curve);
            manifest.outputs.push_back(loss_curve);
        }
        manifest.seed = tr.seed;
        manifest.config = tr.snapshot();
        manifest.inputs = {tr.schema, tr.data};
        std::cout << "trained " << tr.variant << ": final loss "
                  << model.train_log.back() << "\n";
    } else if (*cv_cmd) {
        cv.merge(*cv_cmd);
        const json cfg = load_config_file(cv.config_path);
        merge_key(*cv_cmd, cfg, "k", cv_k);
        const Dataset encoded = load_encoded(cv.schema, cv.data);
        const EvalReport report =
            kfold_cv(encoded, cv_k, cv.model_config(), cv.train_config(),
                     cv.seed, CiMode::StudentT, cv.jobs);
        write_text(cv_out, report_to_json(report));
        std::cout << report_to_table(report);
        manifest.seed = cv.seed;
        manifest.config = cv.snapshot();
        manifest.config["k"] = cv_k;
        manifest.inputs = {cv.schema, cv.data};
        manifest.outputs = {cv_out};
    } else if (*ev_cmd) {
        ev.merge(*ev_cmd);
        const json cfg = load_config_file(ev.config_path);
        merge_key(*ev_cmd, cfg, "split", ev_split);
        merge_key(*ev_cmd, cfg, "runs", ev_runs);
        const Dataset encoded = load_encoded(ev.schema, ev.data);
        const EvalReport report =
            repeated_split(encoded, ev_split, ev_runs, ev.model_config(),
                           ev.train_config(), ev.seed, CiMode::StudentT,
                           ev.jobs);
        write_text(ev_out, report_to_json(report));
        std::cout << report_to_table(report);
        manifest.seed = ev.seed;
        manifest.config = ev.snapshot();
        manifest.config["split"] = ev_split;
        manifest.config["runs"] = ev_runs;
        manifest.inputs = {ev.schema, ev.data};
        manifest.outputs = {ev_out};
    } else if (*st_cmd) {
        st.merge(*st_cmd);
        const json cfg = load_config_file(st.config_path);
        merge_key(*st_cmd, cfg, "variants", st_variants);
        merge_key(*st_cmd, cfg, "kinds", st_kinds);
        merge_key(*st_cmd, cfg, "levels", st_levels);
        merge_key(*st_cmd, cfg, "runs", st_runs);

        std::vector<Variant> variants;
        for (const auto& v : split_list(st_variants))
            variants.push_back(parse_variant(v));
        std::vector<StressKind> kinds;
        for (const auto& k : split_list(st_kinds))
            kinds.push_back(parse_stress_kind(k));
        std::vector<scalar> levels;
        for (const auto& l : split_list(st_levels))
            levels.push_back(std::stod(l));
        if (variants.empty() || kinds.empty() || levels.empty())
            throw CLI::ValidationError(
                "--variants/--kinds/--levels", "must be non-empty lists");

        const Dataset encoded = load_encoded(st.schema, st.data);
        const StressReport report = stress_protocol(
            encoded, variants, kinds, levels, st_runs, st.model_config(),
            st.train_config(), st.seed, st_free, st.jobs);

        fs::create_directories(st_out_dir);
        const std::string report_path = st_out_dir + "/stress_report.json";
        const std::string csv_path = st_out_dir + "/stress_report.csv";
        const std::string curves_path = st_out_dir + "/stress_curves.csv";
        write_text(report_path, stress_report_to_json(report));
        write_text(csv_path, stress_report_to_csv(report));
        write_text(curves_path, stress_curves_to_csv(report));

        manifest.seed = st.seed;
        manifest.config = st.snapshot();
        manifest.config["variants"] = st_variants;
        manifest.config["kinds"] = st_kinds;
        manifest.config["levels"] = st_levels;
        manifest.config["runs"] = st_runs;
        manifest.inputs = {st.schema, st.data};
        manifest.outputs = {report_path, csv_path, curves_path};
    } else if (*ex_cmd) {
        const Model model = load_model(ex.model);
        if (!model.norm_stats)
            throw DataError(
                "model file carries no normalization statistics; retrain with "
                "this version before explaining");
        const Dataset encoded = load_encoded(ex.schema, ex.data);
        const Dataset normed = apply_normalization(encoded, *model.norm_stats);

        fs::create_directories(ex.out_dir);
        manifest.inputs = {ex.model, ex.schema, ex.data};

        if (model.has_se()) {
            const std::string path = ex.out_dir + "/importance.csv";
            write_importance_csv(global_importance(model), path);
            manifest.outputs.push_back(path);
        }
        if (model.has_sa()) {
            for (const auto& token : split_list(ex.samples)) {
                const index_t id = std::stol(token);
                if (id < 0 || id >= normed.n())
                    throw DataError("--samples row id out of range: " + token);
                const AttentionHeatmap hm = attention_heatmap(
                    model, normed.features.row(id).transpose(), id);
                const std::string base =
                    ex.out_dir + "/heatmap_" + std::to_string(id);
                write_heatmap_csv(hm, base + ".csv");
                write_heatmap_pgm(hm, base + ".pgm");
                manifest.outputs.push_back(base + ".csv");
                manifest.outputs.push_back(base + ".pgm");
            }
        }
        const Matrix reps = export_representations(model, normed.features);
        const std::string reps_path = ex.out_dir + "/representations.csv";
        write_representations_csv(reps, normed.labels, reps_path);
        manifest.outputs.push_back(reps_path);

        manifest.seed = model.config.seed;
        manifest.config = {{"model", ex.model},
                           {"schema", ex.schema},
                           {"data", ex.data},
                           {"samples", ex.samples}};
    }

    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::string manifest_path;
    if (*synth) manifest_path = sy.out + ".manifest.json";
    else if (*train_cmd) manifest_path = out_model + ".manifest.json";
    else if (*cv_cmd) manifest_path = cv_out + ".manifest.json";
    else if (*ev_cmd) manifest_path = ev_out + ".manifest.json";
    else if (*st_cmd) manifest_path = st_out_dir + "/manifest.json";
    else manifest_path = ex.out_dir + "/manifest.json";
    manifest.write(manifest_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "robin/stress.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "robin/parallel.hpp"

namespace robin {

std::string stress_kind_name(StressKind k) {
    switch (k) {
        case StressKind::Noise: return "noise";
        case StressKind::Erase: return "erase";
        case StressKind::Both: return "both";
    }
    return "?";
}

StressKind parse_stress_kind(const std::string& name) {
    if (name == "noise") return StressKind::Noise;
    if (name == "erase") return StressKind::Erase;
    if (name == "both") return StressKind::Both;
    throw DataError("unknown stress kind: " + name);
}

void validate_strength(scalar strength, bool allow_free) {
    if (strength < 0) throw DataError("stress strength must be >= 0");
    if (allow_free) return;
    const scalar declared[] = {0.0, 1.0 / 10, 1.0 / 5, 1.0 / 3, 1.0 / 2};
    for (scalar d : declared)
        if (std::abs(strength - d) < 1e-3) return;
    throw DataError(
        "stress strength outside the declared set {1/10, 1/5, 1/3, 1/2}; "
        "pass the free-level override to use it");
}

Matrix apply_noise(const Matrix& X_test, scalar sigma2, std::uint64_t seed) {
    if (sigma2 < 0) throw DataError("apply_noise: sigma2 must be >= 0");
    if (sigma2 == 0) return X_test;
    Rng rng(Rng::derive(seed, 0x4015E));
    const scalar sigma = std::sqrt(sigma2);
    Matrix out = X_test;
    for (index_t i = 0; i < out.rows(); ++i)
        for (index_t j = 0; j < out.cols(); ++j)
            out(i, j) += sigma * rng.normal();
    return out;
}

Matrix apply_erasure(const Matrix& X_test, scalar fraction,
                     const NormStats& stats, std::uint64_t seed) {
    if (!(fraction >= 0 && fraction <= 1))
        throw DataError("apply_erasure: fraction must be in [0,1]");
    const index_t total = X_test.size();
    const index_t count = static_cast<index_t>(
        std::llround(fraction * static_cast<scalar>(total)));
    if (count == 0) return X_test;

    // partial Fisher-Yates over flattened entry positions: exactly `count`
    // positions without replacement
    Rng rng(Rng::derive(seed, 0xE7A5E));
    std::vector<index_t> positions(total);
    for (index_t i = 0; i < total; ++i) positions[i] = i;
    for (index_t i = 0; i < count; ++i) {
        const index_t j =
            i + static_cast<index_t>(rng.uniform_int(total - i));
        std::swap(positions[i], positions[j]);
    }

    Matrix out = X_test;
    const index_t cols = X_test.cols();
    for (index_t i = 0; i < count; ++i) {
        const index_t r = positions[i] / cols;
        const index_t c = positions[i] % cols;
        out(r, c) = normalized_missing_value(stats, c);
    }
    return out;
}

Matrix apply_both(const Matrix& X_test, scalar strength, const NormStats& stats,
                  std::uint64_t seed) {
    const Matrix erased =
        apply_erasure(X_test, strength, stats, Rng::derive(seed, 1));
    return apply_noise(erased, strength, Rng::derive(seed, 2));
}

Matrix apply_stress(const Matrix& X_test, const StressSpec& spec,
                    const NormStats& stats) {
    switch (spec.kind) {
        case StressKind::Noise:
            return apply_noise(X_test, spec.strength, spec.seed);
        case StressKind::Erase:
            return apply_erasure(X_test, spec.strength, stats, spec.seed);
        case StressKind::Both:
            return apply_both(X_test, spec.strength, stats, spec.seed);
    }
    return X_test;
}

const MetricSummary& StressCell::metric(const std::string& name) const {
    for (const auto& [n, s] : metrics)
        if (n == name) return s;
    throw DataError("stress cell has no metric named " + name);
}

namespace {

const char* kMetricNames[] = {"accuracy", "f1",          "auc",
                              "precision", "sensitivity", "specificity"};

std::vector<scalar> metric_values(const MetricsReport& r) {
    return {r.accuracy, r.f1, r.auc, r.precision, r.sensitivity, r.specificity};
}

}  // namespace

std::vector<StressCell> stress_eval(
    const std::vector<std::pair<std::string, const Model*>>& models,
    const Dataset& test_norm, const NormStats& stats,
    const std::vector<StressSpec>& specs) {
    std::vector<StressCell> cells;
    for (const auto& spec : specs) {
        const Matrix perturbed = apply_stress(test_norm.features, spec, stats);
        for (const auto& [name, model] : models) {
            const Vector probs = forward(*model, perturbed, Mode::Eval);
            const MetricsReport r = evaluate_scores(probs, test_norm.labels);
            StressCell cell;
            cell.variant = name;
            cell.kind = stress_kind_name(spec.kind);
            cell.strength = spec.strength;
            const auto vals = metric_values(r);
            for (std::size_t m = 0; m < std::size(kMetricNames); ++m) {
                MetricSummary s;
                s.mean = vals[m];
                s.raw = {vals[m]};
                cell.metrics.emplace_back(kMetricNames[m], std::move(s));
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

StressReport stress_protocol(const Dataset& encoded,
                             const std::vector<Variant>& variants,
                             const std::vector<StressKind>& kinds,
                             const std::vector<scalar>& levels, int runs,
                             const ModelConfig& mcfg, const TrainConfig& tcfg,
                             std::uint64_t seed, bool allow_free_levels,
                             int jobs) {
    if (runs < 1) throw DataError("stress_protocol: runs must be >= 1");
    for (scalar s : levels) validate_strength(s, allow_free_levels);

    // (variant, kind, strength) -> raw metric values across runs
    struct Key {
        std::string variant, kind;
        scalar strength;
        bool operator<(const Key& o) const {
            return std::tie(variant, kind, strength) <
                   std::tie(o.variant, o.kind, o.strength);
        }
    };
    std::map<Key, std::vector<std::vector<scalar>>> raw;
    std::vector<std::vector<StressCell>> per_run_cells(runs);
    std::vector<scalar> per_run_pos(runs);
    std::vector<index_t> per_run_n(runs);

    parallel_for(runs, jobs, [&](int r) {
        const auto [train_idx, test_idx] =
            stratified_split(encoded.labels, 0.5, Rng::derive(seed, r));
        const Dataset train_norm = normalize(subset(encoded, train_idx));
        const Dataset test_norm = apply_normalization(subset(encoded, test_idx),
                                                      *train_norm.norm_stats);
        per_run_pos[r] = test_norm.labels.sum();
        per_run_n[r] = test_norm.n();

        std::vector<Model> trained;
        std::vector<std::pair<std::string, const Model*>> model_refs;
        trained.reserve(variants.size());
        for (Variant v : variants) {
            ModelConfig mc = mcfg;
            mc.variant = v;
            mc.seed = Rng::derive(seed, 1000 + r);
            TrainConfig tc = tcfg;
            tc.seed = mc.seed;
            trained.push_back(train(mc, train_norm, tc));
        }
        for (std::size_t i = 0; i < variants.size(); ++i)
            model_refs.emplace_back(variant_name(variants[i]), &trained[i]);

        std::vector<StressSpec> specs;
        specs.push_back({StressKind::Noise, 0.0, 0});  // baseline, identity
        for (StressKind k : kinds)
            for (scalar level : levels)
                specs.push_back({k, level,
                                 Rng::derive(seed, 7919 * (r + 1) +
                                                       static_cast<int>(k) * 101 +
                                                       std::llround(level * 1e6))});

        per_run_cells[r] = stress_eval(model_refs, test_norm,
                                       *train_norm.norm_stats, specs);
    });

    // ordered reduce over run index (bit-reproducible regardless of
    // completion order)
    for (int r = 0; r < runs; ++r) {
        const auto& cells = per_run_cells[r];
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const StressCell& cell = cells[ci];
            const bool is_baseline = ci < variants.size();
            Key key{cell.variant, is_baseline ? "baseline" : cell.kind,
                    is_baseline ? 0.0 : cell.strength};
            auto& acc = raw[key];
            if (acc.empty()) acc.resize(std::size(kMetricNames));
            for (std::size_t m = 0; m < std::size(kMetricNames); ++m)
                acc[m].push_back(cell.metrics[m].second.mean);
        }
    }
    scalar prevalence = 0;
    index_t test_total = 0;
    for (int r = 0; r < runs; ++r) {
        prevalence += per_run_pos[r];
        test_total += per_run_n[r];
    }
    prevalence /= static_cast<scalar>(test_total);

    StressReport report;
    report.seed = seed;
    report.runs = runs;
    report.prevalence = prevalence;
    for (auto& [key, acc] : raw) {
        StressCell cell;
        cell.variant = key.variant;
        cell.kind = key.kind;
        cell.strength = key.strength;
        for (std::size_t m = 0; m < std::size(kMetricNames); ++m) {
            MetricSummary s;
            s.raw = acc[m];
            std::tie(s.mean, s.half_width) = confidence_interval(acc[m]);
            cell.metrics.emplace_back(kMetricNames[m], std::move(s));
        }
        // over-prediction of the majority class: accuracy held up by
        // prevalence while specificity collapses
        cell.collapse_flagged = cell.metric("specificity").mean < 0.35 &&
                                cell.metric("accuracy").mean > prevalence;
        report.cells.push_back(std::move(cell));
    }
    return report;
}

std::string stress_report_to_csv(const StressReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "model,kind,strength,metric,mean,ci95_half_width\n";
    for (const auto& cell : report.cells)
        for (const auto& [name, s] : cell.metrics)
            os << cell.variant << "," << cell.kind << "," << cell.strength << ","
               << name << "," << s.mean << "," << s.half_width << "\n";
    return os.str();
}

std::string stress_curves_to_csv(const StressReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "model,kind,strength,accuracy,specificity,auc,collapse\n";
    for (const auto& cell : report.cells)
        os << cell.variant << "," << cell.kind << "," << cell.strength << ","
           << cell.metric("accuracy").mean << ","
           << cell.metric("specificity").mean << "," << cell.metric("auc").mean
           << "," << (cell.collapse_flagged ? 1 : 0) << "\n";
    return os.str();
}

std::string stress_report_to_json(const StressReport& report) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["runs"] = report.runs;
    j["prevalence"] = report.prevalence;
    bool any_collapse = false;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : report.cells) {
        nlohmann::json c;
        c["model"] = cell.variant;
        c["kind"] = cell.kind;
        c["strength"] = cell.strength;
        c["collapse_flagged"] = cell.collapse_flagged;
        any_collapse = any_collapse || cell.collapse_flagged;
        for (const auto& [name, s] : cell.metrics)
            c["metrics"][name] = {{"mean", s.mean},
                                  {"ci95_half_width", s.half_width},
                                  {"raw", s.raw}};
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    j["collapse_summary"] =
        any_collapse ? "majority-class collapse detected"
                     : "no majority-class collapse detected";
    return j.dump(2);
}

}  // namespace robin

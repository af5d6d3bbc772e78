#include "robin/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "robin/parallel.hpp"

#include <json.hpp>

namespace robin {

const MetricSummary& EvalReport::metric(const std::string& name) const {
    for (const auto& [n, s] : metrics)
        if (n == name) return s;
    throw DataError("report has no metric named " + name);
}

namespace {

// regularized incomplete beta I_x(a,b) via Lentz continued fraction
scalar betacf(scalar a, scalar b, scalar x) {
    const scalar eps = 1e-14, fpmin = 1e-300;
    const scalar qab = a + b, qap = a + 1.0, qam = a - 1.0;
    scalar c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    scalar h = d;
    for (int m = 1; m <= 300; ++m) {
        const scalar m2 = 2.0 * m;
        scalar aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const scalar del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

scalar inc_beta(scalar a, scalar b, scalar x) {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    const scalar ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
    const scalar bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

scalar student_t_cdf(scalar t, int df) {
    const scalar x = static_cast<scalar>(df) / (df + t * t);
    const scalar p = 0.5 * inc_beta(0.5 * df, 0.5, x);
    return t >= 0 ? 1.0 - p : p;
}

scalar normal_quantile(scalar p) {
    // bisection on erf; plenty accurate for reporting
    scalar lo = -10, hi = 10;
    for (int i = 0; i < 200; ++i) {
        const scalar mid = 0.5 * (lo + hi);
        if (0.5 * (1.0 + std::erf(mid / std::sqrt(2.0))) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

scalar student_t_quantile(scalar p, int df) {
    if (df < 1) throw DataError("student_t_quantile: df must be >= 1");
    if (!(p > 0 && p < 1)) throw DataError("student_t_quantile: p must be in (0,1)");
    scalar lo = -1e8, hi = 1e8;
    for (int i = 0; i < 200; ++i) {
        const scalar mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<scalar, scalar> confidence_interval(const std::vector<scalar>& values,
                                              scalar level, CiMode mode) {
    if (values.empty()) throw DataError("confidence_interval: no values");
    const scalar n = static_cast<scalar>(values.size());
    const scalar mean =
        std::accumulate(values.begin(), values.end(), scalar(0)) / n;
    if (values.size() == 1) return {mean, 0.0};
    scalar ss = 0;
    for (scalar v : values) ss += (v - mean) * (v - mean);
    const scalar sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0) return {mean, 0.0};
    const scalar p = 0.5 * (1.0 + level);
    const scalar q = (mode == CiMode::StudentT)
                         ? student_t_quantile(p, static_cast<int>(values.size()) - 1)
                         : normal_quantile(p);
    return {mean, q * sd / std::sqrt(n)};
}

std::vector<std::vector<index_t>> stratified_folds(const Vector& labels, int k,
                                                   std::uint64_t seed) {
    if (k < 2) throw DataError("stratified_folds: k must be >= 2");
    if (labels.size() < k) throw DataError("stratified_folds: n < k");
    std::vector<index_t> pos, neg;
    for (index_t i = 0; i < labels.size(); ++i)
        (labels(i) != 0.0 ? pos : neg).push_back(i);

    Rng rng(Rng::derive(seed, 0xF01D));
    auto shuffle = [&rng](std::vector<index_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.uniform_int(i)]);
    };
    shuffle(pos);
    shuffle(neg);

    std::vector<std::vector<index_t>> folds(k);
    std::size_t cursor = 0;
    for (index_t i : pos) folds[cursor++ % k].push_back(i);
    for (index_t i : neg) folds[cursor++ % k].push_back(i);
    return folds;
}

std::pair<std::vector<index_t>, std::vector<index_t>>
stratified_split(const Vector& labels, scalar train_ratio, std::uint64_t seed) {
    if (!(train_ratio > 0 && train_ratio < 1))
        throw DataError("stratified_split: ratio must be in (0,1)");
    std::vector<index_t> pos, neg;
    for (index_t i = 0; i < labels.size(); ++i)
        (labels(i) != 0.0 ? pos : neg).push_back(i);

    Rng rng(Rng::derive(seed, 0x5B117));
    auto shuffle = [&rng](std::vector<index_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.uniform_int(i)]);
    };
    shuffle(pos);
    shuffle(neg);

    std::vector<index_t> train, test;
    for (auto* cls : {&pos, &neg}) {
        const std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_ratio * static_cast<scalar>(cls->size())));
        for (std::size_t i = 0; i < cls->size(); ++i)
            (i < n_train ? train : test).push_back((*cls)[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

Dataset subset(const Dataset& ds, const std::vector<index_t>& idx) {
    Dataset out;
    out.schema = ds.schema;
    out.features.resize(static_cast<index_t>(idx.size()), ds.k());
    out.labels.resize(static_cast<index_t>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.features.row(static_cast<index_t>(i)) = ds.features.row(idx[i]);
        out.labels(static_cast<index_t>(i)) = ds.labels(idx[i]);
    }
    return out;
}

namespace {

const char* kMetricNames[] = {"accuracy", "f1",          "auc",
                              "precision", "sensitivity", "specificity"};

std::vector<scalar> metric_values(const MetricsReport& r) {
    return {r.accuracy, r.f1, r.auc, r.precision, r.sensitivity, r.specificity};
}

EvalReport aggregate(std::vector<MetricsReport> per_run, std::string protocol,
                     const ModelConfig& mcfg, std::uint64_t seed, CiMode ci) {
    EvalReport report;
    report.protocol = std::move(protocol);
    report.variant = variant_name(mcfg.variant);
    report.seed = seed;
    for (std::size_t m = 0; m < std::size(kMetricNames); ++m) {
        MetricSummary s;
        for (const auto& r : per_run) s.raw.push_back(metric_values(r)[m]);
        std::tie(s.mean, s.half_width) = confidence_interval(s.raw, 0.95, ci);
        report.metrics.emplace_back(kMetricNames[m], std::move(s));
    }
    return report;
}

MetricsReport run_one(const Dataset& train_enc, const Dataset& test_enc,
                      const ModelConfig& mcfg, TrainConfig tcfg,
                      std::uint64_t run_seed) {
    // both classes must be present to train and score
    const scalar pos = train_enc.labels.sum();
    if (pos == 0 || pos == train_enc.labels.size())
        throw DataError("training split lacks a class after stratification");
    const Dataset train_norm = normalize(train_enc);
    const Dataset test_norm = apply_normalization(test_enc, *train_norm.norm_stats);
    ModelConfig mc = mcfg;
    mc.seed = run_seed;
    tcfg.seed = run_seed;
    const Model model = train(mc, train_norm, tcfg);
    const Vector probs = forward(model, test_norm.features, Mode::Eval);
    return evaluate_scores(probs, test_norm.labels);
}

}  // namespace

EvalReport kfold_cv(const Dataset& encoded, int k, const ModelConfig& mcfg,
                    const TrainConfig& tcfg, std::uint64_t seed, CiMode ci,
                    int jobs) {
    if (encoded.n() < k) throw DataError("kfold_cv: n < k");
    const auto folds = stratified_folds(encoded.labels, k, seed);
    std::vector<MetricsReport> per_fold(k);
    parallel_for(k, jobs, [&](int f) {
        std::vector<index_t> train_idx;
        for (int g = 0; g < k; ++g)
            if (g != f)
                train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        std::sort(train_idx.begin(), train_idx.end());
        per_fold[f] = run_one(subset(encoded, train_idx),
                              subset(encoded, folds[f]), mcfg, tcfg,
                              Rng::derive(seed, 100 + f));
    });
    return aggregate(std::move(per_fold), "kfold" + std::to_string(k), mcfg,
                     seed, ci);
}

EvalReport repeated_split(const Dataset& encoded, scalar ratio, int runs,
                          const ModelConfig& mcfg, const TrainConfig& tcfg,
                          std::uint64_t seed, CiMode ci, int jobs) {
    if (runs < 1) throw DataError("repeated_split: runs must be >= 1");
    std::vector<MetricsReport> per_run(runs);
    parallel_for(runs, jobs, [&](int r) {
        const auto [train_idx, test_idx] =
            stratified_split(encoded.labels, ratio, Rng::derive(seed, r));
        per_run[r] = run_one(subset(encoded, train_idx),
                             subset(encoded, test_idx), mcfg, tcfg,
                             Rng::derive(seed, 500 + r));
    });
    std::ostringstream proto;
    proto << "split" << ratio << "_x" << runs;
    return aggregate(std::move(per_run), proto.str(), mcfg, seed, ci);
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["protocol"] = report.protocol;
    j["variant"] = report.variant;
    j["seed"] = report.seed;
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, s] : report.metrics) {
        metrics[name] = {{"mean", s.mean},
                         {"ci95_half_width", s.half_width},
                         {"raw", s.raw}};
    }
    j["metrics"] = std::move(metrics);
    return j.dump(2);
}

std::string report_to_table(const EvalReport& report) {
    std::ostringstream os;
    os << report.variant;
    os.setf(std::ios::fixed);
    os.precision(2);
    for (const auto& [name, s] : report.metrics)
        os << ", " << name << " " << 100.0 * s.mean << " +/- "
           << 100.0 * s.half_width;
    os << "\n";
    return os.str();
}

}  // namespace robin

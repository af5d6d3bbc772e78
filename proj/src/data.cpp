#include "robin/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace robin {

namespace {

scalar parse_numeric(const std::string& cell, std::size_t row, std::size_t col) {
    try {
        std::size_t pos = 0;
        const scalar v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << "unparseable numeric value '" << cell << "' at row " << row
           << ", column " << col;
        throw DataError(os.str());
    }
}

}  // namespace

Dataset label_encode(const RawTable& raw, const Schema& schema) {
    const auto feat_idx = schema.feature_indices();
    const int target = schema.target_index();
    if (target < 0) throw DataError("schema has no target attribute");

    Dataset ds;
    ds.schema = schema;
    const index_t n = static_cast<index_t>(raw.rows.size());
    const index_t k = static_cast<index_t>(feat_idx.size());
    ds.features.resize(n, k);
    ds.labels.resize(n);

    for (index_t i = 0; i < n; ++i) {
        const auto& row = raw.rows[i];
        if (row.size() != schema.attributes.size())
            throw DataError("raw row width does not match schema");
        for (index_t j = 0; j < k; ++j) {
            const int a = feat_idx[j];
            const auto& attr = schema.attributes[a];
            const std::string& cell = row[a];
            if (cell.empty()) {
                ds.features(i, j) = -1.0;  // missing sentinel, set before encoding
                continue;
            }
            if (attr.kind == AttrKind::Numeric) {
                ds.features(i, j) = parse_numeric(cell, i, a);
            } else {
                const auto it = std::find(attr.categories.begin(),
                                          attr.categories.end(), cell);
                if (it == attr.categories.end())
                    throw DataError("attribute " + attr.name +
                                    ": unknown value '" + cell + "'");
                ds.features(i, j) =
                    static_cast<scalar>(it - attr.categories.begin());
            }
        }
        const std::string& label_cell = row[target];
        if (label_cell.empty())
            throw DataError("missing diagnosis label in row " + std::to_string(i));
        ds.labels(i) = (label_cell == schema.positive_label) ? 1.0 : 0.0;
    }
    return ds;
}

Dataset normalize(const Dataset& ds) {
    if (ds.n() < 1) throw DataError("normalize: empty dataset");
    NormStats stats;
    stats.col_min = ds.features.colwise().minCoeff();
    stats.col_max = ds.features.colwise().maxCoeff();
    Dataset out = apply_normalization(ds, stats);
    out.norm_stats = stats;
    return out;
}

Dataset apply_normalization(const Dataset& ds, const NormStats& stats) {
    Dataset out = ds;
    out.norm_stats = stats;
    for (index_t j = 0; j < ds.k(); ++j) {
        const scalar lo = stats.col_min(j), hi = stats.col_max(j);
        if (hi > lo)
            out.features.col(j) = (ds.features.col(j).array() - lo) / (hi - lo);
        else
            out.features.col(j).setZero();  // constant column rule
    }
    return out;
}

scalar normalized_missing_value(const NormStats& stats, index_t j) {
    const scalar lo = stats.col_min(j), hi = stats.col_max(j);
    if (hi > lo) return (-1.0 - lo) / (hi - lo);
    return 0.0;
}

RawTable load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);

    // order-insensitive header: map schema attribute -> file column
    std::vector<int> col_of(schema.attributes.size(), -1);
    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
        const auto it = std::find(header.begin(), header.end(),
                                  schema.attributes[a].name);
        if (it == header.end())
            throw DataError("CSV missing column: " + schema.attributes[a].name);
        col_of[a] = static_cast<int>(it - header.begin());
    }

    RawTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw DataError("ragged CSV row at line " + std::to_string(lineno));
        std::vector<std::string> row(schema.attributes.size());
        for (std::size_t a = 0; a < schema.attributes.size(); ++a)
            row[a] = cells[col_of[a]];
        table.rows.push_back(std::move(row));
    }
    return table;
}

void save_csv(const std::string& path, const Schema& schema, const RawTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write CSV file: " + path);
    for (std::size_t a = 0; a < schema.attributes.size(); ++a)
        out << (a ? "," : "") << schema.attributes[a].name;
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t a = 0; a < row.size(); ++a)
            out << (a ? "," : "") << row[a];
        out << "\n";
    }
}

GeneratorConfig load_generator_config(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open generator config: " + path);
    nlohmann::json j;
    in >> j;

    GeneratorConfig cfg;
    cfg.planted = j.at("planted").get<std::vector<std::string>>();
    const auto& attrs = j.at("attributes");
    for (const auto& a : schema.attributes) {
        if (!attrs.contains(a.name))
            throw DataError("generator config missing attribute " + a.name);
        const auto& spec = attrs.at(a.name);
        GeneratorAttr ga;
        if (a.kind == AttrKind::Numeric) {
            ga.numeric_lo = spec.at("numeric_range")[0].get<scalar>();
            ga.numeric_hi = spec.at("numeric_range")[1].get<scalar>();
        } else if (a.is_target) {
            cfg.negative_diag_probs =
                spec.at("negative_probs").get<std::vector<scalar>>();
            if (cfg.negative_diag_probs.size() != a.categories.size() - 1)
                throw DataError("generator config: negative_probs length mismatch");
        } else {
            ga.probs = spec.at("probs").get<std::vector<scalar>>();
            if (ga.probs.size() != a.categories.size())
                throw DataError("generator config: probs length mismatch for " + a.name);
            if (spec.contains("tilt")) {
                ga.tilt = spec.at("tilt").get<std::vector<scalar>>();
                if (ga.tilt.size() != ga.probs.size())
                    throw DataError("generator config: tilt length mismatch for " + a.name);
            }
        }
        cfg.attrs.push_back(std::move(ga));
    }
    return cfg;
}

namespace {

std::size_t sample_categorical(Rng& rng, const std::vector<scalar>& probs) {
    const scalar total = std::accumulate(probs.begin(), probs.end(), scalar(0));
    scalar u = rng.uniform() * total;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        u -= probs[i];
        if (u < 0) return i;
    }
    return probs.size() - 1;
}

// positive-label distribution: logistic tilt of the base probabilities,
// scaled by the row's severity draw
std::vector<scalar> tilted(const std::vector<scalar>& base,
                           const std::vector<scalar>& tilt, scalar severity) {
    std::vector<scalar> p(base.size());
    scalar total = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        p[i] = base[i] * std::exp(severity * tilt[i]);
        total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
}

}  // namespace

RawTable synth_generate(const GeneratorConfig& cfg, const Schema& schema,
                        std::uint64_t seed, index_t n, scalar positive_fraction,
                        scalar missing_rate, bool exact_counts) {
    if (n < 2) throw DataError("synth_generate: n must be >= 2");
    if (!(positive_fraction > 0 && positive_fraction < 1))
        throw DataError("synth_generate: positive_fraction must be in (0,1)");
    if (!(missing_rate >= 0 && missing_rate < 1))
        throw DataError("synth_generate: missing_rate must be in [0,1)");

    Rng rng(Rng::derive(seed, 0));

    // labels first
    std::vector<int> labels(n, 0);
    if (exact_counts) {
        const index_t n_pos = static_cast<index_t>(
            std::llround(positive_fraction * static_cast<scalar>(n)));
        std::fill(labels.begin(), labels.begin() + n_pos, 1);
        // Fisher-Yates placement
        for (index_t i = n - 1; i > 0; --i) {
            const index_t j = static_cast<index_t>(rng.uniform_int(i + 1));
            std::swap(labels[i], labels[j]);
        }
    } else {
        for (index_t i = 0; i < n; ++i)
            labels[i] = rng.uniform() < positive_fraction ? 1 : 0;
    }

    const int target = schema.target_index();
    RawTable table;
    table.rows.reserve(n);
    for (index_t i = 0; i < n; ++i) {
        std::vector<std::string> row(schema.attributes.size());
        // per-row severity: positive rows express the planted attributes
        // jointly (mild to florid presentation), which correlates them
        const scalar severity = 0.5 + rng.uniform();
        for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
            const auto& attr = schema.attributes[a];
            const auto& ga = cfg.attrs[a];
            if (static_cast<int>(a) == target) {
                if (labels[i]) {
                    row[a] = schema.positive_label;
                } else {
                    const std::size_t c =
                        sample_categorical(rng, cfg.negative_diag_probs);
                    row[a] = attr.categories[c + 1];  // skip positive label slot
                }
                continue;
            }
            if (attr.kind == AttrKind::Numeric) {
                const scalar span = ga.numeric_hi - ga.numeric_lo;
                row[a] = std::to_string(static_cast<long long>(
                    ga.numeric_lo + std::floor(rng.uniform() * (span + 1))));
            } else {
                const std::vector<scalar>& p =
                    (labels[i] && !ga.tilt.empty())
                        ? tilted(ga.probs, ga.tilt, severity)
                        : ga.probs;
                row[a] = attr.categories[sample_categorical(rng, p)];
            }
        }
        // blank non-target cells
        if (missing_rate > 0) {
            for (std::size_t a = 0; a < row.size(); ++a) {
                if (static_cast<int>(a) == target) continue;
                if (rng.uniform() < missing_rate) row[a].clear();
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace robin

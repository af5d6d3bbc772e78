#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robin/schema.hpp"
#include "robin/types.hpp"

namespace robin {

/// String table aligned to schema attribute order; "" marks a missing cell.
struct RawTable {
    std::vector<std::vector<std::string>> rows;
};

struct NormStats {
    Vector col_min;
    Vector col_max;
};

struct Dataset {
    Matrix features;  // n x k, k = number of is_feature attributes
    Vector labels;    // n, entries in {0,1}; 1 = positive diagnosis
    Schema schema;
    std::optional<NormStats> norm_stats;

    index_t n() const { return features.rows(); }
    index_t k() const { return features.cols(); }
};

/// Encode a raw string table: missing cells become -1, categorical values
/// their (0-based) index in the schema category list, numerics pass through.
/// The target column maps positive_label -> 1, anything else -> 0.
Dataset label_encode(const RawTable& raw, const Schema& schema);

/// Min-max normalize each feature column into [0,1] using this dataset's own
/// statistics (the training split); constant columns map to 0.
Dataset normalize(const Dataset& ds);

/// Re-apply frozen training statistics to another (test) split.
Dataset apply_normalization(const Dataset& ds, const NormStats& stats);

/// Normalized encoding of a missing value (-1) in column j under `stats`.
scalar normalized_missing_value(const NormStats& stats, index_t j);

RawTable load_csv(const std::string& path, const Schema& schema);
void save_csv(const std::string& path, const Schema& schema, const RawTable& table);

struct GeneratorAttr {
    std::vector<scalar> probs;      // base (negative-label) distribution
    std::vector<scalar> tilt;       // planted log-odds per category; empty if none
    scalar numeric_lo = 0, numeric_hi = 0;  // numeric attributes
};

struct GeneratorConfig {
    std::vector<GeneratorAttr> attrs;           // aligned to schema order
    std::vector<scalar> negative_diag_probs;    // over non-positive diagnoses
    std::vector<std::string> planted;           // attributes carrying signal
};

GeneratorConfig load_generator_config(const std::string& path, const Schema& schema);

/// Schema-faithful synthetic table: labels drawn first (exact counts when
/// `exact_counts`), then each attribute sampled from its label-conditioned
/// distribution, then cells blanked independently with `missing_rate`.
RawTable synth_generate(const GeneratorConfig& cfg, const Schema& schema,
                        std::uint64_t seed, index_t n, scalar positive_fraction,
                        scalar missing_rate, bool exact_counts = true);

}  // namespace robin

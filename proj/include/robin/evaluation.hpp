#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "robin/data.hpp"
#include "robin/metrics.hpp"
#include "robin/training.hpp"

namespace robin {

enum class CiMode { StudentT, Normal };

struct MetricSummary {
    scalar mean = 0;
    scalar half_width = 0;
    std::vector<scalar> raw;
};

struct EvalReport {
    std::string protocol;
    std::string variant;
    std::uint64_t seed = 0;
    // insertion order preserved for deterministic export
    std::vector<std::pair<std::string, MetricSummary>> metrics;

    const MetricSummary& metric(const std::string& name) const;
};

/// mean and t-interval half-width t_{(1+level)/2, n-1} * s / sqrt(n)
/// (half-width 0 when n == 1 or s == 0; Normal mode swaps in the z quantile).
std::pair<scalar, scalar> confidence_interval(const std::vector<scalar>& values,
                                              scalar level = 0.95,
                                              CiMode mode = CiMode::StudentT);

scalar student_t_quantile(scalar p, int df);

/// Seeded stratified partition: shuffled positives dealt round-robin, then
/// negatives continuing the same cursor, so fold sizes differ by at most one.
std::vector<std::vector<index_t>> stratified_folds(const Vector& labels, int k,
                                                   std::uint64_t seed);

/// Per-class rounding: each class contributes round(ratio * class_count)
/// samples to the training side.
std::pair<std::vector<index_t>, std::vector<index_t>>
stratified_split(const Vector& labels, scalar train_ratio, std::uint64_t seed);

Dataset subset(const Dataset& ds, const std::vector<index_t>& idx);

EvalReport kfold_cv(const Dataset& encoded, int k, const ModelConfig& mcfg,
                    const TrainConfig& tcfg, std::uint64_t seed,
                    CiMode ci = CiMode::StudentT, int jobs = 1);

EvalReport repeated_split(const Dataset& encoded, scalar ratio, int runs,
                          const ModelConfig& mcfg, const TrainConfig& tcfg,
                          std::uint64_t seed, CiMode ci = CiMode::StudentT,
                          int jobs = 1);

std::string report_to_json(const EvalReport& report);
/// "metric: mean +/- half-width" rows, percentages with two decimals.
std::string report_to_table(const EvalReport& report);

}  // namespace robin

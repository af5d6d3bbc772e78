#pragma once

#include <string>
#include <vector>

#include "robin/evaluation.hpp"

namespace robin {

enum class StressKind { Noise, Erase, Both };

std::string stress_kind_name(StressKind k);
StressKind parse_stress_kind(const std::string& name);

struct StressSpec {
    StressKind kind = StressKind::Noise;
    scalar strength = 0;  // sigma^2 for noise, erased fraction for erase
    std::uint64_t seed = 0;
};

/// Declared strength levels; free values require the explicit override.
void validate_strength(scalar strength, bool allow_free);

/// Adds iid N(0, sigma2) to every entry (no clipping back into [0,1]).
Matrix apply_noise(const Matrix& X_test, scalar sigma2, std::uint64_t seed);

/// Replaces exactly round(fraction * n * k) uniformly chosen entries with the
/// normalized encoding of the missing value (-1 through the training min-max
/// map for that column).
Matrix apply_erasure(const Matrix& X_test, scalar fraction,
                     const NormStats& stats, std::uint64_t seed);

/// Erasure first, then noise, with derived sub-seeds (erased cells receive
/// noise too).
Matrix apply_both(const Matrix& X_test, scalar strength, const NormStats& stats,
                  std::uint64_t seed);

Matrix apply_stress(const Matrix& X_test, const StressSpec& spec,
                    const NormStats& stats);

struct StressCell {
    std::string variant;
    std::string kind;  // "baseline" or a perturbation kind
    scalar strength = 0;
    std::vector<std::pair<std::string, MetricSummary>> metrics;
    bool collapse_flagged = false;  // majority-class collapse detector

    const MetricSummary& metric(const std::string& name) const;
};

struct StressReport {
    std::vector<StressCell> cells;
    std::uint64_t seed = 0;
    int runs = 1;
    scalar prevalence = 0;  // positive fraction of the evaluated test data
};

/// Single-split evaluation of already-trained models under each spec.
std::vector<StressCell> stress_eval(
    const std::vector<std::pair<std::string, const Model*>>& models,
    const Dataset& test_norm, const NormStats& stats,
    const std::vector<StressSpec>& specs);

/// The full protocol: `runs` stratified 50/50 splits; per run each variant is
/// trained once on the unperturbed training half and evaluated on the
/// perturbed test half for every kind x level (plus baseline). All models see
/// the same perturbation per (run, kind, level).
StressReport stress_protocol(const Dataset& encoded,
                             const std::vector<Variant>& variants,
                             const std::vector<StressKind>& kinds,
                             const std::vector<scalar>& levels, int runs,
                             const ModelConfig& mcfg, const TrainConfig& tcfg,
                             std::uint64_t seed, bool allow_free_levels = false,
                             int jobs = 1);

std::string stress_report_to_csv(const StressReport& report);
/// One row per (model, kind, strength): accuracy, specificity, AuC means.
std::string stress_curves_to_csv(const StressReport& report);
std::string stress_report_to_json(const StressReport& report);

}  // namespace robin

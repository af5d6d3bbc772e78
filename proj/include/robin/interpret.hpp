#pragma once

#include <string>
#include <vector>

#include "robin/model.hpp"

namespace robin {

struct ImportanceVector {
    std::vector<std::string> names;  // attribute per score
    Vector scores;                   // each in (0,1)
};

struct AttentionHeatmap {
    index_t sample_id = 0;
    Matrix weights;  // d x d, rows = queries, cols = keys, row-stochastic
    std::vector<std::string> names;
};

/// Static per-attribute scores from the input-level SE layer in eval mode
/// (identical for every batch of a trained model). Robin/senn only.
ImportanceVector global_importance(const Model& model);

/// Deeper SE layers score derived channels; exported unnamed.
std::vector<Vector> deep_importance(const Model& model);

/// The d x d attention map for one normalized sample row.
AttentionHeatmap attention_heatmap(const Model& model, const Vector& row,
                                   index_t sample_id = 0);

/// Final hidden representation h_L (pre-head) per sample, for external
/// embedding tools.
Matrix export_representations(const Model& model, const Matrix& X);

void write_importance_csv(const ImportanceVector& iv, const std::string& path);
void write_heatmap_csv(const AttentionHeatmap& hm, const std::string& path);
/// Grayscale PGM rendering (darker = higher weight); numbers in the CSV are
/// the contract, this is a convenience.
void write_heatmap_pgm(const AttentionHeatmap& hm, const std::string& path);
void write_representations_csv(const Matrix& reps, const Vector& labels,
                               const std::string& path);

}  // namespace robin

#include "robin/interpret.hpp"

#include <cmath>
#include <fstream>

namespace robin {

ImportanceVector global_importance(const Model& model) {
    if (!model.se_input)
        throw DataError("global_importance: variant has no SE layers");
    if (!model.se_input->has_frozen)
        throw NumericError("global_importance: model not trained");
    ImportanceVector iv;
    iv.scores = excite(*model.se_input, model.se_input->frozen_z);
    iv.names = model.feature_names;
    if (iv.names.empty())
        for (index_t j = 0; j < iv.scores.size(); ++j)
            iv.names.push_back("attr" + std::to_string(j));
    return iv;
}

std::vector<Vector> deep_importance(const Model& model) {
    std::vector<Vector> out;
    for (const auto& layer : model.se) {
        if (!layer.has_frozen)
            throw NumericError("deep_importance: model not trained");
        out.push_back(excite(layer, layer.frozen_z));
    }
    return out;
}

AttentionHeatmap attention_heatmap(const Model& model, const Vector& row,
                                   index_t sample_id) {
    const SALayer* sa = nullptr;
    if (model.sa) sa = &*model.sa;
    else if (!model.sa_stack.empty()) sa = &model.sa_stack.front();
    if (!sa) throw DataError("attention_heatmap: variant has no self-attention");
    AttentionHeatmap hm;
    hm.sample_id = sample_id;
    Matrix in = row.transpose();
    if (model.sa && model.se_input)  // robin gates the attention input
        in = se_forward(*model.se_input, in, Mode::Eval, nullptr);
    hm.weights = sa_attention(*sa, in).front();
    hm.names = model.feature_names;
    return hm;
}

Matrix export_representations(const Model& model, const Matrix& X) {
    Artifacts art;
    forward(model, X, Mode::Eval, nullptr, &art);
    return art.hidden;
}

void write_importance_csv(const ImportanceVector& iv, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    out << "attribute,score\n";
    for (index_t j = 0; j < iv.scores.size(); ++j)
        out << iv.names[j] << "," << iv.scores(j) << "\n";
}

void write_heatmap_csv(const AttentionHeatmap& hm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    for (index_t i = 0; i < hm.weights.rows(); ++i) {
        for (index_t j = 0; j < hm.weights.cols(); ++j)
            out << (j ? "," : "") << hm.weights(i, j);
        out << "\n";
    }
}

void write_heatmap_pgm(const AttentionHeatmap& hm, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    const index_t d = hm.weights.rows();
    const scalar mx = hm.weights.maxCoeff();
    out << "P5\n" << d << " " << d << "\n255\n";
    for (index_t i = 0; i < d; ++i)
        for (index_t j = 0; j < d; ++j) {
            // darker = higher weight
            const scalar v = mx > 0 ? hm.weights(i, j) / mx : 0.0;
            out.put(static_cast<char>(255 - std::lround(255.0 * v)));
        }
}

void write_representations_csv(const Matrix& reps, const Vector& labels,
                               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    out << "sample,label";
    for (index_t j = 0; j < reps.cols(); ++j) out << ",h" << j;
    out << "\n";
    for (index_t i = 0; i < reps.rows(); ++i) {
        out << i << "," << labels(i);
        for (index_t j = 0; j < reps.cols(); ++j) out << "," << reps(i, j);
        out << "\n";
    }
}

}  // namespace robin

#include "robin/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace robin {

namespace {

constexpr char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        const unsigned b0 = data[i];
        const unsigned b1 = i + 1 < len ? data[i + 1] : 0;
        const unsigned b2 = i + 2 < len ? data[i + 2] : 0;
        out.push_back(kB64[b0 >> 2]);
        out.push_back(kB64[((b0 & 0x03) << 4) | (b1 >> 4)]);
        out.push_back(i + 1 < len ? kB64[((b1 & 0x0f) << 2) | (b2 >> 6)] : '=');
        out.push_back(i + 2 < len ? kB64[b2 & 0x3f] : '=');
    }
    return out;
}

std::vector<unsigned char> b64_decode(const std::string& text) {
    int lut[256];
    std::fill(std::begin(lut), std::end(lut), -1);
    for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64[i])] = i;
    std::vector<unsigned char> out;
    unsigned buf = 0;
    int bits = 0;
    for (char ch : text) {
        if (ch == '=' || ch == '\n') continue;
        const int v = lut[static_cast<unsigned char>(ch)];
        if (v < 0) throw DataError("invalid base64 character in model file");
        buf = (buf << 6) | static_cast<unsigned>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((buf >> bits) & 0xff));
        }
    }
    return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()},
            {"cols", m.cols()},
            {"data", b64_encode_doubles(m.data(), static_cast<std::size_t>(m.size()))}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const index_t rows = j.at("rows").get<index_t>();
    const index_t cols = j.at("cols").get<index_t>();
    const auto vals = b64_decode_doubles(j.at("data").get<std::string>());
    if (static_cast<index_t>(vals.size()) != rows * cols)
        throw DataError("model file: parameter block size mismatch");
    Matrix m(rows, cols);
    std::memcpy(m.data(), vals.data(), vals.size() * sizeof(scalar));
    return m;
}

}  // namespace

std::string b64_encode_doubles(const scalar* data, std::size_t count) {
    static_assert(sizeof(scalar) == 8);
    return b64_encode(reinterpret_cast<const unsigned char*>(data),
                      count * sizeof(scalar));
}

std::vector<scalar> b64_decode_doubles(const std::string& text) {
    const auto bytes = b64_decode(text);
    if (bytes.size() % sizeof(scalar) != 0)
        throw DataError("base64 payload is not a whole number of doubles");
    std::vector<scalar> out(bytes.size() / sizeof(scalar));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::string model_to_json(const Model& model) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["config"] = {{"variant", variant_name(model.config.variant)},
                   {"input_dim", model.config.input_dim},
                   {"block_widths", model.config.block_widths},
                   {"embed_dim", model.config.embed_dim},
                   {"reduction_ratio", model.config.reduction_ratio},
                   {"attn_temperature", model.config.attn_temperature},
                   {"seed", model.config.seed}};
    j["feature_names"] = model.feature_names;

    nlohmann::json params = nlohmann::json::array();
    const auto names = param_names(model);
    const auto blocks = param_blocks(model);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        nlohmann::json p = matrix_to_json(*blocks[i]);
        p["name"] = names[i];
        params.push_back(std::move(p));
    }
    j["params"] = std::move(params);

    nlohmann::json frozen = nlohmann::json::array();
    auto add_frozen = [&frozen](const SELayer& l) {
        nlohmann::json f;
        f["present"] = l.has_frozen;
        if (l.has_frozen)
            f["data"] = b64_encode_doubles(l.frozen_z.data(),
                                           static_cast<std::size_t>(l.frozen_z.size()));
        frozen.push_back(std::move(f));
    };
    if (model.se_input) add_frozen(*model.se_input);
    for (const auto& l : model.se) add_frozen(l);
    j["frozen_z"] = std::move(frozen);

    j["train_log"] =
        b64_encode_doubles(model.train_log.data(), model.train_log.size());
    if (model.norm_stats) {
        const auto& ns = *model.norm_stats;
        j["norm_stats"] = {
            {"col_min", b64_encode_doubles(ns.col_min.data(),
                                           static_cast<std::size_t>(ns.col_min.size()))},
            {"col_max", b64_encode_doubles(ns.col_max.data(),
                                           static_cast<std::size_t>(ns.col_max.size()))}};
    }
    return j.dump(2);
}

Model model_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw DataError("unsupported model file version");
    const auto& cj = j.at("config");
    ModelConfig cfg;
    cfg.variant = parse_variant(cj.at("variant").get<std::string>());
    cfg.input_dim = cj.at("input_dim").get<int>();
    cfg.block_widths = cj.at("block_widths").get<std::vector<int>>();
    cfg.embed_dim = cj.at("embed_dim").get<int>();
    cfg.attn_temperature = cj.value("attn_temperature", 1.0);
    cfg.reduction_ratio = cj.at("reduction_ratio").get<int>();
    cfg.seed = cj.at("seed").get<std::uint64_t>();

    Model model = build(cfg);
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();

    const auto& params = j.at("params");
    auto blocks = param_blocks(model);
    if (params.size() != blocks.size())
        throw DataError("model file: parameter block count mismatch");
    const auto names = param_names(model);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (params[i].at("name").get<std::string>() != names[i])
            throw DataError("model file: unexpected parameter order");
        Matrix m = matrix_from_json(params[i]);
        if (m.rows() != blocks[i]->rows() || m.cols() != blocks[i]->cols())
            throw DataError("model file: parameter shape mismatch for " + names[i]);
        *blocks[i] = std::move(m);
    }

    const auto& frozen = j.at("frozen_z");
    std::vector<SELayer*> se_layers;
    if (model.se_input) se_layers.push_back(&*model.se_input);
    for (auto& l : model.se) se_layers.push_back(&l);
    if (frozen.size() != se_layers.size())
        throw DataError("model file: frozen descriptor count mismatch");
    for (std::size_t i = 0; i < se_layers.size(); ++i) {
        se_layers[i]->has_frozen = frozen[i].at("present").get<bool>();
        if (se_layers[i]->has_frozen) {
            const auto vals =
                b64_decode_doubles(frozen[i].at("data").get<std::string>());
            se_layers[i]->frozen_z =
                Eigen::Map<const Vector>(vals.data(), static_cast<index_t>(vals.size()));
        }
    }

    model.train_log = b64_decode_doubles(j.at("train_log").get<std::string>());
    if (j.contains("norm_stats")) {
        const auto lo =
            b64_decode_doubles(j["norm_stats"].at("col_min").get<std::string>());
        const auto hi =
            b64_decode_doubles(j["norm_stats"].at("col_max").get<std::string>());
        if (lo.size() != hi.size() ||
            static_cast<int>(lo.size()) != cfg.input_dim)
            throw DataError("model file: normalization stats length mismatch");
        NormStats ns;
        ns.col_min = Eigen::Map<const Vector>(lo.data(), static_cast<index_t>(lo.size()));
        ns.col_max = Eigen::Map<const Vector>(hi.data(), static_cast<index_t>(hi.size()));
        model.norm_stats = std::move(ns);
    }
    return model;
}

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << model_to_json(model) << "\n";
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace robin

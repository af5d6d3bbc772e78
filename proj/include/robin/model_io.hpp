#pragma once

#include <string>

#include "robin/model.hpp"

namespace robin {

/// Versioned JSON: config, flat parameter arrays per block, frozen SE
/// descriptors, training log. Doubles are base64 of raw little-endian bytes,
/// so save -> load -> forward is bit-exact.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// raw-byte codecs, shared with other exact exports
std::string b64_encode_doubles(const scalar* data, std::size_t count);
std::vector<scalar> b64_decode_doubles(const std::string& text);

}  // namespace robin

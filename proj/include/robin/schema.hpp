#pragma once

#include <string>
#include <vector>

#include "robin/types.hpp"

namespace robin {

enum class AttrKind { Categorical, Numeric };

struct AttributeSchema {
    std::string name;
    AttrKind kind = AttrKind::Categorical;
    std::vector<std::string> categories;  // categorical only; frozen order
    bool is_feature = true;
    bool is_target = false;
    bool discardable = false;  // e.g. EEG can be dropped where unavailable
};

struct Schema {
    std::vector<AttributeSchema> attributes;
    std::string positive_label;

    int index_of(const std::string& name) const;  // -1 if absent
    int target_index() const;
    std::vector<int> feature_indices() const;
    std::vector<std::string> feature_names() const;
    std::size_t feature_count() const { return feature_indices().size(); }
};

/// Load and validate the canonical schema asset (JSON).
Schema load_schema(const std::string& path);

}  // namespace robin

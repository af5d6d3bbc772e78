#include "robin/schema.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace robin {

int Schema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].name == name) return static_cast<int>(i);
    return -1;
}

int Schema::target_index() const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].is_target) return static_cast<int>(i);
    return -1;
}

std::vector<int> Schema::feature_indices() const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].is_feature && !attributes[i].is_target)
            idx.push_back(static_cast<int>(i));
    return idx;
}

std::vector<std::string> Schema::feature_names() const {
    std::vector<std::string> names;
    for (int i : feature_indices()) names.push_back(attributes[i].name);
    return names;
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);
    nlohmann::json j;
    in >> j;

    Schema schema;
    schema.positive_label = j.at("positive_label").get<std::string>();
    for (const auto& a : j.at("attributes")) {
        AttributeSchema attr;
        attr.name = a.at("name").get<std::string>();
        const std::string kind = a.at("kind").get<std::string>();
        if (kind == "categorical") attr.kind = AttrKind::Categorical;
        else if (kind == "numeric") attr.kind = AttrKind::Numeric;
        else throw DataError("schema: unknown kind '" + kind + "' for " + attr.name);
        if (attr.kind == AttrKind::Categorical)
            attr.categories = a.at("categories").get<std::vector<std::string>>();
        attr.is_feature = a.value("is_feature", true);
        attr.is_target = a.value("is_target", false);
        if (attr.is_target) attr.is_feature = false;
        attr.discardable = a.value("discardable", false);
        schema.attributes.push_back(std::move(attr));
    }

    // invariants: unique names, non-empty duplicate-free category lists,
    // exactly one target
    std::set<std::string> names;
    int targets = 0;
    for (const auto& a : schema.attributes) {
        if (!names.insert(a.name).second)
            throw DataError("schema: duplicate attribute " + a.name);
        if (a.is_target) ++targets;
        if (a.kind == AttrKind::Categorical) {
            if (a.categories.empty())
                throw DataError("schema: empty category list for " + a.name);
            std::set<std::string> cats(a.categories.begin(), a.categories.end());
            if (cats.size() != a.categories.size())
                throw DataError("schema: duplicate category in " + a.name);
        }
    }
    if (targets != 1) throw DataError("schema: expected exactly one target attribute");
    return schema;
}

}  // namespace robin

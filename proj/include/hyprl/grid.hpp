#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace hyprl::meta {

enum class ParamKind { OneHot, Scalar };

struct SchemaEntry {
    std::string name;
    ParamKind kind;
    std::vector<std::string> levels;  // Scalar levels must parse as doubles
};

struct GridSchema {
    std::vector<SchemaEntry> entries;

    // width of the encoded vector: |levels| per one-hot entry, 1 per scalar
    int encoded_dim() const;
    size_t cross_product_size() const;
};

struct HyperparameterConfig {
    int config_id = 0;
    std::vector<std::string> raw;  // one value per schema entry, in schema order
    Eigen::VectorXd encoded;

    const std::string& raw_value(const GridSchema& schema, const std::string& name) const;
};

struct HyperparameterGrid {
    GridSchema schema;
    std::vector<HyperparameterConfig> configs;

    size_t size() const { return configs.size(); }
    int encoded_dim() const { return schema.encoded_dim(); }
    const Eigen::VectorXd& encoded(int config_id) const;
};

// Encodes explicit raw combinations against a schema. One-hot entries expand
// to |levels| indicators; scalar entries are min-max scaled over the entry's
// levels to [0,1]. Throws std::invalid_argument when a raw value is not among
// the declared levels (the message names the hyperparameter and the value) or
// when combinations are duplicated.
HyperparameterGrid encode_grid(const GridSchema& schema,
                               const std::vector<std::vector<std::string>>& raw_combinations);

// Full cross product of the schema levels. The last entry varies fastest;
// config ids follow enumeration order.
HyperparameterGrid encode_grid(const GridSchema& schema);

// The eight-hyperparameter neural-network grid: 2916 configs, 13 encoded dims.
GridSchema nnmeta_schema();

// Mini-language for desk-scale grids: semicolon-separated
// "name:kind:v1,v2,..." with kind in {one-hot, scalar}.
GridSchema parse_grid_spec(const std::string& spec);

}  // namespace hyprl::meta

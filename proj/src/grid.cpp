#include "hyprl/grid.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hyprl/csv.hpp"

namespace hyprl::meta {

int GridSchema::encoded_dim() const {
    int dim = 0;
    for (const auto& e : entries) {
        dim += e.kind == ParamKind::OneHot ? static_cast<int>(e.levels.size()) : 1;
    }
    return dim;
}

size_t GridSchema::cross_product_size() const {
    size_t n = 1;
    for (const auto& e : entries) n *= e.levels.size();
    return entries.empty() ? 0 : n;
}

const std::string& HyperparameterConfig::raw_value(const GridSchema& schema,
                                                   const std::string& name) const {
    for (size_t i = 0; i < schema.entries.size(); ++i) {
        if (schema.entries[i].name == name) return raw[i];
    }
    throw std::invalid_argument("unknown hyperparameter: " + name);
}

const Eigen::VectorXd& HyperparameterGrid::encoded(int config_id) const {
    if (config_id < 0 || config_id >= static_cast<int>(configs.size())) {
        throw std::invalid_argument("config_id out of range: " + std::to_string(config_id));
    }
    return configs[config_id].encoded;
}

namespace {

void validate_schema(const GridSchema& schema) {
    if (schema.entries.empty()) throw std::invalid_argument("schema has no entries");
    std::set<std::string> names;
    for (const auto& e : schema.entries) {
        if (e.levels.empty()) throw std::invalid_argument("hyperparameter '" + e.name + "' has no levels");
        if (!names.insert(e.name).second) {
            throw std::invalid_argument("duplicate hyperparameter name: " + e.name);
        }
        std::set<std::string> level_set(e.levels.begin(), e.levels.end());
        if (level_set.size() != e.levels.size()) {
            throw std::invalid_argument("duplicate level in hyperparameter '" + e.name + "'");
        }
        if (e.kind == ParamKind::Scalar) {
            for (const auto& lv : e.levels) io::parse_double(lv, "scalar level of '" + e.name + "'");
        }
    }
}

// per-entry scaling bounds for scalar kinds
struct ScalarRange {
    double lo = 0.0, hi = 0.0;
};

std::vector<ScalarRange> scalar_ranges(const GridSchema& schema) {
    std::vector<ScalarRange> ranges(schema.entries.size());
    for (size_t i = 0; i < schema.entries.size(); ++i) {
        const auto& e = schema.entries[i];
        if (e.kind != ParamKind::Scalar) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& lv : e.levels) {
            const double x = io::parse_double(lv, "scalar level of '" + e.name + "'");
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        ranges[i] = {lo, hi};
    }
    return ranges;
}

}  // namespace

HyperparameterGrid encode_grid(const GridSchema& schema,
                               const std::vector<std::vector<std::string>>& raw_combinations) {
    validate_schema(schema);
    const auto ranges = scalar_ranges(schema);
    const int dim = schema.encoded_dim();

    HyperparameterGrid grid;
    grid.schema = schema;
    grid.configs.reserve(raw_combinations.size());
    std::set<std::vector<std::string>> seen;

    for (const auto& raw : raw_combinations) {
        if (raw.size() != schema.entries.size()) {
            throw std::invalid_argument("raw combination has " + std::to_string(raw.size()) +
                                        " values, schema has " + std::to_string(schema.entries.size()));
        }
        if (!seen.insert(raw).second) throw std::invalid_argument("duplicate raw combination");

        HyperparameterConfig cfg;
        cfg.config_id = static_cast<int>(grid.configs.size());
        cfg.raw = raw;
        cfg.encoded = Eigen::VectorXd::Zero(dim);
        int offset = 0;
        for (size_t i = 0; i < schema.entries.size(); ++i) {
            const auto& e = schema.entries[i];
            const auto it = std::find(e.levels.begin(), e.levels.end(), raw[i]);
            if (it == e.levels.end()) {
                throw std::invalid_argument("unknown level for hyperparameter '" + e.name +
                                            "': '" + raw[i] + "'");
            }
            if (e.kind == ParamKind::OneHot) {
                cfg.encoded[offset + static_cast<int>(it - e.levels.begin())] = 1.0;
                offset += static_cast<int>(e.levels.size());
            } else {
                const double x = io::parse_double(raw[i], "scalar value of '" + e.name + "'");
                const double span = ranges[i].hi - ranges[i].lo;
                cfg.encoded[offset] = span > 0.0 ? (x - ranges[i].lo) / span : 0.0;
                offset += 1;
            }
        }
        grid.configs.push_back(std::move(cfg));
    }
    return grid;
}

HyperparameterGrid encode_grid(const GridSchema& schema) {
    validate_schema(schema);
    std::vector<std::vector<std::string>> combos;
    combos.reserve(schema.cross_product_size());
    std::vector<size_t> idx(schema.entries.size(), 0);
    while (true) {
        std::vector<std::string> raw(schema.entries.size());
        for (size_t i = 0; i < schema.entries.size(); ++i) raw[i] = schema.entries[i].levels[idx[i]];
        combos.push_back(std::move(raw));
        // odometer, last entry fastest
        size_t i = schema.entries.size();
        while (i > 0) {
            --i;
            if (++idx[i] < schema.entries[i].levels.size()) break;
            idx[i] = 0;
            if (i == 0) return encode_grid(schema, combos);
        }
    }
}

GridSchema nnmeta_schema() {
    GridSchema s;
    s.entries = {
        {"activation_function", ParamKind::OneHot, {"ReLU", "leakyReLU", "tanh"}},
        {"number_of_neurons", ParamKind::Scalar, {"5", "10", "20"}},
        {"number_of_hidden_units", ParamKind::Scalar, {"10", "20", "50"}},
        {"optimizer", ParamKind::OneHot, {"Adam", "AdaDelta", "AdaGrad"}},
        {"number_of_epochs", ParamKind::Scalar, {"10", "100"}},
        {"dropout", ParamKind::Scalar, {"0", "0.2", "0.4"}},
        {"lp_regularization", ParamKind::OneHot, {"L1", "L2"}},
        {"regularization_constant", ParamKind::Scalar, {"0.01", "0.001", "0.0001"}},
    };
    return s;
}

GridSchema parse_grid_spec(const std::string& spec) {
    GridSchema schema;
    std::istringstream entries(spec);
    std::string entry;
    while (std::getline(entries, entry, ';')) {
        if (entry.empty()) continue;
        const auto c1 = entry.find(':');
        const auto c2 = entry.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw std::invalid_argument("grid spec entry '" + entry +
                                        "' is not of the form name:kind:v1,v2,...");
        }
        SchemaEntry e;
        e.name = entry.substr(0, c1);
        const std::string kind = entry.substr(c1 + 1, c2 - c1 - 1);
        if (kind == "one-hot" || kind == "onehot") {
            e.kind = ParamKind::OneHot;
        } else if (kind == "scalar") {
            e.kind = ParamKind::Scalar;
        } else {
            throw std::invalid_argument("unknown kind '" + kind + "' in grid spec entry '" + entry + "'");
        }
        std::istringstream values(entry.substr(c2 + 1));
        std::string value;
        while (std::getline(values, value, ',')) e.levels.push_back(value);
        if (e.name.empty() || e.levels.empty()) {
            throw std::invalid_argument("grid spec entry '" + entry + "' needs a name and values");
        }
        schema.entries.push_back(std::move(e));
    }
    if (schema.entries.empty()) throw std::invalid_argument("grid spec is empty");
    return schema;
}

}  // namespace hyprl::meta

#include "hyprl/metadataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "hyprl/csv.hpp"
#include "hyprl/rng.hpp"

namespace hyprl::meta {

const MetafeatureVector& MetaDataset::metafeatures(int dataset_id) const {
    if (!has_dataset(dataset_id)) {
        throw std::invalid_argument("unknown dataset_id: " + std::to_string(dataset_id));
    }
    return datasets[dataset_id].second;
}

double MetaDataset::mean_loss(int dataset_id, int config_id) const {
    if (!has_dataset(dataset_id)) {
        throw std::invalid_argument("unknown dataset_id: " + std::to_string(dataset_id));
    }
    if (config_id < 0 || config_id >= n_configs()) {
        throw std::invalid_argument("config_id out of range: " + std::to_string(config_id));
    }
    return responses[dataset_id].row(config_id).mean();
}

bool MetaDataset::operator==(const MetaDataset& other) const {
    if (grid.schema.entries.size() != other.grid.schema.entries.size()) return false;
    for (size_t i = 0; i < grid.schema.entries.size(); ++i) {
        const auto& a = grid.schema.entries[i];
        const auto& b = other.grid.schema.entries[i];
        if (a.name != b.name || a.kind != b.kind || a.levels != b.levels) return false;
    }
    if (grid.size() != other.grid.size()) return false;
    for (size_t i = 0; i < grid.size(); ++i) {
        const auto& a = grid.configs[i];
        const auto& b = other.grid.configs[i];
        if (a.config_id != b.config_id || a.raw != b.raw || a.encoded != b.encoded) return false;
    }
    if (datasets.size() != other.datasets.size()) return false;
    for (size_t i = 0; i < datasets.size(); ++i) {
        if (datasets[i].first != other.datasets[i].first) return false;
        if (datasets[i].second != other.datasets[i].second) return false;
    }
    if (responses.size() != other.responses.size()) return false;
    for (size_t i = 0; i < responses.size(); ++i) {
        if (responses[i] != other.responses[i]) return false;
    }
    if (splits.size() != other.splits.size()) return false;
    for (size_t i = 0; i < splits.size(); ++i) {
        if (splits[i].train_ids != other.splits[i].train_ids) return false;
        if (splits[i].test_ids != other.splits[i].test_ids) return false;
    }
    return seed == other.seed;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }

Eigen::MatrixXd draw_matrix(Rng& rng, int rows, int cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

Eigen::VectorXd draw_vector(Rng& rng, int n, double scale) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

// ten independent quantities -> sixteen consistent metafeatures
MetafeatureVector metafeatures_from_latent(const Eigen::VectorXd& u) {
    MetafeatureVector v;
    const double n_inst = std::max(2.0, std::round(std::exp(5.5 + 2.0 * std::tanh(0.5 * u[0]))));
    const double n_feat = std::max(1.0, std::round(std::exp(2.5 + 1.5 * std::tanh(0.5 * u[1]))));
    v[kNumInstances] = n_inst;
    v[kLogNumInstances] = std::log(n_inst);
    v[kNumFeatures] = n_feat;
    v[kLogNumFeatures] = std::log(n_feat);
    const double dim = n_feat / n_inst;
    v[kDimensionality] = dim;
    v[kLogDimensionality] = std::log(dim);
    v[kInvDimensionality] = 1.0 / dim;
    v[kLogInvDimensionality] = std::log(1.0 / dim);

    const double kc = 3.0 * std::tanh(0.7 * u[2]);
    const double ks = softplus(u[3]);
    v[kKurtosisMin] = kc - ks;
    v[kKurtosisMax] = kc + ks;
    v[kKurtosisMean] = kc + 0.8 * ks * std::tanh(0.5 * u[4]);
    v[kKurtosisStd] = ks * (0.2 + 0.6 * sigmoid(u[5]));

    const double sc = 1.5 * std::tanh(0.7 * u[6]);
    const double ss = softplus(u[7]);
    v[kSkewnessMin] = sc - ss;
    v[kSkewnessMax] = sc + ss;
    v[kSkewnessMean] = sc + 0.8 * ss * std::tanh(0.5 * u[8]);
    v[kSkewnessStd] = ss * (0.2 + 0.6 * sigmoid(u[9]));
    return v;
}

constexpr int kLatentDim = 8;
constexpr int kMetaLatentDim = 10;

}  // namespace

MetaDataset generate_synthetic_metadataset(int n_datasets, const HyperparameterGrid& grid,
                                           int n_folds, uint64_t seed, double noise_std) {
    if (n_datasets < 2) throw std::invalid_argument("need >= 2 datasets for splits");
    if (grid.size() == 0) throw std::invalid_argument("grid is empty");
    if (n_folds < 1) throw std::invalid_argument("n_folds must be >= 1");
    if (noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");

    const int P = grid.encoded_dim();
    const double sqrtP = std::sqrt(static_cast<double>(P));
    Rng rng(seed);

    // surface coefficients, drawn once; each is affine in the latent z
    const Eigen::MatrixXd meta_map =
        draw_matrix(rng, kMetaLatentDim, kLatentDim, 1.0 / std::sqrt(double(kLatentDim)));
    const Eigen::VectorXd meta_offset = draw_vector(rng, kMetaLatentDim, 0.5);
    const Eigen::MatrixXd quad_base = draw_matrix(rng, P, P, 1.2 / P);
    std::vector<Eigen::MatrixXd> quad_latent;
    for (int k = 0; k < kLatentDim; ++k) quad_latent.push_back(draw_matrix(rng, P, P, 0.5 / P));
    const Eigen::VectorXd lin_base = draw_vector(rng, P, 1.2 / sqrtP);
    const Eigen::MatrixXd lin_latent = draw_matrix(rng, P, kLatentDim, 0.5 / sqrtP);
    const double const_base = 0.3 * rng.normal();
    const Eigen::VectorXd const_latent = draw_vector(rng, kLatentDim, 0.2);

    MetaDataset md;
    md.grid = grid;
    md.seed = seed;

    std::vector<Eigen::VectorXd> latents;
    latents.reserve(n_datasets);
    for (int d = 0; d < n_datasets; ++d) {
        const Eigen::VectorXd z = draw_vector(rng, kLatentDim, 1.0);
        latents.push_back(z);
        md.datasets.emplace_back(d, metafeatures_from_latent(meta_map * z + meta_offset));
    }

    const int n_configs = static_cast<int>(grid.size());
    for (int d = 0; d < n_datasets; ++d) {
        const Eigen::VectorXd& z = latents[d];
        Eigen::MatrixXd quad = quad_base;
        for (int k = 0; k < kLatentDim; ++k) quad += z[k] * quad_latent[k];
        const Eigen::VectorXd lin = lin_base + lin_latent * z;
        const double offset = const_base + const_latent.dot(z);

        Eigen::MatrixXd resp(n_configs, n_folds);
        for (int c = 0; c < n_configs; ++c) {
            const Eigen::VectorXd& e = grid.encoded(c);
            const double level = sigmoid(e.dot(quad * e) + lin.dot(e) + offset);
            for (int f = 0; f < n_folds; ++f) {
                const double noisy = level + noise_std * rng.normal();
                resp(c, f) = std::clamp(noisy, 1e-6, 1.0 - 1e-6);
            }
        }
        md.responses.push_back(std::move(resp));
    }

    // k-fold style splits over a seeded shuffle of the dataset ids
    std::vector<int> ids(n_datasets);
    for (int d = 0; d < n_datasets; ++d) ids[d] = d;
    for (int i = n_datasets - 1; i > 0; --i) std::swap(ids[i], ids[rng.uniform_int(i + 1)]);
    const int n_splits = std::min(5, n_datasets);
    for (int k = 0; k < n_splits; ++k) {
        SplitDef split;
        const int lo = static_cast<int>(static_cast<int64_t>(k) * n_datasets / n_splits);
        const int hi = static_cast<int>(static_cast<int64_t>(k + 1) * n_datasets / n_splits);
        for (int i = 0; i < n_datasets; ++i) {
            (i >= lo && i < hi ? split.test_ids : split.train_ids).push_back(ids[i]);
        }
        std::sort(split.train_ids.begin(), split.train_ids.end());
        std::sort(split.test_ids.begin(), split.test_ids.end());
        md.splits.push_back(std::move(split));
    }
    return md;
}

// ---------------------------------------------------------------------------
// directory format

namespace {

using nlohmann::json;

std::string kind_name(ParamKind k) { return k == ParamKind::OneHot ? "one-hot" : "scalar"; }

ParamKind kind_from_name(const std::string& s) {
    if (s == "one-hot") return ParamKind::OneHot;
    if (s == "scalar") return ParamKind::Scalar;
    throw std::runtime_error("schema mismatch: unknown kind '" + s + "' in manifest");
}

}  // namespace

void save_metadataset(const MetaDataset& md, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const int P = md.grid.encoded_dim();

    {
        std::vector<std::string> header{"config_id"};
        for (const auto& e : md.grid.schema.entries) header.push_back(e.name);
        for (int j = 0; j < P; ++j) header.push_back("enc_" + std::to_string(j));
        std::vector<std::vector<std::string>> rows;
        for (const auto& cfg : md.grid.configs) {
            std::vector<std::string> row{std::to_string(cfg.config_id)};
            row.insert(row.end(), cfg.raw.begin(), cfg.raw.end());
            for (int j = 0; j < P; ++j) row.push_back(io::format_double(cfg.encoded[j]));
            rows.push_back(std::move(row));
        }
        io::write_csv(dir / "grid.csv", header, rows);
    }
    {
        std::vector<std::string> header{"dataset_id"};
        for (const auto* name : kMetafeatureNames) header.push_back(name);
        std::vector<std::vector<std::string>> rows;
        for (const auto& [id, v] : md.datasets) {
            std::vector<std::string> row{std::to_string(id)};
            for (int j = 0; j < kNumMetafeatures; ++j) row.push_back(io::format_double(v[j]));
            rows.push_back(std::move(row));
        }
        io::write_csv(dir / "metafeatures.csv", header, rows);
    }
    {
        std::set<int> all_ids;
        for (const auto& [id, v] : md.datasets) all_ids.insert(id);
        const Scaler scaler = fit_scaler(md.datasets, all_ids);
        std::vector<std::vector<std::string>> rows;
        for (int j = 0; j < kNumMetafeatures; ++j) {
            rows.push_back({std::to_string(j), io::format_double(scaler.mean[j]),
                            io::format_double(scaler.stddev[j])});
        }
        io::write_csv(dir / "scaler.csv", {"dimension", "mean", "std"}, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (int d = 0; d < md.n_datasets(); ++d) {
            for (int c = 0; c < md.n_configs(); ++c) {
                for (int f = 0; f < md.n_folds(); ++f) {
                    rows.push_back({std::to_string(d), std::to_string(c), std::to_string(f),
                                    io::format_double(md.responses[d](c, f))});
                }
            }
        }
        io::write_csv(dir / "responses.csv", {"dataset_id", "config_id", "fold", "loss"}, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (size_t k = 0; k < md.splits.size(); ++k) {
            for (int id : md.splits[k].train_ids) {
                rows.push_back({std::to_string(k), std::to_string(id), "train"});
            }
            for (int id : md.splits[k].test_ids) {
                rows.push_back({std::to_string(k), std::to_string(id), "test"});
            }
        }
        io::write_csv(dir / "splits.csv", {"split_id", "dataset_id", "role"}, rows);
    }
    {
        json manifest;
        manifest["format_version"] = 1;
        manifest["n_datasets"] = md.n_datasets();
        manifest["n_configs"] = md.n_configs();
        manifest["n_folds"] = md.n_folds();
        if (md.seed) manifest["seed"] = *md.seed;
        json schema = json::array();
        for (const auto& e : md.grid.schema.entries) {
            schema.push_back({{"name", e.name}, {"kind", kind_name(e.kind)}, {"levels", e.levels}});
        }
        manifest["schema"] = schema;
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + (dir / "manifest.json").string());
        out << manifest.dump(2) << '\n';
    }
}

MetaDataset load_metadataset(const std::filesystem::path& dir) {
    const auto require = [&](const char* file, const char* what) {
        const auto path = dir / file;
        if (!std::filesystem::exists(path)) {
            throw std::runtime_error(std::string("missing ") + what + ": " + path.string());
        }
        return path;
    };

    json manifest;
    {
        std::ifstream in(require("manifest.json", "manifest"));
        try {
            in >> manifest;
        } catch (const json::parse_error& e) {
            throw std::runtime_error("malformed manifest.json: " + std::string(e.what()));
        }
    }
    if (!manifest.contains("format_version") || manifest["format_version"] != 1) {
        throw std::runtime_error("schema mismatch: unsupported manifest format_version");
    }
    const int n_datasets = manifest.at("n_datasets").get<int>();
    const int n_configs = manifest.at("n_configs").get<int>();
    const int n_folds = manifest.at("n_folds").get<int>();

    GridSchema schema;
    for (const auto& e : manifest.at("schema")) {
        SchemaEntry entry;
        entry.name = e.at("name").get<std::string>();
        entry.kind = kind_from_name(e.at("kind").get<std::string>());
        entry.levels = e.at("levels").get<std::vector<std::string>>();
        schema.entries.push_back(std::move(entry));
    }

    MetaDataset md;
    if (manifest.contains("seed")) md.seed = manifest["seed"].get<uint64_t>();

    // grid
    {
        const auto table = io::read_csv(require("grid.csv", "grid"));
        const int P = schema.encoded_dim();
        const size_t expected_cols = 1 + schema.entries.size() + static_cast<size_t>(P);
        if (table.header.size() != expected_cols) {
            throw std::runtime_error("schema mismatch: grid.csv has " +
                                     std::to_string(table.header.size()) + " columns, expected " +
                                     std::to_string(expected_cols));
        }
        for (size_t i = 0; i < schema.entries.size(); ++i) {
            if (table.header[i + 1] != schema.entries[i].name) {
                throw std::runtime_error("schema mismatch: grid.csv column '" + table.header[i + 1] +
                                         "' does not match schema entry '" + schema.entries[i].name + "'");
            }
        }
        if (static_cast<int>(table.rows.size()) != n_configs) {
            throw std::runtime_error("schema mismatch: grid.csv has " +
                                     std::to_string(table.rows.size()) + " configs, manifest says " +
                                     std::to_string(n_configs));
        }
        md.grid.schema = schema;
        for (size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            HyperparameterConfig cfg;
            cfg.config_id = static_cast<int>(io::parse_int(row[0], "grid.csv config_id"));
            if (cfg.config_id != static_cast<int>(r)) {
                throw std::runtime_error("non-contiguous config ids in grid.csv at row " +
                                         std::to_string(r + 2));
            }
            cfg.raw.assign(row.begin() + 1, row.begin() + 1 + schema.entries.size());
            cfg.encoded.resize(P);
            for (int j = 0; j < P; ++j) {
                cfg.encoded[j] = io::parse_double(row[1 + schema.entries.size() + j], "grid.csv enc");
            }
            md.grid.configs.push_back(std::move(cfg));
        }
    }

    // metafeatures
    {
        const auto table = io::read_csv(require("metafeatures.csv", "metafeatures"));
        if (table.header.size() != 1 + kNumMetafeatures) {
            throw std::runtime_error("schema mismatch: metafeatures.csv must have 17 columns");
        }
        if (static_cast<int>(table.rows.size()) != n_datasets) {
            throw std::runtime_error("schema mismatch: metafeatures.csv has " +
                                     std::to_string(table.rows.size()) + " datasets, manifest says " +
                                     std::to_string(n_datasets));
        }
        for (size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const int id = static_cast<int>(io::parse_int(row[0], "metafeatures.csv dataset_id"));
            if (id != static_cast<int>(r)) {
                throw std::runtime_error("non-contiguous dataset ids in metafeatures.csv at row " +
                                         std::to_string(r + 2));
            }
            MetafeatureVector v;
            for (int j = 0; j < kNumMetafeatures; ++j) {
                v[j] = io::parse_double(row[1 + j], "metafeatures.csv value");
            }
            md.datasets.emplace_back(id, v);
        }
    }

    // scaler: shape check only; training always re-fits on its own split
    {
        const auto table = io::read_csv(require("scaler.csv", "scaler"));
        if (table.rows.size() != kNumMetafeatures) {
            throw std::runtime_error("schema mismatch: scaler.csv must have 16 rows");
        }
    }

    // responses
    {
        const auto table = io::read_csv(require("responses.csv", "responses"));
        md.responses.assign(n_datasets, Eigen::MatrixXd::Constant(n_configs, n_folds,
                                                                  std::numeric_limits<double>::quiet_NaN()));
        for (size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const std::string ctx = "responses.csv row " + std::to_string(r + 2);
            const int d = static_cast<int>(io::parse_int(row[0], ctx));
            const int c = static_cast<int>(io::parse_int(row[1], ctx));
            const int f = static_cast<int>(io::parse_int(row[2], ctx));
            const double loss = io::parse_double(row[3], ctx);
            if (d < 0 || d >= n_datasets || c < 0 || c >= n_configs || f < 0 || f >= n_folds) {
                throw std::runtime_error(ctx + ": index out of range");
            }
            if (!std::isfinite(loss)) throw std::runtime_error(ctx + ": non-finite loss");
            if (!std::isnan(md.responses[d](c, f))) {
                throw std::runtime_error(ctx + ": duplicate (dataset, config, fold) entry");
            }
            md.responses[d](c, f) = loss;
        }
        for (int d = 0; d < n_datasets; ++d) {
            for (int c = 0; c < n_configs; ++c) {
                for (int f = 0; f < n_folds; ++f) {
                    if (std::isnan(md.responses[d](c, f))) {
                        throw std::runtime_error("incomplete response table: dataset " +
                                                 std::to_string(d) + " config " + std::to_string(c) +
                                                 " fold " + std::to_string(f) + " missing");
                    }
                }
            }
        }
    }

    // splits
    {
        const auto table = io::read_csv(require("splits.csv", "splits"));
        std::map<int, SplitDef> by_id;
        for (size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const std::string ctx = "splits.csv row " + std::to_string(r + 2);
            const int k = static_cast<int>(io::parse_int(row[0], ctx));
            const int id = static_cast<int>(io::parse_int(row[1], ctx));
            if (id < 0 || id >= n_datasets) throw std::runtime_error(ctx + ": dataset id out of range");
            if (row[2] == "train") {
                by_id[k].train_ids.push_back(id);
            } else if (row[2] == "test") {
                by_id[k].test_ids.push_back(id);
            } else {
                throw std::runtime_error(ctx + ": role must be 'train' or 'test'");
            }
        }
        int expected = 0;
        for (auto& [k, split] : by_id) {
            if (k != expected++) throw std::runtime_error("non-contiguous split ids in splits.csv");
            std::set<int> seen(split.train_ids.begin(), split.train_ids.end());
            for (int id : split.test_ids) {
                if (!seen.insert(id).second) {
                    throw std::runtime_error("split " + std::to_string(k) +
                                             " does not partition the datasets (duplicate id " +
                                             std::to_string(id) + ")");
                }
            }
            if (static_cast<int>(seen.size()) != n_datasets) {
                throw std::runtime_error("split " + std::to_string(k) +
                                         " does not partition the datasets (covers " +
                                         std::to_string(seen.size()) + " of " +
                                         std::to_string(n_datasets) + ")");
            }
            md.splits.push_back(std::move(split));
        }
    }
    return md;
}

}  // namespace hyprl::meta

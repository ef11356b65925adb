#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "hyprl/csv.hpp"
#include "hyprl/metadataset.hpp"

using namespace hyprl;
using namespace hyprl::meta;

namespace {

HyperparameterGrid small_grid() {
    return encode_grid(parse_grid_spec("act:one-hot:a,b;x:scalar:0,0.5,1"));
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hyprl_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("same seed twice gives identical meta-datasets") {
    const auto grid = small_grid();
    const MetaDataset a = generate_synthetic_metadataset(4, grid, 3, 99);
    const MetaDataset b = generate_synthetic_metadataset(4, grid, 3, 99);
    CHECK(a == b);
    const MetaDataset c = generate_synthetic_metadataset(4, grid, 3, 100);
    CHECK_FALSE(a == c);
}

TEST_CASE("all losses in (0,1)") {
    const MetaDataset md = generate_synthetic_metadataset(6, small_grid(), 2, 1);
    for (const auto& resp : md.responses) {
        CHECK(resp.minCoeff() > 0.0);
        CHECK(resp.maxCoeff() < 1.0);
    }
}

TEST_CASE("zero noise keeps per-dataset argmin stable across folds") {
    const MetaDataset md = generate_synthetic_metadataset(5, small_grid(), 4, 7, /*noise_std=*/0.0);
    for (int d = 0; d < md.n_datasets(); ++d) {
        int argmin0 = 0;
        for (int f = 0; f < md.n_folds(); ++f) {
            int argmin = 0;
            for (int c = 1; c < md.n_configs(); ++c) {
                if (md.responses[d](c, f) < md.responses[d](argmin, f)) argmin = c;
            }
            if (f == 0) {
                argmin0 = argmin;
            } else {
                CHECK(argmin == argmin0);
            }
        }
    }
}

TEST_CASE("splits partition the datasets") {
    const MetaDataset md = generate_synthetic_metadataset(13, small_grid(), 1, 3);
    CHECK(md.splits.size() == 5);
    for (const auto& split : md.splits) {
        std::set<int> ids(split.train_ids.begin(), split.train_ids.end());
        for (int id : split.test_ids) CHECK(ids.insert(id).second);
        CHECK(ids.size() == 13);
        CHECK_FALSE(split.test_ids.empty());
        CHECK_FALSE(split.train_ids.empty());
    }
}

TEST_CASE("metafeatures correlate with the response surface") {
    const MetaDataset md = generate_synthetic_metadataset(20, small_grid(), 1, 12345);
    std::set<int> all_ids;
    for (const auto& [id, v] : md.datasets) all_ids.insert(id);
    const Scaler scaler = fit_scaler(md.datasets, all_ids);

    std::vector<double> meta_dist, resp_dist;
    for (int i = 0; i < md.n_datasets(); ++i) {
        for (int j = i + 1; j < md.n_datasets(); ++j) {
            const MetafeatureVector a = scaler.apply(md.datasets[i].second);
            const MetafeatureVector b = scaler.apply(md.datasets[j].second);
            meta_dist.push_back((a - b).norm());
            double r = 0.0;
            for (int c = 0; c < md.n_configs(); ++c) {
                const double diff = md.mean_loss(i, c) - md.mean_loss(j, c);
                r += diff * diff;
            }
            resp_dist.push_back(std::sqrt(r));
        }
    }
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / v.size();
    };
    const double mx = mean(meta_dist), my = mean(resp_dist);
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (size_t k = 0; k < meta_dist.size(); ++k) {
        cov += (meta_dist[k] - mx) * (resp_dist[k] - my);
        vx += (meta_dist[k] - mx) * (meta_dist[k] - mx);
        vy += (resp_dist[k] - my) * (resp_dist[k] - my);
    }
    const double corr = cov / std::sqrt(vx * vy);
    CHECK(corr > 0.0);
}

TEST_CASE("save/load round trip") {
    const auto dir = temp_dir("roundtrip");
    const MetaDataset md = generate_synthetic_metadataset(5, small_grid(), 3, 21);
    save_metadataset(md, dir);
    const MetaDataset loaded = load_metadataset(dir);
    CHECK(loaded == md);
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing responses.csv") {
    const auto dir = temp_dir("missing_responses");
    save_metadataset(generate_synthetic_metadataset(3, small_grid(), 1, 5), dir);
    std::filesystem::remove(dir / "responses.csv");
    CHECK_THROWS_WITH_AS(load_metadataset(dir),
                         ("missing responses: " + (dir / "responses.csv").string()).c_str(),
                         std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("response gap names the missing entry") {
    const auto dir = temp_dir("gap");
    save_metadataset(generate_synthetic_metadataset(3, small_grid(), 1, 5), dir);
    // drop the (dataset 0, config 5) row
    const auto table = io::read_csv(dir / "responses.csv");
    std::vector<std::vector<std::string>> kept;
    for (const auto& row : table.rows) {
        if (row[0] == "0" && row[1] == "5") continue;
        kept.push_back(row);
    }
    io::write_csv(dir / "responses.csv", table.header, kept);
    CHECK_THROWS_WITH_AS(load_metadataset(dir),
                         "incomplete response table: dataset 0 config 5 fold 0 missing",
                         std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("non-contiguous dataset ids rejected") {
    const auto dir = temp_dir("noncontig");
    save_metadataset(generate_synthetic_metadataset(3, small_grid(), 1, 5), dir);
    auto table = io::read_csv(dir / "metafeatures.csv");
    table.rows[1][0] = "7";
    io::write_csv(dir / "metafeatures.csv", table.header, table.rows);
    CHECK_THROWS_AS(load_metadataset(dir), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("grid column mismatch is a schema error") {
    const auto dir = temp_dir("schema_mismatch");
    save_metadataset(generate_synthetic_metadataset(3, small_grid(), 1, 5), dir);
    auto table = io::read_csv(dir / "grid.csv");
    table.header[1] = "renamed";
    io::write_csv(dir / "grid.csv", table.header, table.rows);
    try {
        load_metadataset(dir);
        FAIL("expected schema mismatch");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("schema mismatch") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("generator preconditions") {
    CHECK_THROWS_WITH_AS(generate_synthetic_metadataset(1, small_grid(), 1, 0),
                         "need >= 2 datasets for splits", std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic_metadataset(3, HyperparameterGrid{}, 1, 0),
                    std::invalid_argument);
}

TEST_CASE("mean_loss averages folds") {
    MetaDataset md = generate_synthetic_metadataset(2, small_grid(), 2, 9);
    md.responses[0](0, 0) = 0.2;
    md.responses[0](0, 1) = 0.4;
    CHECK(md.mean_loss(0, 0) == doctest::Approx(0.3));
    CHECK_THROWS_AS(md.mean_loss(0, 999), std::invalid_argument);
    CHECK_THROWS_AS(md.mean_loss(99, 0), std::invalid_argument);
}

#include "hyprl/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "hyprl/agent.hpp"
#include "hyprl/baselines.hpp"
#include "hyprl/csv.hpp"
#include "hyprl/evaluation.hpp"
#include "hyprl/metadataset.hpp"
#include "hyprl/neuralnet.hpp"

#ifndef HYPRL_VERSION
#define HYPRL_VERSION "v0.0.0"
#endif

namespace hyprl::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

uint64_t default_seed() {
    if (const char* env = std::getenv("HYPRL_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
        throw UsageError("HYPRL_SEED is not an integer: " + std::string(env));
    }
    return 0;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// One run manifest per output directory; a rerun needs --overwrite.
void guard_output_dir(const std::filesystem::path& dir, bool overwrite) {
    if (std::filesystem::exists(dir / "run_manifest.json") && !overwrite) {
        throw std::runtime_error("output directory " + dir.string() +
                                 " already contains run_manifest.json (pass --overwrite to rerun)");
    }
}

void write_run_manifest(const std::filesystem::path& dir, const std::string& command,
                        const json& config, uint64_t seed,
                        const std::vector<std::string>& inputs) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["seed"] = seed;
    manifest["inputs"] = inputs;
    manifest["version"] = HYPRL_VERSION;
    manifest["timestamp"] = timestamp_utc();
    std::ofstream out(dir / "run_manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write run manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string out;
    int datasets = 0;
    std::string grid = "full-nnmeta";
    int folds = 5;
    uint64_t seed = 0;
    bool seed_given = false;
    double noise = 0.01;
    bool overwrite = false;
};

int cmd_synth(const SynthArgs& a) {
    if (a.datasets < 2) throw UsageError("need >= 2 datasets for splits");
    if (a.folds < 1) throw UsageError("--folds must be >= 1");
    if (a.noise < 0.0) throw UsageError("--noise must be >= 0");
    const uint64_t seed = a.seed_given ? a.seed : default_seed();

    meta::GridSchema schema;
    try {
        schema = a.grid == "full-nnmeta" ? meta::nnmeta_schema() : meta::parse_grid_spec(a.grid);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const meta::HyperparameterGrid grid = meta::encode_grid(schema);

    const std::filesystem::path out(a.out);
    std::filesystem::create_directories(out);
    guard_output_dir(out, a.overwrite);

    const meta::MetaDataset md =
        meta::generate_synthetic_metadataset(a.datasets, grid, a.folds, seed, a.noise);
    meta::save_metadataset(md, out);

    json config{{"datasets", a.datasets}, {"grid", a.grid},   {"folds", a.folds},
                {"noise", a.noise},       {"out", a.out},     {"n_configs", md.n_configs()},
                {"encoded_dim", grid.encoded_dim()}};
    write_run_manifest(out, "synth", config, seed, {});
    std::cout << "wrote meta-dataset with " << md.n_datasets() << " datasets, " << md.n_configs()
              << " configs, " << md.n_folds() << " folds to " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeArgs {
    std::string data;
    std::string out;
};

int cmd_featurize(const FeaturizeArgs& a) {
    const io::CsvTable table = io::read_csv(a.data);
    if (table.rows.empty()) throw std::runtime_error("empty dataset");
    const size_t n_features = table.header.size();
    Eigen::MatrixXd data(table.rows.size(), n_features);
    for (size_t r = 0; r < table.rows.size(); ++r) {
        for (size_t c = 0; c < n_features; ++c) {
            data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = io::parse_double(
                table.rows[r][c],
                "row " + std::to_string(r + 2) + ", column " + std::to_string(c + 1));
        }
    }
    const meta::MetafeatureVector v = meta::compute_metafeatures(data);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < meta::kNumMetafeatures; ++i) {
        rows.push_back({meta::kMetafeatureNames[i], io::format_double(v[i])});
    }
    io::write_csv(a.out, {"metafeature", "value"}, rows);
    std::cout << "wrote " << meta::kNumMetafeatures << " metafeatures to " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string metadata;
    int split = 0;
    std::string out;
    agent::TrainConfig cfg;
    bool seed_given = false;
    int checkpoint_every = 0;
    bool traces = false;
    bool overwrite = false;
};

int cmd_train(const TrainArgs& a) {
    try {
        a.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const meta::MetaDataset md = meta::load_metadataset(a.metadata);
    if (a.split < 0 || a.split >= static_cast<int>(md.splits.size())) {
        throw UsageError("split " + std::to_string(a.split) + " does not exist (meta-dataset has " +
                         std::to_string(md.splits.size()) + " splits)");
    }

    const std::filesystem::path out(a.out);
    std::filesystem::create_directories(out);
    guard_output_dir(out, a.overwrite);

    agent::TrainConfig cfg = a.cfg;
    if (!a.seed_given) cfg.seed = default_seed();
    cfg.record_traces = a.traces;

    agent::EpisodeHook hook;
    if (a.checkpoint_every > 0) {
        hook = [&](int episode, const nn::QNetworkParams& params, const meta::Scaler& scaler) {
            if (episode % a.checkpoint_every == 0) {
                nn::save_checkpoint(out / ("checkpoint_ep" + std::to_string(episode) + ".bin"),
                                    params, scaler.mean, scaler.stddev);
            }
        };
    }

    const agent::TrainResult result = agent::train(md, md.splits[a.split].train_ids, cfg, hook);
    nn::save_checkpoint(out / "checkpoint.bin", result.params, result.scaler.mean,
                        result.scaler.stddev);
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& row : result.log) {
            rows.push_back({std::to_string(row.episode), std::to_string(row.dataset_id),
                            std::to_string(row.steps), io::format_double(row.episode_return),
                            io::format_double(row.mean_q), io::format_double(row.epsilon),
                            std::to_string(row.frames), std::to_string(row.target_syncs)});
        }
        io::write_csv(out / "training_log.csv",
                      {"episode", "dataset_id", "steps", "return", "mean_q", "epsilon", "frames",
                       "target_syncs"},
                      rows);
    }
    if (a.traces) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& tr : result.traces) {
            rows.push_back({std::to_string(tr.episode), std::to_string(tr.t),
                            std::to_string(tr.dataset_id), std::to_string(tr.action),
                            io::format_double(tr.reward), env::terminal_reason_name(tr.terminal_reason)});
        }
        io::write_csv(out / "trace.csv",
                      {"episode", "t", "dataset_id", "action", "reward", "terminal_reason"}, rows);
    }

    json config{{"metadata", a.metadata},
                {"split", a.split},
                {"out", a.out},
                {"gamma", cfg.gamma},
                {"target_update_frequency", cfg.target_update_frequency},
                {"buffer_capacity", cfg.buffer_capacity},
                {"episodes_per_dataset", cfg.episodes_per_dataset},
                {"budget", cfg.budget},
                {"train_frequency", cfg.train_frequency},
                {"learning_rate", cfg.learning_rate},
                {"minibatch_size", cfg.minibatch_size},
                {"epsilon_start", cfg.epsilon.start},
                {"epsilon_end", cfg.epsilon.end},
                {"epsilon_anneal_frames", cfg.epsilon.anneal_frames},
                {"hidden_units", cfg.hidden_units},
                {"layer_units", cfg.layer_units},
                {"checkpoint_every", a.checkpoint_every},
                {"traces", a.traces}};
    write_run_manifest(out, "train", config, cfg.seed, {a.metadata});
    std::cout << "trained " << result.log.size() << " episodes ("
              << (result.log.empty() ? 0 : result.log.back().frames) << " frames); checkpoint at "
              << (out / "checkpoint.bin").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string metadata;
    int split = 0;
    std::string methods = "random";
    std::string checkpoint;
    int budget = 10;
    int seeds = 1;
    uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 1;
    std::string out;
    bool overwrite = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
    if (a.budget < 1) throw UsageError("--budget must be >= 1");
    if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
    if (a.jobs < 1) throw UsageError("--jobs must be >= 1");

    std::vector<std::string> method_names;
    {
        std::istringstream ss(a.methods);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (!name.empty()) method_names.push_back(name);
        }
        if (method_names.empty()) throw UsageError("--methods is empty");
    }
    const bool wants_hyprl =
        std::find(method_names.begin(), method_names.end(), "hyp-rl") != method_names.end();
    if (wants_hyprl && a.checkpoint.empty()) {
        throw UsageError("--checkpoint is required when hyp-rl is among the methods");
    }

    const meta::MetaDataset md = meta::load_metadataset(a.metadata);
    if (a.split < 0 || a.split >= static_cast<int>(md.splits.size())) {
        throw UsageError("split " + std::to_string(a.split) + " does not exist (meta-dataset has " +
                         std::to_string(md.splits.size()) + " splits)");
    }
    if (a.budget > md.n_configs()) {
        throw UsageError("--budget " + std::to_string(a.budget) + " exceeds grid size " +
                         std::to_string(md.n_configs()));
    }

    std::optional<nn::Checkpoint> ckpt;
    if (wants_hyprl) ckpt = nn::load_checkpoint(a.checkpoint);

    std::vector<eval::TuningMethod> methods;
    for (const auto& name : method_names) {
        if (name == "random") {
            methods.push_back({name, [](const meta::MetaDataset& m, int, int dataset_id,
                                        int budget, uint64_t seed) {
                                   Rng rng(seed);
                                   TrialRecord rec;
                                   rec.dataset_id = dataset_id;
                                   const auto start = std::chrono::steady_clock::now();
                                   const auto ids = baselines::random_search(m.n_configs(), budget, rng);
                                   const std::chrono::duration<double> elapsed =
                                       std::chrono::steady_clock::now() - start;
                                   for (int t = 1; t <= budget; ++t) {
                                       rec.trials.push_back(Trial{t, ids[t - 1],
                                                                  m.mean_loss(dataset_id, ids[t - 1])});
                                       rec.suggest_seconds.push_back(elapsed.count() / budget);
                                   }
                                   return rec;
                               }});
        } else if (name == "i-gp") {
            methods.push_back({name, [](const meta::MetaDataset& m, int, int dataset_id,
                                        int budget, uint64_t seed) {
                                   Rng rng(seed);
                                   return baselines::smbo_run(
                                       m, dataset_id, budget,
                                       baselines::KernelKind::SquaredExponentialArd, rng, "i-gp");
                               }});
        } else if (name == "spearmint") {
            methods.push_back({name, [](const meta::MetaDataset& m, int, int dataset_id,
                                        int budget, uint64_t seed) {
                                   Rng rng(seed);
                                   return baselines::smbo_run(m, dataset_id, budget,
                                                              baselines::KernelKind::Matern52, rng,
                                                              "spearmint");
                               }});
        } else if (name == "hyp-rl") {
            meta::Scaler scaler{ckpt->scaler_mean, ckpt->scaler_std};
            methods.push_back({name, [params = ckpt->params, scaler](const meta::MetaDataset& m,
                                                                     int, int dataset_id,
                                                                     int budget, uint64_t) {
                                   return agent::deploy(params, scaler, m, dataset_id, budget);
                               }});
        } else {
            throw UsageError("unknown method '" + name +
                             "' (expected random, i-gp, spearmint or hyp-rl)");
        }
    }

    const std::filesystem::path out(a.out);
    std::filesystem::create_directories(out);
    guard_output_dir(out, a.overwrite);

    const uint64_t base_seed = a.seed_given ? a.seed : default_seed();
    std::vector<uint64_t> seeds;
    for (int i = 0; i < a.seeds; ++i) seeds.push_back(base_seed + static_cast<uint64_t>(i));

    const eval::BenchmarkReport report =
        eval::run_benchmark(md, methods, a.budget, seeds, {a.split}, a.jobs, out);
    eval::emit_report(report, out);

    json config{{"metadata", a.metadata}, {"split", a.split},   {"methods", a.methods},
                {"checkpoint", a.checkpoint}, {"budget", a.budget}, {"seeds", a.seeds},
                {"jobs", a.jobs},             {"out", a.out}};
    std::vector<std::string> inputs{a.metadata};
    if (!a.checkpoint.empty()) inputs.push_back(a.checkpoint);
    write_run_manifest(out, "evaluate", config, base_seed, inputs);
    std::cout << "benchmark report written to " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
    std::string report;
    std::string out;
    bool overwrite = false;
};

std::vector<eval::AdtmRow> parse_adtm_csv(const std::filesystem::path& path) {
    const io::CsvTable table = io::read_csv(path);
    const std::vector<std::string> expected{"method", "split", "t", "value"};
    if (table.header != expected) {
        throw std::runtime_error(path.string() +
                                 ": expected columns method,split,t,value");
    }
    std::vector<eval::AdtmRow> rows;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const std::string ctx = path.string() + " line " + std::to_string(r + 2);
        rows.push_back(eval::AdtmRow{table.rows[r][0],
                                     static_cast<int>(io::parse_int(table.rows[r][1], ctx)),
                                     static_cast<int>(io::parse_int(table.rows[r][2], ctx)),
                                     io::parse_double(table.rows[r][3], ctx)});
    }
    return rows;
}

std::vector<eval::RankRow> parse_rank_csv(const std::filesystem::path& path) {
    const io::CsvTable table = io::read_csv(path);
    const std::vector<std::string> expected{"method", "dataset_id", "t", "best_loss", "rank"};
    if (table.header != expected) {
        throw std::runtime_error(path.string() +
                                 ": expected columns method,dataset_id,t,best_loss,rank");
    }
    std::vector<eval::RankRow> rows;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const std::string ctx = path.string() + " line " + std::to_string(r + 2);
        rows.push_back(eval::RankRow{table.rows[r][0],
                                     static_cast<int>(io::parse_int(table.rows[r][1], ctx)),
                                     static_cast<int>(io::parse_int(table.rows[r][2], ctx)),
                                     io::parse_double(table.rows[r][3], ctx),
                                     io::parse_double(table.rows[r][4], ctx)});
    }
    return rows;
}

int cmd_plot(const PlotArgs& a) {
    const std::filesystem::path report(a.report);
    const std::filesystem::path out(a.out);
    std::filesystem::create_directories(out);
    guard_output_dir(out, a.overwrite);

    const auto adtm_rows = parse_adtm_csv(report / "adtm.csv");
    const auto rank_rows = parse_rank_csv(report / "rank.csv");
    if (!eval::write_adtm_svg(out / "adtm.svg", adtm_rows)) {
        std::cerr << "warning: adtm.csv has no rows; ADTM plot skipped\n";
    }
    if (!eval::write_rank_svg(out / "rank.svg", rank_rows)) {
        std::cerr << "warning: rank.csv has no rows; rank plot skipped\n";
    }

    json config{{"report", a.report}, {"out", a.out}};
    write_run_manifest(out, "plot", config, 0, {a.report});
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Hyp-RL: hyperparameter optimization by reinforcement learning"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic meta-dataset directory");
    synth_cmd->add_option("--out", synth.out, "output directory")->required();
    synth_cmd->add_option("--datasets", synth.datasets, "number of datasets (>= 2)")->required();
    synth_cmd->add_option("--grid", synth.grid,
                          "'full-nnmeta' or a spec 'name:kind:v1,v2,...;...' with kind one-hot|scalar")
        ->capture_default_str();
    synth_cmd->add_option("--folds", synth.folds, "folds per (dataset, config)")->capture_default_str();
    auto* synth_seed = synth_cmd->add_option("--seed", synth.seed, "generator seed (default: HYPRL_SEED or 0)");
    synth_cmd->add_option("--noise", synth.noise, "fold noise standard deviation")->capture_default_str();
    synth_cmd->add_flag("--overwrite", synth.overwrite, "allow rerunning into an existing output directory");

    FeaturizeArgs featurize;
    auto* feat_cmd = app.add_subcommand("featurize", "compute the 16 metafeatures of a numeric CSV");
    feat_cmd->add_option("--data", featurize.data, "input CSV with header row")->required();
    feat_cmd->add_option("--out", featurize.out, "output CSV file")->required();

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train the Hyp-RL policy on a split");
    train_cmd->add_option("--metadata", train.metadata, "meta-dataset directory")->required();
    train_cmd->add_option("--split", train.split, "split index")->capture_default_str();
    train_cmd->add_option("--out", train.out, "output directory")->required();
    train_cmd->add_option("--gamma", train.cfg.gamma, "discount factor in [0,1]")->capture_default_str();
    train_cmd->add_option("--target-update", train.cfg.target_update_frequency,
                          "target sync frequency N_u (environment steps)")->capture_default_str();
    train_cmd->add_option("--buffer", train.cfg.buffer_capacity, "replay buffer size N_b")->capture_default_str();
    train_cmd->add_option("--episodes", train.cfg.episodes_per_dataset,
                          "episodes per dataset N_e")->capture_default_str();
    train_cmd->add_option("--budget", train.cfg.budget, "actions per episode T")->capture_default_str();
    train_cmd->add_option("--train-frequency", train.cfg.train_frequency,
                          "environment steps per gradient update N_train")->capture_default_str();
    train_cmd->add_option("--lr", train.cfg.learning_rate, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--minibatch", train.cfg.minibatch_size, "minibatch size")->capture_default_str();
    train_cmd->add_option("--eps-start", train.cfg.epsilon.start, "epsilon before annealing")->capture_default_str();
    train_cmd->add_option("--eps-end", train.cfg.epsilon.end, "epsilon after annealing")->capture_default_str();
    train_cmd->add_option("--eps-anneal-frames", train.cfg.epsilon.anneal_frames,
                          "anneal length in frames (0 = 25% of the frames left after buffer fill)")
        ->capture_default_str();
    train_cmd->add_option("--hidden", train.cfg.hidden_units, "LSTM hidden units N_h")->capture_default_str();
    train_cmd->add_option("--layer", train.cfg.layer_units, "dense layer units N_layer")->capture_default_str();
    auto* train_seed = train_cmd->add_option("--seed", train.cfg.seed, "training seed (default: HYPRL_SEED or 0)");
    train_cmd->add_option("--checkpoint-every", train.checkpoint_every,
                          "write checkpoint_epN.bin every N episodes (0 = final only)")->capture_default_str();
    train_cmd->add_flag("--traces", train.traces, "also write per-step trace.csv");
    train_cmd->add_flag("--overwrite", train.overwrite, "allow rerunning into an existing output directory");

    EvaluateArgs evaluate;
    auto* eval_cmd = app.add_subcommand("evaluate", "benchmark tuning methods on a split's test datasets");
    eval_cmd->add_option("--metadata", evaluate.metadata, "meta-dataset directory")->required();
    eval_cmd->add_option("--split", evaluate.split, "split index")->capture_default_str();
    eval_cmd->add_option("--methods", evaluate.methods,
                         "comma list of random,i-gp,spearmint,hyp-rl")->capture_default_str();
    eval_cmd->add_option("--checkpoint", evaluate.checkpoint, "Hyp-RL checkpoint (required for hyp-rl)");
    eval_cmd->add_option("--budget", evaluate.budget, "trials per dataset")->capture_default_str();
    eval_cmd->add_option("--seeds", evaluate.seeds, "number of seeds per method")->capture_default_str();
    auto* eval_seed = eval_cmd->add_option("--seed", evaluate.seed, "base seed (default: HYPRL_SEED or 0)");
    eval_cmd->add_option("--jobs", evaluate.jobs, "parallel benchmark workers")->capture_default_str();
    eval_cmd->add_option("--out", evaluate.out, "report directory")->required();
    eval_cmd->add_flag("--overwrite", evaluate.overwrite, "allow rerunning into an existing output directory");

    PlotArgs plot;
    auto* plot_cmd = app.add_subcommand("plot", "regenerate SVG plots from report CSVs");
    plot_cmd->add_option("--report", plot.report, "directory containing adtm.csv and rank.csv")->required();
    plot_cmd->add_option("--out", plot.out, "output directory")->required();
    plot_cmd->add_flag("--overwrite", plot.overwrite, "allow rerunning into an existing output directory");

    std::vector<const char*> argv;
    argv.push_back("hyprl");
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (synth_cmd->parsed()) {
            synth.seed_given = synth_seed->count() > 0;
            return cmd_synth(synth);
        }
        if (feat_cmd->parsed()) return cmd_featurize(featurize);
        if (train_cmd->parsed()) {
            train.seed_given = train_seed->count() > 0;
            return cmd_train(train);
        }
        if (eval_cmd->parsed()) {
            evaluate.seed_given = eval_seed->count() > 0;
            return cmd_evaluate(evaluate);
        }
        if (plot_cmd->parsed()) return cmd_plot(plot);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace hyprl::cli

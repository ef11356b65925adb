#include "hyprl/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "hyprl/csv.hpp"
#include "hyprl/rng.hpp"
#include "hyprl/svgplot.hpp"

namespace hyprl::eval {

double adtm(const std::vector<TrialRecord>& per_dataset_records, int t,
            const meta::MetaDataset& md, int* degenerate_excluded) {
    if (t < 1) throw std::invalid_argument("adtm: t must be >= 1");
    double sum = 0.0;
    int included = 0;
    int degenerate = 0;
    for (const auto& record : per_dataset_records) {
        const int d = record.dataset_id;
        int have = 0;
        for (const auto& trial : record.trials) {
            if (trial.t <= t) ++have;
        }
        if (have < t) {
            throw std::invalid_argument("adtm: record for dataset " + std::to_string(d) +
                                        " has fewer than " + std::to_string(t) + " trials");
        }
        double f_min = std::numeric_limits<double>::infinity();
        double f_max = -f_min;
        for (int c = 0; c < md.n_configs(); ++c) {
            const double f = md.mean_loss(d, c);
            f_min = std::min(f_min, f);
            f_max = std::max(f_max, f);
        }
        if (!(f_max > f_min)) {
            ++degenerate;
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& trial : record.trials) {
            if (trial.t > t) continue;
            best = std::min(best, (md.mean_loss(d, trial.config_id) - f_min) / (f_max - f_min));
        }
        sum += best;
        ++included;
    }
    if (degenerate_excluded) *degenerate_excluded = degenerate;
    if (included == 0) throw std::runtime_error("adtm: every dataset has a flat response surface");
    return sum / included;
}

std::map<std::string, double> average_rank(
    const std::map<std::string, std::map<int, double>>& best_so_far) {
    if (best_so_far.empty()) throw std::invalid_argument("average_rank: no methods");
    std::set<int> dataset_ids;
    for (const auto& [method, by_dataset] : best_so_far) {
        for (const auto& [id, loss] : by_dataset) dataset_ids.insert(id);
    }
    std::map<std::string, double> rank_sum;
    for (int id : dataset_ids) {
        std::vector<std::pair<double, std::string>> losses;
        for (const auto& [method, by_dataset] : best_so_far) {
            const auto it = by_dataset.find(id);
            if (it == by_dataset.end()) {
                throw std::invalid_argument("average_rank: method '" + method +
                                            "' has no value for dataset " + std::to_string(id));
            }
            losses.emplace_back(it->second, method);
        }
        std::sort(losses.begin(), losses.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        // average-tie ranks
        size_t i = 0;
        while (i < losses.size()) {
            size_t j = i;
            while (j + 1 < losses.size() && losses[j + 1].first == losses[i].first) ++j;
            const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (size_t k = i; k <= j; ++k) rank_sum[losses[k].second] += rank;
            i = j + 1;
        }
    }
    std::map<std::string, double> out;
    for (auto& [method, sum] : rank_sum) out[method] = sum / static_cast<double>(dataset_ids.size());
    return out;
}

namespace {

struct Task {
    int method_index = 0;
    int split = 0;
    uint64_t seed = 0;
    int dataset_id = 0;
};

BenchmarkReport aggregate(const meta::MetaDataset& md, const std::vector<TuningMethod>& methods,
                          int budget, const std::vector<uint64_t>& seeds,
                          const std::vector<int>& split_ids, const std::vector<Task>& tasks,
                          const std::vector<TrialRecord>& records) {
    BenchmarkReport report;
    report.trials = records;

    // ADTM per (method, split, t), averaged over seeds
    std::set<std::pair<int, int>> degenerate;  // (split, dataset)
    for (const auto& method : methods) {
        for (int split : split_ids) {
            for (int t = 1; t <= budget; ++t) {
                double sum = 0.0;
                for (uint64_t seed : seeds) {
                    std::vector<TrialRecord> group;
                    for (size_t i = 0; i < tasks.size(); ++i) {
                        if (methods[tasks[i].method_index].name == method.name &&
                            tasks[i].split == split && tasks[i].seed == seed) {
                            group.push_back(records[i]);
                        }
                    }
                    int excluded = 0;
                    sum += adtm(group, t, md, &excluded);
                    if (excluded > 0) {
                        for (const auto& rec : group) {
                            double f_min = std::numeric_limits<double>::infinity(), f_max = -f_min;
                            for (int c = 0; c < md.n_configs(); ++c) {
                                f_min = std::min(f_min, md.mean_loss(rec.dataset_id, c));
                                f_max = std::max(f_max, md.mean_loss(rec.dataset_id, c));
                            }
                            if (!(f_max > f_min)) degenerate.insert({split, rec.dataset_id});
                        }
                    }
                }
                report.adtm.push_back(
                    AdtmRow{method.name, split, t, sum / static_cast<double>(seeds.size())});
            }
        }
    }
    report.degenerate_excluded = static_cast<int>(degenerate.size());

    // best-so-far per (method, dataset, t) averaged over seeds, then ranks
    std::vector<int> dataset_order;
    for (int split : split_ids) {
        for (int id : md.splits[split].test_ids) {
            if (std::find(dataset_order.begin(), dataset_order.end(), id) == dataset_order.end()) {
                dataset_order.push_back(id);
            }
        }
    }
    for (int t = 1; t <= budget; ++t) {
        std::map<std::string, std::map<int, double>> best;  // method -> dataset -> mean loss
        std::map<std::string, std::map<int, int>> counts;
        for (size_t i = 0; i < tasks.size(); ++i) {
            const std::string& name = methods[tasks[i].method_index].name;
            best[name][tasks[i].dataset_id] += records[i].best_loss_at(t);
            counts[name][tasks[i].dataset_id] += 1;
        }
        for (auto& [name, by_dataset] : best) {
            for (auto& [id, sum] : by_dataset) sum /= counts[name][id];
        }
        // rank per dataset with average ties
        for (int id : dataset_order) {
            std::map<std::string, std::map<int, double>> single;
            for (const auto& method : methods) single[method.name][0] = best[method.name][id];
            const auto ranks = average_rank(single);
            for (const auto& method : methods) {
                report.ranks.push_back(
                    RankRow{method.name, id, t, best[method.name][id], ranks.at(method.name)});
            }
        }
    }

    // timing per method
    for (const auto& method : methods) {
        double total = 0.0;
        long n = 0;
        for (size_t i = 0; i < tasks.size(); ++i) {
            if (methods[tasks[i].method_index].name != method.name) continue;
            for (double s : records[i].suggest_seconds) {
                total += s;
                ++n;
            }
        }
        report.timing.push_back(TimingRow{method.name, n > 0 ? total / n : 0.0, n});
    }
    return report;
}

}  // namespace

BenchmarkReport run_benchmark(const meta::MetaDataset& md,
                              const std::vector<TuningMethod>& methods, int budget,
                              const std::vector<uint64_t>& seeds,
                              const std::vector<int>& split_ids, int jobs,
                              const std::optional<std::filesystem::path>& flush_dir) {
    if (methods.empty()) throw std::invalid_argument("run_benchmark: no methods");
    if (seeds.empty()) throw std::invalid_argument("run_benchmark: no seeds");
    if (md.splits.empty()) throw std::invalid_argument("run_benchmark: meta-dataset has no splits");
    if (budget < 1 || budget > md.n_configs()) {
        throw std::invalid_argument("run_benchmark: budget " + std::to_string(budget) +
                                    " exceeds grid size " + std::to_string(md.n_configs()));
    }
    for (int split : split_ids) {
        if (split < 0 || split >= static_cast<int>(md.splits.size())) {
            throw std::invalid_argument("run_benchmark: split " + std::to_string(split) +
                                        " does not exist");
        }
    }

    std::vector<Task> tasks;
    for (int split : split_ids) {
        for (uint64_t seed : seeds) {
            for (int dataset_id : md.splits[split].test_ids) {
                for (size_t m = 0; m < methods.size(); ++m) {
                    tasks.push_back(Task{static_cast<int>(m), split, seed, dataset_id});
                }
            }
        }
    }

    std::vector<TrialRecord> records(tasks.size());
    std::vector<char> done(tasks.size(), 0);
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    const auto worker = [&]() {
        while (!failed.load()) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            try {
                const uint64_t task_seed = mix64(task.seed, static_cast<uint64_t>(task.split),
                                                 static_cast<uint64_t>(task.dataset_id));
                TrialRecord rec =
                    methods[task.method_index].run(md, task.split, task.dataset_id, budget, task_seed);
                rec.method = methods[task.method_index].name;
                rec.split = task.split;
                rec.dataset_id = task.dataset_id;
                rec.seed = task.seed;
                records[i] = std::move(rec);
                done[i] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (failed.load()) {
        if (flush_dir) {
            BenchmarkReport partial;
            for (size_t i = 0; i < tasks.size(); ++i) {
                if (done[i]) partial.trials.push_back(records[i]);
            }
            try {
                std::filesystem::create_directories(*flush_dir);
                emit_report(partial, *flush_dir);
            } catch (...) {
                // the original failure is the one worth reporting
            }
        }
        std::rethrow_exception(error);
    }

    return aggregate(md, methods, budget, seeds, split_ids, tasks, records);
}

void emit_report(const BenchmarkReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report.adtm) {
            rows.push_back({r.method, std::to_string(r.split), std::to_string(r.t),
                            io::format_double(r.value)});
        }
        io::write_csv(dir / "adtm.csv", {"method", "split", "t", "value"}, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report.ranks) {
            rows.push_back({r.method, std::to_string(r.dataset_id), std::to_string(r.t),
                            io::format_double(r.best_loss), io::format_double(r.rank)});
        }
        io::write_csv(dir / "rank.csv", {"method", "dataset_id", "t", "best_loss", "rank"}, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report.timing) {
            rows.push_back({r.method, io::format_double(r.mean_seconds_per_trial),
                            std::to_string(r.n_suggestions)});
        }
        io::write_csv(dir / "timing.csv", {"method", "mean_seconds_per_trial", "n_suggestions"},
                      rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& rec : report.trials) {
            for (const auto& trial : rec.trials) {
                rows.push_back({rec.method, std::to_string(rec.dataset_id),
                                std::to_string(rec.seed), std::to_string(trial.t),
                                std::to_string(trial.config_id), io::format_double(trial.loss)});
            }
        }
        io::write_csv(dir / "trials.csv",
                      {"method", "dataset_id", "seed", "t", "config_id", "loss"}, rows);
    }
    write_adtm_svg(dir / "adtm.svg", report.adtm);
    write_rank_svg(dir / "rank.svg", report.ranks);
    if (report.degenerate_excluded > 0) {
        std::cerr << "warning: " << report.degenerate_excluded
                  << " dataset(s) with a flat response surface excluded from ADTM\n";
    }
}

bool write_adtm_svg(const std::filesystem::path& path, const std::vector<AdtmRow>& rows) {
    if (rows.empty()) return false;
    // mean over splits per (method, t); methods keep first-appearance order
    std::vector<std::string> method_order;
    std::map<std::string, std::map<int, std::pair<double, int>>> acc;
    for (const auto& r : rows) {
        if (std::find(method_order.begin(), method_order.end(), r.method) == method_order.end()) {
            method_order.push_back(r.method);
        }
        auto& cell = acc[r.method][r.t];
        cell.first += r.value;
        cell.second += 1;
    }
    std::vector<plot::Series> series;
    for (const auto& name : method_order) {
        plot::Series s;
        s.label = name;
        for (const auto& [t, cell] : acc[name]) {
            s.points.emplace_back(static_cast<double>(t), cell.first / cell.second);
        }
        series.push_back(std::move(s));
    }
    plot::write_line_chart(path, "Average distance to the minimum", "trial", "ADTM", series);
    return true;
}

bool write_rank_svg(const std::filesystem::path& path, const std::vector<RankRow>& rows) {
    if (rows.empty()) return false;
    std::vector<std::string> method_order;
    std::map<std::string, std::map<int, std::pair<double, int>>> acc;
    for (const auto& r : rows) {
        if (std::find(method_order.begin(), method_order.end(), r.method) == method_order.end()) {
            method_order.push_back(r.method);
        }
        auto& cell = acc[r.method][r.t];
        cell.first += r.rank;
        cell.second += 1;
    }
    std::vector<plot::Series> series;
    for (const auto& name : method_order) {
        plot::Series s;
        s.label = name;
        for (const auto& [t, cell] : acc[name]) {
            s.points.emplace_back(static_cast<double>(t), cell.first / cell.second);
        }
        series.push_back(std::move(s));
    }
    plot::write_line_chart(path, "Average rank", "trial", "average rank", series);
    return true;
}

}  // namespace hyprl::eval

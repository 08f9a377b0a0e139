#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "algorithms.hpp"
#include "archive.hpp"
#include "benchmarks.hpp"
#include "cvt.hpp"
#include "format.hpp"
#include "report.hpp"
#include "stats.hpp"

namespace dme {

enum class AlgorithmType { dme, cvt_me, de };

struct AlgorithmSpec {
    std::string name;  // row label and file-name component
    AlgorithmType type = AlgorithmType::dme;
    DEParameters de;                  // dme and canonical de
    double sigma_divisor = 300.0;     // cvt_me: sigma = box width / divisor
    std::size_t de_population = 100;  // canonical de only
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<std::string> functions;
    std::vector<std::size_t> dimensions;
    std::vector<AlgorithmSpec> algorithms;
    std::string baseline;  // algorithm the +/=/- verdicts compare against
    std::size_t runs = 10;
    std::uint64_t base_seed = 1000;
    std::size_t budget_multiplier = 10000;  // evaluations = multiplier * n
    std::size_t budget_absolute = 0;        // nonzero overrides the multiplier
    std::size_t k = 1000;
    std::size_t initial_multiplier = 100;  // G = multiplier * n
    std::size_t initial_absolute = 0;
    ClipMode clip_mode = ClipMode::saturating;
    std::size_t parallelism = 0;  // 0 = hardware concurrency
    std::string output_dir = "results";
    std::uint64_t cvt_seed = 7;
    std::string cvt_cache_dir;  // empty resolves to <output_dir>/cvt
    std::uint64_t transform_seed = 2005;
    std::size_t record_points = 100;  // snapshots per run
    double alpha = 0.05;
    std::string dump_archives = "first";  // first | all | none
    bool heatmaps = true;

    std::size_t budget_for(std::size_t n) const {
        return budget_absolute != 0 ? budget_absolute : budget_multiplier * n;
    }
    std::size_t initial_for(std::size_t n) const {
        return initial_absolute != 0 ? initial_absolute : initial_multiplier * n;
    }

    void validate() const {
        if (functions.empty()) throw std::invalid_argument("config: no functions listed");
        for (const std::string& fn : functions) make_problem(fn, 2);  // name check
        if (dimensions.empty()) throw std::invalid_argument("config: no dimensions listed");
        for (const std::size_t n : dimensions)
            if (n < 2) throw std::invalid_argument("config: dimensions must be at least 2");
        if (algorithms.empty()) throw std::invalid_argument("config: no algorithms listed");
        std::set<std::string> names;
        for (const AlgorithmSpec& a : algorithms) {
            if (a.name.empty()) throw std::invalid_argument("config: empty algorithm name");
            for (const char ch : a.name)
                if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
                    throw std::invalid_argument("config: algorithm name '" + a.name +
                                                "' is not filesystem safe");
            if (!names.insert(a.name).second)
                throw std::invalid_argument("config: duplicate algorithm name " + a.name);
            a.de.validate();
            if (a.type == AlgorithmType::cvt_me && a.sigma_divisor <= 0.0)
                throw std::invalid_argument("config: sigma_divisor must be positive");
            if (a.type == AlgorithmType::de && a.de_population < 4)
                throw std::invalid_argument("config: de_population must be at least 4");
        }
        if (!names.count(baseline))
            throw std::invalid_argument("config: baseline '" + baseline +
                                        "' is not one of the listed algorithms");
        if (runs == 0) throw std::invalid_argument("config: runs must be positive");
        if (k == 0) throw std::invalid_argument("config: k must be positive");
        if (record_points == 0) throw std::invalid_argument("config: record_points must be positive");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("config: alpha outside (0,1)");
        if (dump_archives != "first" && dump_archives != "all" && dump_archives != "none")
            throw std::invalid_argument("config: dump_archives must be first, all, or none");
        for (const std::size_t n : dimensions) {
            const std::size_t g = initial_for(n);
            if (g < 4) throw std::invalid_argument("config: initial solutions below 4");
            if (budget_for(n) < g)
                throw std::invalid_argument("config: budget smaller than initialization");
        }
        if (output_dir.empty()) throw std::invalid_argument("config: output_dir is empty");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string to_lower(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : s) {
        if (ch == ',') {
            const std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const std::uint64_t value = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' wants an integer, got '" + v + "'");
    }
}

inline double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double value = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' wants a number, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    const std::string t = to_lower(v);
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw std::invalid_argument("config: key '" + key + "' wants a boolean, got '" + v + "'");
}

inline AlgorithmType parse_algorithm_type(const std::string& v) {
    const std::string t = to_lower(v);
    if (t == "dme") return AlgorithmType::dme;
    if (t == "cvt_me" || t == "cvt-me" || t == "cvtme") return AlgorithmType::cvt_me;
    if (t == "de") return AlgorithmType::de;
    throw std::invalid_argument("config: unknown algorithm type '" + v +
                                "' (expected dme, cvt_me, or de)");
}

inline ClipMode parse_clip_mode(const std::string& v) {
    const std::string t = to_lower(v);
    if (t == "saturating") return ClipMode::saturating;
    if (t == "literal") return ClipMode::literal;
    throw std::invalid_argument("config: clip_mode must be saturating or literal, got '" + v + "'");
}

using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

inline ConfigSections read_config_sections(std::istream& in) {
    ConfigSections sections;
    std::string line, section = "experiment";
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = " (line " + std::to_string(line_no) + ")";
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: malformed section header" + where);
            section = to_lower(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw std::invalid_argument("config: empty section name" + where);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value" + where);
        const std::string key = to_lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key" + where);
        if (!sections[section].emplace(key, value).second)
            throw std::invalid_argument("config: duplicate key '" + key + "'" + where);
    }
    return sections;
}

}  // namespace detail

// Key/value configuration with an [experiment] section and optional
// [algorithm:<name>] override sections. Unknown keys are rejected so
// typos surface before any run starts.
inline ExperimentConfig parse_experiment_config(std::istream& in) {
    using detail::parse_bool;
    using detail::parse_real;
    using detail::parse_u64;

    const detail::ConfigSections sections = detail::read_config_sections(in);
    ExperimentConfig config;
    DEParameters default_de;
    double default_sigma_divisor = 300.0;
    std::size_t default_population = 100;
    std::vector<std::string> algorithm_tokens = {"dme", "cvt_me"};

    for (const auto& [section, keys] : sections) {
        if (section == "experiment") continue;
        if (section.rfind("algorithm:", 0) != 0)
            throw std::invalid_argument("config: unknown section [" + section + "]");
    }

    if (const auto it = sections.find("experiment"); it != sections.end()) {
        for (const auto& [key, value] : it->second) {
            if (key == "name") config.name = value;
            else if (key == "functions") config.functions = detail::split_list(detail::to_lower(value));
            else if (key == "dimensions") {
                config.dimensions.clear();
                for (const std::string& d : detail::split_list(value))
                    config.dimensions.push_back(static_cast<std::size_t>(parse_u64(d, key)));
            } else if (key == "algorithms") algorithm_tokens = detail::split_list(detail::to_lower(value));
            else if (key == "baseline") config.baseline = detail::to_lower(value);
            else if (key == "runs") config.runs = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "base_seed") config.base_seed = parse_u64(value, key);
            else if (key == "budget_multiplier") config.budget_multiplier = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "budget") config.budget_absolute = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "k") config.k = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "initial_multiplier") config.initial_multiplier = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "initial") config.initial_absolute = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "f") default_de.scale_factor = parse_real(value, key);
            else if (key == "cr") default_de.crossover_rate = parse_real(value, key);
            else if (key == "sigma_divisor") default_sigma_divisor = parse_real(value, key);
            else if (key == "de_population") default_population = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "clip_mode") config.clip_mode = detail::parse_clip_mode(value);
            else if (key == "parallelism") config.parallelism = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "output_dir") config.output_dir = value;
            else if (key == "cvt_seed") config.cvt_seed = parse_u64(value, key);
            else if (key == "cvt_cache") config.cvt_cache_dir = value;
            else if (key == "transform_seed") config.transform_seed = parse_u64(value, key);
            else if (key == "record_points") config.record_points = static_cast<std::size_t>(parse_u64(value, key));
            else if (key == "alpha") config.alpha = parse_real(value, key);
            else if (key == "dump_archives") config.dump_archives = detail::to_lower(value);
            else if (key == "heatmaps") config.heatmaps = parse_bool(value, key);
            else throw std::invalid_argument("config: unknown key '" + key + "' in [experiment]");
        }
    }

    for (const std::string& token : algorithm_tokens) {
        AlgorithmSpec spec;
        spec.name = token;
        spec.de = default_de;
        spec.sigma_divisor = default_sigma_divisor;
        spec.de_population = default_population;
        const auto section = sections.find("algorithm:" + token);
        bool type_known = true;
        try {
            spec.type = detail::parse_algorithm_type(token);
        } catch (const std::invalid_argument&) {
            type_known = false;
        }
        if (section != sections.end()) {
            for (const auto& [key, value] : section->second) {
                if (key == "type") {
                    spec.type = detail::parse_algorithm_type(value);
                    type_known = true;
                } else if (key == "f") spec.de.scale_factor = parse_real(value, key);
                else if (key == "cr") spec.de.crossover_rate = parse_real(value, key);
                else if (key == "sigma_divisor") spec.sigma_divisor = parse_real(value, key);
                else if (key == "population") spec.de_population = static_cast<std::size_t>(parse_u64(value, key));
                else throw std::invalid_argument("config: unknown key '" + key + "' in [algorithm:" + token + "]");
            }
        }
        if (!type_known)
            throw std::invalid_argument("config: algorithm '" + token +
                                        "' needs a [algorithm:" + token + "] section with a type");
        config.algorithms.push_back(std::move(spec));
    }

    if (config.baseline.empty()) config.baseline = config.algorithms.front().name;
    config.validate();
    return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return parse_experiment_config(in);
}

struct CellResult {
    std::string function;
    std::size_t dimension = 0;
    std::string algorithm;
    bool is_baseline = false;
    bool coverage_na = false;  // unbounded problems report no coverage
    bool has_verdict = false;
    RunSetSummary summary;
    ComparisonVerdict fev_verdict;
    ComparisonVerdict coverage_verdict;
};

struct AlgorithmTally {
    std::string algorithm;
    int fev_plus = 0, fev_equal = 0, fev_minus = 0;
    int cov_plus = 0, cov_equal = 0, cov_minus = 0;
};

struct RunFailure {
    std::string function;
    std::size_t dimension = 0;
    std::string algorithm;
    std::uint64_t seed = 0;
    std::string message;
};

struct ExperimentReport {
    std::size_t total_runs = 0;
    std::size_t completed_runs = 0;
    std::vector<CellResult> cells;
    std::vector<AlgorithmTally> tallies;
    std::vector<RunFailure> failures;
    std::filesystem::path output_dir;
};

namespace detail {

inline std::string run_stem(const std::string& fn, std::size_t n, const std::string& alg,
                            std::uint64_t seed) {
    return fn + "_n" + std::to_string(n) + "_" + alg + "_seed" + std::to_string(seed);
}

inline void write_run_csv(const std::filesystem::path& path, const RunRecord& record) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "evaluations,best_fev,coverage\n";
    for (const Snapshot& s : record.history)
        out << s.evaluations << ',' << fmt17(s.best_fev) << ',' << fmt17(s.coverage) << '\n';
}

inline std::string percent_label(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
    return buf;
}

inline std::string sci_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

inline std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace detail

// Loads the cached centroid file for (k, N=2, cvt_seed), building and
// saving it on a cache miss.
inline CentroidIndex load_or_build_cvt(std::size_t k, std::uint64_t cvt_seed,
                                       const std::filesystem::path& cache_dir) {
    std::filesystem::create_directories(cache_dir);
    const std::filesystem::path path =
        cache_dir / ("cvt_k" + std::to_string(k) + "_n2_seed" + std::to_string(cvt_seed) + ".txt");
    if (std::filesystem::exists(path)) {
        CentroidIndex index = load_centroids(path.string());
        if (index.k() != k || index.dimension() != 2)
            throw std::runtime_error("cached centroid file " + path.string() +
                                     " does not match its name");
        return index;
    }
    CentroidIndex index = cvt_approximation(k, 2, cvt_seed);
    save_centroids(path.string(), index);
    return index;
}

// Executes the full (functions x dimensions x algorithms x seeds) grid
// with run-level parallelism and writes every result file. Data files are
// a pure function of the config; wall-clock times go to timing.log only.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    config.validate();

    const fs::path out_dir = config.output_dir;
    fs::create_directories(out_dir / "runs");
    if (config.dump_archives != "none") fs::create_directories(out_dir / "archives");
    if (config.heatmaps) fs::create_directories(out_dir / "heatmaps");
    const fs::path cache_dir =
        config.cvt_cache_dir.empty() ? out_dir / "cvt" : fs::path(config.cvt_cache_dir);

    struct ProblemEntry {
        std::string function;
        std::size_t dimension;
        ProblemDefinition problem;
    };
    std::vector<ProblemEntry> problems;
    for (const std::string& fn : config.functions) {
        for (const std::size_t n : config.dimensions) {
            ProblemOptions options;
            options.clip_mode = config.clip_mode;
            options.transform_seed = config.transform_seed;
            problems.push_back({fn, n, make_problem(fn, n, options)});
        }
    }

    const CentroidIndex index = load_or_build_cvt(config.k, config.cvt_seed, cache_dir);

    struct Task {
        std::size_t problem_idx;
        std::size_t alg_idx;
        std::size_t run_idx;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < problems.size(); ++p)
        for (std::size_t a = 0; a < config.algorithms.size(); ++a)
            for (std::size_t r = 0; r < config.runs; ++r) tasks.push_back({p, a, r});

    std::vector<std::optional<RunRecord>> results(tasks.size());
    std::vector<std::string> task_errors(tasks.size());

    auto execute = [&](const Task& task) -> RunRecord {
        const ProblemEntry& entry = problems[task.problem_idx];
        const AlgorithmSpec& spec = config.algorithms[task.alg_idx];
        const std::uint64_t seed = config.base_seed + task.run_idx;
        const std::size_t budget = config.budget_for(entry.dimension);
        const std::size_t interval = std::max<std::size_t>(1, budget / config.record_points);
        if (spec.type == AlgorithmType::de)
            return run_canonical_de(entry.problem, spec.de_population, spec.de, budget, seed,
                                    interval);
        AlgorithmConfig ac;
        ac.k = config.k;
        ac.initial_solutions = config.initial_for(entry.dimension);
        ac.max_evaluations = budget;
        ac.de = spec.de;
        ac.seed = seed;
        ac.record_interval = interval;
        if (spec.type == AlgorithmType::dme)
            return run_differential_map_elites(entry.problem, ac, index);
        for (std::size_t j = 0; j < entry.dimension; ++j)
            ac.sigma.push_back((entry.problem.init_box.upper[j] - entry.problem.init_box.lower[j]) /
                               spec.sigma_divisor);
        return run_cvt_map_elites(entry.problem, ac, index);
    };

    {
        std::atomic<std::size_t> next{0};
        const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
        const std::size_t degree =
            std::min(tasks.size(), config.parallelism == 0 ? hw : config.parallelism);
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    results[i] = execute(tasks[i]);
                } catch (const std::exception& e) {
                    task_errors[i] = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(degree);
        for (std::size_t t = 0; t < degree; ++t) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    ExperimentReport report;
    report.total_runs = tasks.size();
    report.output_dir = out_dir;

    // Everything below runs after the join, single-threaded, in a fixed
    // order, so outputs cannot depend on scheduling.
    std::ofstream timing(out_dir / "timing.log");
    double total_seconds = 0.0;

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Task& task = tasks[i];
        const ProblemEntry& entry = problems[task.problem_idx];
        const AlgorithmSpec& spec = config.algorithms[task.alg_idx];
        const std::uint64_t seed = config.base_seed + task.run_idx;
        const std::string stem = detail::run_stem(entry.function, entry.dimension, spec.name, seed);
        if (!results[i]) {
            report.failures.push_back(
                {entry.function, entry.dimension, spec.name, seed, task_errors[i]});
            continue;
        }
        ++report.completed_runs;
        const RunRecord& record = *results[i];
        detail::write_run_csv(out_dir / "runs" / (stem + ".csv"), record);
        timing << stem << ": " << record.wall_time_seconds << " s\n";
        total_seconds += record.wall_time_seconds;

        if (record.final_archive) {
            const bool dump = config.dump_archives == "all" ||
                              (config.dump_archives == "first" && task.run_idx == 0);
            if (dump)
                save_archive_csv((out_dir / "archives" / (stem + ".csv")).string(),
                                 *record.final_archive);
            if (config.heatmaps && task.run_idx == 0) {
                HeatmapOptions options;
                options.title = entry.function + " n=" + std::to_string(entry.dimension) + " " +
                                spec.name + " seed=" + std::to_string(seed);
                options.negate_fitness_labels = true;
                emit_heatmap(*record.final_archive, (out_dir / "heatmaps" / (stem + ".svg")).string(),
                             options);
            }
        }
    }
    timing << "total: " << total_seconds << " s\n";

    // Aggregate per cell, compare against the baseline, emit tables.
    std::map<std::string, AlgorithmTally> tally_by_alg;
    for (const AlgorithmSpec& spec : config.algorithms)
        if (spec.name != config.baseline) tally_by_alg[spec.name].algorithm = spec.name;

    // Archives were dumped above; drop them so aggregation copies stay small.
    for (auto& result : results)
        if (result) result->final_archive.reset();

    for (std::size_t p = 0; p < problems.size(); ++p) {
        const ProblemEntry& entry = problems[p];
        std::vector<std::size_t> cell_indices;

        for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
            std::vector<RunRecord> records;
            for (std::size_t i = 0; i < tasks.size(); ++i)
                if (tasks[i].problem_idx == p && tasks[i].alg_idx == a && results[i])
                    records.push_back(*results[i]);
            if (records.empty()) continue;

            CellResult cell;
            cell.function = entry.function;
            cell.dimension = entry.dimension;
            cell.algorithm = config.algorithms[a].name;
            cell.is_baseline = cell.algorithm == config.baseline;
            cell.coverage_na = !entry.problem.bounds.bounded;
            cell.summary = summarize_runs(records);
            report.cells.push_back(std::move(cell));
            cell_indices.push_back(report.cells.size() - 1);
        }

        const RunSetSummary* baseline_summary = nullptr;
        for (const std::size_t idx : cell_indices)
            if (report.cells[idx].is_baseline) baseline_summary = &report.cells[idx].summary;

        for (const std::size_t idx : cell_indices) {
            CellResult& cell = report.cells[idx];
            if (cell.is_baseline || !baseline_summary) continue;
            cell.has_verdict = true;
            cell.fev_verdict = wilcoxon_rank_sum(cell.summary.final_fevs,
                                                 baseline_summary->final_fevs, config.alpha,
                                                 /*larger_is_better=*/false);
            AlgorithmTally& tally = tally_by_alg[cell.algorithm];
            if (cell.fev_verdict.symbol == VerdictSymbol::plus) ++tally.fev_plus;
            else if (cell.fev_verdict.symbol == VerdictSymbol::minus) ++tally.fev_minus;
            else ++tally.fev_equal;
            if (!cell.coverage_na) {
                cell.coverage_verdict =
                    wilcoxon_rank_sum(cell.summary.final_coverages,
                                      baseline_summary->final_coverages, config.alpha,
                                      /*larger_is_better=*/true);
                if (cell.coverage_verdict.symbol == VerdictSymbol::plus) ++tally.cov_plus;
                else if (cell.coverage_verdict.symbol == VerdictSymbol::minus) ++tally.cov_minus;
                else ++tally.cov_equal;
            }
        }

        if (!cell_indices.empty()) {
            std::vector<std::pair<std::string, RunSetSummary>> cell_summaries;
            for (const std::size_t idx : cell_indices)
                cell_summaries.emplace_back(report.cells[idx].algorithm, report.cells[idx].summary);
            emit_convergence_csv(cell_summaries,
                                 (out_dir / ("convergence_" + entry.function + "_n" +
                                             std::to_string(entry.dimension) + ".csv"))
                                     .string());
        }
    }
    for (const AlgorithmSpec& spec : config.algorithms) {
        const auto it = tally_by_alg.find(spec.name);
        if (it != tally_by_alg.end()) report.tallies.push_back(it->second);
    }

    {
        std::ofstream summary(out_dir / "summary.csv");
        summary << "function,n,algorithm,runs,fev_mean,fev_std,fev_median,fev_q25,fev_q75,"
                   "coverage_mean,coverage_std,coverage_median,coverage_q25,coverage_q75,"
                   "fev_symbol,fev_p,coverage_symbol,coverage_p\n";
        for (const CellResult& cell : report.cells) {
            const RunSetSummary& s = cell.summary;
            summary << cell.function << ',' << cell.dimension << ',' << cell.algorithm << ','
                    << s.runs << ',' << fmt17(s.fev_mean) << ',' << fmt17(s.fev_std) << ','
                    << fmt17(s.fev_median) << ',' << fmt17(s.fev_q25) << ',' << fmt17(s.fev_q75);
            if (cell.coverage_na) {
                summary << ",NA,NA,NA,NA,NA";
            } else {
                summary << ',' << fmt17(s.coverage_mean) << ',' << fmt17(s.coverage_std) << ','
                        << fmt17(s.coverage_median) << ',' << fmt17(s.coverage_q25) << ','
                        << fmt17(s.coverage_q75);
            }
            if (cell.is_baseline) {
                summary << ",base,,base,";
            } else if (!cell.has_verdict) {
                summary << ",,,,";
            } else {
                summary << ',' << verdict_char(cell.fev_verdict.symbol) << ','
                        << fmt17(cell.fev_verdict.p_value);
                if (cell.coverage_na)
                    summary << ",NA,NA";
                else
                    summary << ',' << verdict_char(cell.coverage_verdict.symbol) << ','
                            << fmt17(cell.coverage_verdict.p_value);
            }
            summary << '\n';
        }
    }

    {
        std::ofstream table(out_dir / "table.txt");
        table << config.name << ": " << config.runs << " runs per cell, budget "
              << (config.budget_absolute != 0
                      ? std::to_string(config.budget_absolute) + " evaluations"
                      : std::to_string(config.budget_multiplier) + " x n evaluations")
              << ", k = " << config.k << ", baseline " << config.baseline << "\n\n";
        table << detail::pad("function", 10) << detail::pad("n", 5) << detail::pad("algorithm", 12)
              << detail::pad("fev mean (std)", 28) << detail::pad("fev median", 14)
              << detail::pad("coverage mean (std)", 24) << detail::pad("fev", 5)
              << detail::pad("cov", 5) << '\n';
        table << std::string(103, '-') << '\n';
        for (const CellResult& cell : report.cells) {
            const RunSetSummary& s = cell.summary;
            const std::string fev_stats =
                detail::sci_label(s.fev_mean) + " (" + detail::sci_label(s.fev_std) + ")";
            const std::string cov_stats =
                cell.coverage_na ? "NA"
                                 : detail::percent_label(s.coverage_mean) + " (" +
                                       detail::percent_label(s.coverage_std) + ")";
            std::string fev_sym = "base", cov_sym = "base";
            if (!cell.is_baseline) {
                fev_sym = cell.has_verdict ? std::string(1, verdict_char(cell.fev_verdict.symbol))
                                           : "?";
                cov_sym = cell.coverage_na
                              ? "NA"
                              : (cell.has_verdict
                                     ? std::string(1, verdict_char(cell.coverage_verdict.symbol))
                                     : "?");
            } else if (cell.coverage_na) {
                cov_sym = "NA";
            }
            table << detail::pad(cell.function, 10) << detail::pad(std::to_string(cell.dimension), 5)
                  << detail::pad(cell.algorithm, 12) << detail::pad(fev_stats, 28)
                  << detail::pad(detail::sci_label(s.fev_median), 14)
                  << detail::pad(cov_stats, 24) << detail::pad(fev_sym, 5)
                  << detail::pad(cov_sym, 5) << '\n';
        }
        table << '\n';
        for (const AlgorithmTally& t : report.tallies) {
            table << t.algorithm << " vs " << config.baseline << ": fev +" << t.fev_plus << "/="
                  << t.fev_equal << "/-" << t.fev_minus << ", coverage +" << t.cov_plus << "/="
                  << t.cov_equal << "/-" << t.cov_minus << '\n';
        }
    }

    {
        nlohmann::json j;
        j["name"] = config.name;
        j["baseline"] = config.baseline;
        j["runs_per_cell"] = config.runs;
        j["k"] = config.k;
        j["alpha"] = config.alpha;
        j["base_seed"] = config.base_seed;
        j["cvt_seed"] = config.cvt_seed;
        j["transform_seed"] = config.transform_seed;
        j["functions"] = config.functions;
        j["dimensions"] = config.dimensions;
        j["total_runs"] = report.total_runs;
        j["completed_runs"] = report.completed_runs;
        j["failed_runs"] = report.failures.size();
        j["cells"] = nlohmann::json::array();
        for (const CellResult& cell : report.cells) {
            nlohmann::json c;
            c["function"] = cell.function;
            c["n"] = cell.dimension;
            c["algorithm"] = cell.algorithm;
            c["baseline"] = cell.is_baseline;
            c["runs"] = cell.summary.runs;
            c["fev"] = {{"mean", cell.summary.fev_mean},
                        {"std", cell.summary.fev_std},
                        {"median", cell.summary.fev_median},
                        {"q25", cell.summary.fev_q25},
                        {"q75", cell.summary.fev_q75}};
            if (cell.coverage_na) {
                c["coverage"] = nullptr;
            } else {
                c["coverage"] = {{"mean", cell.summary.coverage_mean},
                                 {"std", cell.summary.coverage_std},
                                 {"median", cell.summary.coverage_median},
                                 {"q25", cell.summary.coverage_q25},
                                 {"q75", cell.summary.coverage_q75}};
            }
            if (!cell.is_baseline && cell.has_verdict) {
                c["fev_verdict"] = {{"symbol", std::string(1, verdict_char(cell.fev_verdict.symbol))},
                                    {"p", cell.fev_verdict.p_value}};
                if (!cell.coverage_na)
                    c["coverage_verdict"] = {
                        {"symbol", std::string(1, verdict_char(cell.coverage_verdict.symbol))},
                        {"p", cell.coverage_verdict.p_value}};
            }
            j["cells"].push_back(c);
        }
        j["tally"] = nlohmann::json::array();
        for (const AlgorithmTally& t : report.tallies)
            j["tally"].push_back({{"algorithm", t.algorithm},
                                  {"fev", {{"plus", t.fev_plus}, {"equal", t.fev_equal}, {"minus", t.fev_minus}}},
                                  {"coverage",
                                   {{"plus", t.cov_plus}, {"equal", t.cov_equal}, {"minus", t.cov_minus}}}});
        std::ofstream index_out(out_dir / "index.json");
        index_out << j.dump(2) << '\n';
    }

    if (!report.failures.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const RunFailure& f : report.failures)
            j.push_back({{"function", f.function},
                         {"n", f.dimension},
                         {"algorithm", f.algorithm},
                         {"seed", f.seed},
                         {"message", f.message}});
        std::ofstream errors_out(out_dir / "errors.json");
        errors_out << j.dump(2) << '\n';
    }

    return report;
}

}  // namespace dme

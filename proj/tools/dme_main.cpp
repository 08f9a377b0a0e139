// Command-line front end for the benchmark harness: config-driven
// experiment grids plus small utilities for single runs, heatmap
// re-rendering, rank-sum comparisons, and centroid precomputation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dme/algorithms.hpp"
#include "dme/archive.hpp"
#include "dme/benchmarks.hpp"
#include "dme/cvt.hpp"
#include "dme/experiment.hpp"
#include "dme/format.hpp"
#include "dme/report.hpp"
#include "dme/stats.hpp"

namespace {

std::vector<double> read_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = dme::detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        values.push_back(dme::parse_double(t));
    }
    if (values.empty()) throw std::runtime_error("no values in " + path);
    return values;
}

int command_run(const std::string& config_path, const std::string& output_override,
                std::optional<std::size_t> parallelism_override) {
    dme::ExperimentConfig config = dme::load_experiment_config(config_path);
    if (!output_override.empty()) config.output_dir = output_override;
    if (parallelism_override) config.parallelism = *parallelism_override;
    const dme::ExperimentReport report = dme::run_experiment(config);
    std::cout << "completed " << report.completed_runs << "/" << report.total_runs
              << " runs into " << report.output_dir.string() << "\n";
    for (const dme::AlgorithmTally& t : report.tallies)
        std::cout << t.algorithm << " vs " << config.baseline << ": fev +" << t.fev_plus << "/="
                  << t.fev_equal << "/-" << t.fev_minus << ", coverage +" << t.cov_plus << "/="
                  << t.cov_equal << "/-" << t.cov_minus << "\n";
    if (!report.failures.empty()) {
        std::cerr << report.failures.size() << " run(s) failed; see "
                  << (report.output_dir / "errors.json").string() << "\n";
        return 1;
    }
    return 0;
}

struct SingleOptions {
    std::string function = "f1";
    std::size_t n = 10;
    std::string algorithm = "dme";
    std::uint64_t seed = 1;
    std::size_t budget = 0;   // 0 resolves to 10,000 * n
    std::size_t initial = 0;  // 0 resolves to 100 * n
    std::size_t k = 1000;
    double F = 0.5, CR = 0.9;
    double sigma_divisor = 300.0;
    std::size_t population = 100;
    std::string clip_mode = "saturating";
    std::uint64_t cvt_seed = 7;
    std::uint64_t transform_seed = 2005;
    std::string cvt_file;
    std::string archive_out;
    std::string heatmap_out;
    std::size_t record_points = 100;
};

int command_single(const SingleOptions& opt) {
    dme::ProblemOptions problem_options;
    problem_options.clip_mode = dme::detail::parse_clip_mode(opt.clip_mode);
    problem_options.transform_seed = opt.transform_seed;
    const dme::ProblemDefinition problem = dme::make_problem(opt.function, opt.n, problem_options);

    const std::size_t budget = opt.budget != 0 ? opt.budget : 10000 * opt.n;
    const std::size_t interval = std::max<std::size_t>(1, budget / opt.record_points);
    dme::DEParameters de;
    de.scale_factor = opt.F;
    de.crossover_rate = opt.CR;

    dme::RunRecord record;
    const dme::AlgorithmType type = dme::detail::parse_algorithm_type(opt.algorithm);
    if (type == dme::AlgorithmType::de) {
        if (!opt.archive_out.empty() || !opt.heatmap_out.empty())
            throw std::runtime_error("canonical de keeps no archive to dump or render");
        record = dme::run_canonical_de(problem, opt.population, de, budget, opt.seed, interval);
    } else {
        std::optional<dme::CentroidIndex> index;
        if (!opt.cvt_file.empty()) {
            index.emplace(dme::load_centroids(opt.cvt_file));
            if (index->dimension() != 2)
                throw std::runtime_error("centroid file is not 2-dimensional");
        } else {
            index.emplace(dme::cvt_approximation(opt.k, 2, opt.cvt_seed));
        }
        dme::AlgorithmConfig config;
        config.k = index->k();
        config.initial_solutions = opt.initial != 0 ? opt.initial : 100 * opt.n;
        config.max_evaluations = budget;
        config.de = de;
        config.seed = opt.seed;
        config.record_interval = interval;
        if (type == dme::AlgorithmType::dme) {
            record = dme::run_differential_map_elites(problem, config, *index);
        } else {
            config.sigma = dme::default_sigma(problem.init_box);
            for (double& s : config.sigma) s *= 300.0 / opt.sigma_divisor;
            record = dme::run_cvt_map_elites(problem, config, *index);
        }
        if (!opt.archive_out.empty()) dme::save_archive_csv(opt.archive_out, *record.final_archive);
        if (!opt.heatmap_out.empty()) {
            dme::HeatmapOptions heat;
            heat.title = problem.name + " n=" + std::to_string(opt.n) + " " + opt.algorithm +
                         " seed=" + std::to_string(opt.seed);
            heat.negate_fitness_labels = true;
            dme::emit_heatmap(*record.final_archive, opt.heatmap_out, heat);
        }
    }

    std::printf("function   %s (n=%zu)\n", problem.name.c_str(), opt.n);
    std::printf("algorithm  %s, seed %llu, %zu evaluations\n", opt.algorithm.c_str(),
                static_cast<unsigned long long>(opt.seed), record.evaluations);
    std::printf("fev        %.10g\n", record.final_fev);
    if (type == dme::AlgorithmType::de)
        std::printf("coverage   n/a (no archive)\n");
    else if (!problem.bounds.bounded)
        std::printf("coverage   NA (unbounded search space)\n");
    else
        std::printf("coverage   %.4f\n", record.final_coverage);
    return 0;
}

int command_heatmap(const std::string& archive_path, const std::string& centroid_path,
                    const std::string& out_path, const std::string& title, std::size_t raster,
                    bool raw_labels) {
    const dme::CentroidIndex index = dme::load_centroids(centroid_path);
    const dme::EliteArchive archive = dme::load_archive_csv(archive_path, index);
    dme::HeatmapOptions options;
    options.title = title;
    options.raster = raster;
    options.negate_fitness_labels = !raw_labels;
    dme::emit_heatmap(archive, out_path, options);
    std::cout << "wrote " << out_path << " (" << archive.filled_count() << "/" << archive.k()
              << " cells filled)\n";
    return 0;
}

int command_compare(const std::string& path_a, const std::string& path_b, double alpha,
                    bool larger_is_better) {
    const std::vector<double> a = read_values(path_a);
    const std::vector<double> b = read_values(path_b);
    const dme::ComparisonVerdict verdict = dme::wilcoxon_rank_sum(a, b, alpha, larger_is_better);
    std::printf("n_a=%zu n_b=%zu rank_sum_a=%.1f\n", a.size(), b.size(), verdict.statistic);
    std::printf("p=%.10g alpha=%g\n", verdict.p_value, alpha);
    std::printf("verdict: A %c B (%s is better)\n", dme::verdict_char(verdict.symbol),
                larger_is_better ? "larger" : "smaller");
    return 0;
}

int command_cvt(std::size_t k, std::size_t dim, std::size_t samples, std::size_t iterations,
                std::uint64_t seed, const std::string& out_path) {
    if (samples == 0) samples = dme::default_cvt_samples(k);
    const dme::CentroidIndex index = dme::cvt_approximation(k, dim, samples, iterations, seed);
    dme::save_centroids(out_path, index);
    std::cout << "wrote " << out_path << " (k=" << k << ", N=" << dim << ", seed=" << seed
              << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differential MAP-Elites benchmark harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Execute the full experiment grid from a config file");
    std::string config_path, output_override;
    std::size_t parallelism = 0;
    bool parallelism_set = false;
    run->add_option("--config,-c", config_path, "experiment config file")->required();
    run->add_option("--output-dir,-o", output_override, "override the config's output_dir");
    run->add_option("--parallelism,-j", parallelism, "override the config's parallelism degree")
        ->each([&](const std::string&) { parallelism_set = true; });

    auto* single = app.add_subcommand("single", "One seeded run; prints FEV and coverage");
    SingleOptions opt;
    single->add_option("--function,-f", opt.function, "benchmark id, e.g. f1")->required();
    single->add_option("--n,-n", opt.n, "search-space dimension")->required();
    single->add_option("--algorithm,-a", opt.algorithm, "dme, cvt_me, or de");
    single->add_option("--seed,-s", opt.seed, "run seed");
    single->add_option("--budget", opt.budget, "evaluation budget (default 10000*n)");
    single->add_option("--initial", opt.initial, "initial random solutions (default 100*n)");
    single->add_option("--k", opt.k, "centroid count");
    single->add_option("--F", opt.F, "DE scale factor");
    single->add_option("--CR", opt.CR, "DE crossover rate");
    single->add_option("--sigma-divisor", opt.sigma_divisor, "baseline sigma = box width / divisor");
    single->add_option("--population", opt.population, "canonical DE population");
    single->add_option("--clip-mode", opt.clip_mode, "saturating or literal");
    single->add_option("--cvt-seed", opt.cvt_seed, "seed for CVT construction");
    single->add_option("--transform-seed", opt.transform_seed, "seed for shift/rotation generation");
    single->add_option("--cvt-file", opt.cvt_file, "load centroids from file instead of building");
    single->add_option("--archive-out", opt.archive_out, "dump the final archive CSV here");
    single->add_option("--heatmap-out", opt.heatmap_out, "render the final archive SVG here");
    single->add_option("--record-points", opt.record_points, "snapshots per run");

    auto* heatmap = app.add_subcommand("heatmap", "Re-render an SVG from a dumped archive CSV");
    std::string archive_path, centroid_path, heatmap_out, heatmap_title;
    std::size_t raster = 240;
    bool raw_labels = false;
    heatmap->add_option("--archive", archive_path, "archive CSV dump")->required();
    heatmap->add_option("--centroids", centroid_path, "centroid file the archive was built on")
        ->required();
    heatmap->add_option("--out", heatmap_out, "output SVG path")->required();
    heatmap->add_option("--title", heatmap_title, "plot title");
    heatmap->add_option("--raster", raster, "assignment grid resolution");
    heatmap->add_flag("--raw-labels", raw_labels,
                      "label the legend with stored (maximization) fitness");

    auto* compare = app.add_subcommand("compare", "Wilcoxon rank-sum test between two value files");
    std::string file_a, file_b;
    double alpha = 0.05;
    bool larger_is_better = false;
    compare->add_option("--a", file_a, "first sample, one value per line")->required();
    compare->add_option("--b", file_b, "second sample, one value per line")->required();
    compare->add_option("--alpha", alpha, "significance level");
    compare->add_flag("--larger-is-better", larger_is_better,
                      "treat larger values as better (coverage orientation)");

    auto* cvt = app.add_subcommand("cvt", "Precompute a centroid file");
    std::size_t cvt_k = 1000, cvt_dim = 2, cvt_samples = 0, cvt_iterations = 100;
    std::uint64_t cvt_seed = 7;
    std::string cvt_out;
    cvt->add_option("--k", cvt_k, "centroid count")->required();
    cvt->add_option("--dim", cvt_dim, "behavior dimension");
    cvt->add_option("--samples", cvt_samples, "Lloyd sample count (default max(100k, 100000))");
    cvt->add_option("--iterations", cvt_iterations, "Lloyd iteration cap");
    cvt->add_option("--seed", cvt_seed, "sampling seed");
    cvt->add_option("--out", cvt_out, "output centroid file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return command_run(config_path, output_override,
                               parallelism_set ? std::optional<std::size_t>(parallelism)
                                               : std::nullopt);
        if (*single) return command_single(opt);
        if (*heatmap)
            return command_heatmap(archive_path, centroid_path, heatmap_out, heatmap_title, raster,
                                   raw_labels);
        if (*compare) return command_compare(file_a, file_b, alpha, larger_is_better);
        if (*cvt) return command_cvt(cvt_k, cvt_dim, cvt_samples, cvt_iterations, cvt_seed, cvt_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

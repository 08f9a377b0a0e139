#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "archive.hpp"
#include "benchmarks.hpp"
#include "cvt.hpp"
#include "rng.hpp"
#include "types.hpp"
#include "variation.hpp"

namespace dme {

struct AlgorithmConfig {
    std::size_t k = 1000;               // centroid count
    std::size_t initial_solutions = 0;  // G; 0 resolves to 100 * n
    std::size_t max_evaluations = 0;    // total budget, initialization included
    DEParameters de;
    std::vector<double> sigma;       // baseline step; empty resolves to box/300
    std::uint64_t seed = 1;
    std::size_t record_interval = 0;  // 0 resolves to budget/100
    std::uint64_t cvt_seed = 7;       // only used when the run builds its own CVT

    AlgorithmConfig resolved(std::size_t n) const {
        AlgorithmConfig c = *this;
        if (c.initial_solutions == 0) c.initial_solutions = 100 * n;
        if (c.record_interval == 0)
            c.record_interval = std::max<std::size_t>(1, c.max_evaluations / 100);
        return c;
    }

    void validate() const {
        de.validate();
        if (k == 0) throw std::invalid_argument("AlgorithmConfig: k must be positive");
        if (initial_solutions < 4)
            throw std::invalid_argument("AlgorithmConfig: need at least 4 initial solutions");
        if (max_evaluations < initial_solutions)
            throw std::invalid_argument("AlgorithmConfig: budget smaller than initialization");
    }
};

struct Snapshot {
    std::size_t evaluations = 0;
    double best_fev = 0.0;
    double coverage = 0.0;
};

struct RunRecord {
    std::vector<Snapshot> history;
    std::optional<EliteArchive> final_archive;  // absent for canonical DE
    // The archive references its centroid index; when the run built a
    // private one, it lives here so final_archive stays usable.
    std::shared_ptr<const CentroidIndex> owned_index;
    double wall_time_seconds = 0.0;  // never written into data files
    std::uint64_t seed = 0;
    std::size_t evaluations = 0;
    double final_fev = std::numeric_limits<double>::infinity();
    double final_coverage = 0.0;
    EvalDiagnostics diagnostics;
};

namespace detail {

// Shared bookkeeping for one run: best-so-far tracking plus the snapshot
// schedule (every record_interval evaluations and at the final one).
class RunTracker {
public:
    RunTracker(const ProblemDefinition& problem, std::size_t budget, std::size_t interval)
        : optimum_(problem.optimum_value), budget_(budget), interval_(interval) {}

    void note(double objective, double coverage) {
        ++evaluations_;
        best_objective_ = std::min(best_objective_, objective);
        if (evaluations_ % interval_ == 0 || evaluations_ == budget_)
            if (history_.empty() || history_.back().evaluations != evaluations_)
                history_.push_back({evaluations_, best_fev(), coverage});
    }

    double best_fev() const { return best_objective_ - optimum_; }
    std::size_t evaluations() const { return evaluations_; }
    std::vector<Snapshot>&& take_history() { return std::move(history_); }

private:
    double optimum_;
    std::size_t budget_;
    std::size_t interval_;
    std::size_t evaluations_ = 0;
    double best_objective_ = std::numeric_limits<double>::infinity();
    std::vector<Snapshot> history_;
};

inline RunRecord finish_record(RunTracker& tracker, std::uint64_t seed,
                               std::optional<EliteArchive> archive, EvalDiagnostics diag,
                               std::chrono::steady_clock::time_point started) {
    RunRecord record;
    record.history = tracker.take_history();
    record.seed = seed;
    record.evaluations = tracker.evaluations();
    record.final_fev = tracker.best_fev();
    record.final_coverage = archive ? archive->coverage() : 0.0;
    record.final_archive = std::move(archive);
    record.diagnostics = diag;
    record.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

}  // namespace detail

// Differential MAP-Elites against a prebuilt (shareable) CVT. One
// objective evaluation per iteration: G random solutions seed the archive,
// then each step samples a target and three donors from four distinct
// cells, builds the trial via DE mutation plus binomial crossover, and
// offers it to the archive. With fewer than four filled cells the step
// falls back to a fresh random solution so budget accounting stays exact.
inline RunRecord run_differential_map_elites(const ProblemDefinition& problem,
                                             const AlgorithmConfig& raw_config,
                                             const CentroidIndex& index) {
    const auto started = std::chrono::steady_clock::now();
    const AlgorithmConfig config = raw_config.resolved(problem.dimension);
    config.validate();
    if (index.k() != config.k)
        throw std::invalid_argument("run_differential_map_elites: index k mismatch");

    Rng rng(config.seed);
    EliteArchive archive(index);
    EvalDiagnostics diag;
    detail::RunTracker tracker(problem, config.max_evaluations, config.record_interval);

    auto offer = [&](const SolutionVector& x) {
        const double f = problem.evaluate(x, rng, &diag);
        archive.add(x, -f, problem.behavior(x));
        tracker.note(f, archive.coverage());
    };

    for (std::size_t g = 0; g < config.initial_solutions; ++g)
        offer(random_solution(problem.init_box, rng));

    while (tracker.evaluations() < config.max_evaluations) {
        if (archive.filled_count() >= 4) {
            const auto picks = sample_distinct_elites(archive, 4, rng);
            const SolutionVector& target = *picks[0].solution;
            const SolutionVector mutant = de_rand_1(*picks[1].solution, *picks[2].solution,
                                                    *picks[3].solution, config.de.scale_factor);
            offer(binomial_crossover(target, mutant, config.de.crossover_rate, rng));
        } else {
            offer(random_solution(problem.init_box, rng));
        }
    }
    return detail::finish_record(tracker, config.seed, std::move(archive), diag, started);
}

// CVT-MAP-Elites baseline: same skeleton, but reproduction picks a single
// elite and perturbs it with per-coordinate Gaussian noise.
inline RunRecord run_cvt_map_elites(const ProblemDefinition& problem,
                                    const AlgorithmConfig& raw_config,
                                    const CentroidIndex& index) {
    const auto started = std::chrono::steady_clock::now();
    const AlgorithmConfig config = raw_config.resolved(problem.dimension);
    config.validate();
    if (index.k() != config.k)
        throw std::invalid_argument("run_cvt_map_elites: index k mismatch");
    const std::vector<double> sigma =
        config.sigma.empty() ? default_sigma(problem.init_box) : config.sigma;
    if (sigma.size() != problem.dimension)
        throw std::invalid_argument("run_cvt_map_elites: sigma dimension mismatch");

    Rng rng(config.seed);
    EliteArchive archive(index);
    EvalDiagnostics diag;
    detail::RunTracker tracker(problem, config.max_evaluations, config.record_interval);

    auto offer = [&](const SolutionVector& x) {
        const double f = problem.evaluate(x, rng, &diag);
        archive.add(x, -f, problem.behavior(x));
        tracker.note(f, archive.coverage());
    };

    for (std::size_t g = 0; g < config.initial_solutions; ++g)
        offer(random_solution(problem.init_box, rng));

    while (tracker.evaluations() < config.max_evaluations) {
        if (archive.filled_count() >= 1) {
            const auto picks = sample_distinct_elites(archive, 1, rng);
            offer(gaussian_mutation(*picks[0].solution, sigma, rng));
        } else {
            offer(random_solution(problem.init_box, rng));
        }
    }
    return detail::finish_record(tracker, config.seed, std::move(archive), diag, started);
}

// Convenience overloads that build a private CVT from the config.
inline RunRecord run_differential_map_elites(const ProblemDefinition& problem,
                                             const AlgorithmConfig& config) {
    auto index =
        std::make_shared<const CentroidIndex>(cvt_approximation(config.k, 2, config.cvt_seed));
    RunRecord record = run_differential_map_elites(problem, config, *index);
    record.owned_index = std::move(index);
    return record;
}

inline RunRecord run_cvt_map_elites(const ProblemDefinition& problem,
                                    const AlgorithmConfig& config) {
    auto index =
        std::make_shared<const CentroidIndex>(cvt_approximation(config.k, 2, config.cvt_seed));
    RunRecord record = run_cvt_map_elites(problem, config, *index);
    record.owned_index = std::move(index);
    return record;
}

// Canonical DE/rand/1/bin. Generational: donors come from the previous
// generation, and the trial replaces its slot when its objective is no
// worse. Coverage stays zero; there is no archive.
inline RunRecord run_canonical_de(const ProblemDefinition& problem, std::size_t population,
                                  const DEParameters& de, std::size_t budget, std::uint64_t seed,
                                  std::size_t record_interval = 0,
                                  std::function<void(const std::vector<double>&)> on_generation = {}) {
    const auto started = std::chrono::steady_clock::now();
    de.validate();
    if (population < 4)
        throw std::invalid_argument("run_canonical_de: population must be at least 4");
    if (budget < population)
        throw std::invalid_argument("run_canonical_de: budget smaller than the population");
    if (record_interval == 0) record_interval = std::max<std::size_t>(1, budget / 100);

    Rng rng(seed);
    EvalDiagnostics diag;
    detail::RunTracker tracker(problem, budget, record_interval);

    std::vector<SolutionVector> pop(population);
    std::vector<double> fit(population);
    for (std::size_t i = 0; i < population; ++i) {
        pop[i] = random_solution(problem.init_box, rng);
        fit[i] = problem.evaluate(pop[i], rng, &diag);
        tracker.note(fit[i], 0.0);
    }
    if (on_generation) on_generation(fit);

    auto draw_donors = [&](std::size_t i, std::size_t out[3]) {
        for (std::size_t d = 0; d < 3; ++d) {
            for (;;) {
                const auto r = static_cast<std::size_t>(rng.uniform_index(population));
                const bool clash = r == i || (d > 0 && r == out[0]) || (d > 1 && r == out[1]);
                if (!clash) {
                    out[d] = r;
                    break;
                }
            }
        }
    };

    while (tracker.evaluations() < budget) {
        const std::vector<SolutionVector> prev = pop;
        const std::vector<double> prev_fit = fit;
        for (std::size_t i = 0; i < population && tracker.evaluations() < budget; ++i) {
            std::size_t r[3];
            draw_donors(i, r);
            const SolutionVector mutant =
                de_rand_1(prev[r[0]], prev[r[1]], prev[r[2]], de.scale_factor);
            const SolutionVector trial =
                binomial_crossover(prev[i], mutant, de.crossover_rate, rng);
            const double f = problem.evaluate(trial, rng, &diag);
            tracker.note(f, 0.0);
            if (f <= prev_fit[i]) {
                pop[i] = trial;
                fit[i] = f;
            }
        }
        if (on_generation) on_generation(fit);
    }
    return detail::finish_record(tracker, seed, std::nullopt, diag, started);
}

}  // namespace dme

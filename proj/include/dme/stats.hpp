#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "algorithms.hpp"

namespace dme {

// Function error value: distance of the best objective from the optimum.
inline double fev(double best_value, double optimum_value) {
    if (!std::isfinite(best_value) || !std::isfinite(optimum_value))
        throw std::invalid_argument("fev: non-finite input");
    return best_value - optimum_value;
}

enum class VerdictSymbol { plus, equals, minus };

inline char verdict_char(VerdictSymbol s) {
    switch (s) {
        case VerdictSymbol::plus: return '+';
        case VerdictSymbol::minus: return '-';
        default: return '=';
    }
}

// Outcome of a two-sided rank-sum comparison. `plus` means sample A is
// significantly better than sample B at the given alpha (better = larger
// or smaller according to the caller's flag); `minus` the reverse.
struct ComparisonVerdict {
    VerdictSymbol symbol = VerdictSymbol::equals;
    double p_value = 1.0;
    double statistic = 0.0;  // rank sum of sample A, midranks for ties
};

namespace detail {

// Midranks of the pooled samples, doubled so ties stay integers. Returns
// the doubled rank sum of sample A, plus tie-group sizes for the variance
// correction.
struct PooledRanks {
    std::vector<long long> ranks2;  // doubled midrank per pooled element, sorted order
    std::vector<std::size_t> tie_groups;
    long long rank2_sum_a = 0;
};

inline PooledRanks pooled_midranks(const std::vector<double>& a, const std::vector<double>& b) {
    struct Entry {
        double value;
        bool from_a;
    };
    std::vector<Entry> pool;
    pool.reserve(a.size() + b.size());
    for (const double v : a) {
        if (!std::isfinite(v)) throw std::invalid_argument("wilcoxon_rank_sum: non-finite value");
        pool.push_back({v, true});
    }
    for (const double v : b) {
        if (!std::isfinite(v)) throw std::invalid_argument("wilcoxon_rank_sum: non-finite value");
        pool.push_back({v, false});
    }
    std::sort(pool.begin(), pool.end(),
              [](const Entry& x, const Entry& y) { return x.value < y.value; });

    PooledRanks out;
    out.ranks2.resize(pool.size());
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j < pool.size() && pool[j].value == pool[i].value) ++j;
        // 1-based ranks i+1 .. j share midrank (i+1+j)/2; doubled keeps it integral.
        const long long rank2 = static_cast<long long>(i + j + 1);
        for (std::size_t p = i; p < j; ++p) {
            out.ranks2[p] = rank2;
            if (pool[p].from_a) out.rank2_sum_a += rank2;
        }
        out.tie_groups.push_back(j - i);
        i = j;
    }
    return out;
}

// Exact two-sided p-value by dynamic programming over doubled ranks:
// counts size-m subsets per achievable rank sum, then sums the tail at
// least as extreme as the observed one. All counting is integral, so the
// result equals brute-force enumeration bit for bit.
inline double exact_rank_sum_p(const std::vector<long long>& ranks2, std::size_t m,
                               long long observed2) {
    const std::size_t n = ranks2.size();
    long long total2 = 0;
    for (const long long r : ranks2) total2 += r;
    const auto sum_cap = static_cast<std::size_t>(total2);
    std::vector<std::vector<std::uint64_t>> count(m + 1,
                                                  std::vector<std::uint64_t>(sum_cap + 1, 0));
    count[0][0] = 1;
    for (std::size_t idx = 0; idx < n; ++idx) {
        const auto r = static_cast<std::size_t>(ranks2[idx]);
        const std::size_t j_hi = std::min(m, idx + 1);
        for (std::size_t j = j_hi; j >= 1; --j)
            for (std::size_t s = sum_cap; s >= r; --s)
                count[j][s] += count[j - 1][s - r];
    }
    // Doubled mean of a size-m group is m*(n+1); |s - mean| >= |obs - mean|
    // defines the two-sided tail. Comparisons are done on 2*(s - mean) to
    // stay in integers.
    const long long mean_x2 = static_cast<long long>(m) * static_cast<long long>(n + 1);
    const long long dev = std::llabs(observed2 - mean_x2);
    std::uint64_t tail = 0, every = 0;
    for (std::size_t s = 0; s <= sum_cap; ++s) {
        const std::uint64_t c = count[m][s];
        if (c == 0) continue;
        every += c;
        if (std::llabs(static_cast<long long>(s) - mean_x2) >= dev) tail += c;
    }
    return static_cast<double>(tail) / static_cast<double>(every);
}

}  // namespace detail

// Two-sided Wilcoxon rank-sum test. Exact permutation distribution when
// the smaller sample has at most 8 values (and the DP stays small);
// otherwise the normal approximation with midrank tie correction and
// continuity correction. Direction: A is called better when its mean rank
// sits on the favorable side, where favorable = higher values if
// larger_is_better, else lower values.
inline ComparisonVerdict wilcoxon_rank_sum(const std::vector<double>& sample_a,
                                           const std::vector<double>& sample_b, double alpha,
                                           bool larger_is_better = false) {
    if (sample_a.empty() || sample_b.empty())
        throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("wilcoxon_rank_sum: alpha outside (0,1)");

    const std::size_t na = sample_a.size();
    const std::size_t nb = sample_b.size();
    const std::size_t n = na + nb;
    const detail::PooledRanks pooled = detail::pooled_midranks(sample_a, sample_b);

    ComparisonVerdict verdict;
    verdict.statistic = static_cast<double>(pooled.rank2_sum_a) / 2.0;

    const std::size_t smaller = std::min(na, nb);
    const auto dp_cells = static_cast<std::uint64_t>(smaller + 1) *
                          static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n + 1);
    if (smaller <= 8 && dp_cells <= 50'000'000ull) {
        // Run the DP on the smaller side; the complement bijection makes
        // the p-value identical either way.
        const long long total2 = static_cast<long long>(n) * static_cast<long long>(n + 1);
        const long long observed2 =
            na <= nb ? pooled.rank2_sum_a : total2 - pooled.rank2_sum_a;
        verdict.p_value = detail::exact_rank_sum_p(pooled.ranks2, smaller, observed2);
    } else {
        const double w = static_cast<double>(pooled.rank2_sum_a) / 2.0;
        const double mean = static_cast<double>(na) * static_cast<double>(n + 1) / 2.0;
        double tie_term = 0.0;
        for (const std::size_t t : pooled.tie_groups) {
            const auto td = static_cast<double>(t);
            tie_term += td * td * td - td;
        }
        const double variance = (static_cast<double>(na) * static_cast<double>(nb) / 12.0) *
                                (static_cast<double>(n + 1) -
                                 tie_term / (static_cast<double>(n) * static_cast<double>(n - 1)));
        if (variance <= 0.0) {
            verdict.p_value = 1.0;  // every pooled value tied
            verdict.symbol = VerdictSymbol::equals;
            return verdict;
        }
        const double shrunk = std::max(0.0, std::abs(w - mean) - 0.5);
        const double z = shrunk / std::sqrt(variance);
        verdict.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }

    if (verdict.p_value < alpha) {
        // Mean-rank comparison; significance rules out an exact split.
        const long long total2 = static_cast<long long>(n) * static_cast<long long>(n + 1);
        const double mean_rank_a = static_cast<double>(pooled.rank2_sum_a) / static_cast<double>(na);
        const double mean_rank_b =
            static_cast<double>(total2 - pooled.rank2_sum_a) / static_cast<double>(nb);
        const bool a_larger = mean_rank_a > mean_rank_b;
        const bool a_better = larger_is_better ? a_larger : !a_larger;
        verdict.symbol = a_better ? VerdictSymbol::plus : VerdictSymbol::minus;
    }
    return verdict;
}

inline double mean(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (const double v : values) s += v;
    return s / static_cast<double>(values.size());
}

// Population standard deviation (n divisor), so a single run reports 0.
inline double stddev_population(const std::vector<double>& values) {
    const double m = mean(values);
    double s2 = 0.0;
    for (const double v : values) s2 += (v - m) * (v - m);
    return std::sqrt(s2 / static_cast<double>(values.size()));
}

// Linear interpolation between order statistics: h = (n-1)*q.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile_sorted: q outside [0,1]");
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

struct SnapshotSummary {
    std::size_t evaluations = 0;
    double fev_median = 0.0;
    double fev_q25 = 0.0;
    double fev_q75 = 0.0;
    double coverage_median = 0.0;
};

struct RunSetSummary {
    std::size_t runs = 0;
    std::vector<double> final_fevs;       // in record order, for rank-sum tests
    std::vector<double> final_coverages;
    double fev_mean = 0.0, fev_std = 0.0, fev_median = 0.0, fev_q25 = 0.0, fev_q75 = 0.0;
    double coverage_mean = 0.0, coverage_std = 0.0, coverage_median = 0.0, coverage_q25 = 0.0,
           coverage_q75 = 0.0;
    std::vector<SnapshotSummary> convergence;
};

// Aggregates a batch of same-schedule runs into the numbers the tables
// and convergence plots consume.
inline RunSetSummary summarize_runs(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("summarize_runs: no records");
    const std::vector<Snapshot>& schedule = records.front().history;
    for (const RunRecord& r : records) {
        if (r.history.size() != schedule.size())
            throw std::invalid_argument("summarize_runs: snapshot schedules differ");
        for (std::size_t i = 0; i < schedule.size(); ++i)
            if (r.history[i].evaluations != schedule[i].evaluations)
                throw std::invalid_argument("summarize_runs: snapshot schedules differ");
    }

    RunSetSummary s;
    s.runs = records.size();
    for (const RunRecord& r : records) {
        s.final_fevs.push_back(r.final_fev);
        s.final_coverages.push_back(r.final_coverage);
    }
    s.fev_mean = mean(s.final_fevs);
    s.fev_std = stddev_population(s.final_fevs);
    s.fev_median = quantile(s.final_fevs, 0.5);
    s.fev_q25 = quantile(s.final_fevs, 0.25);
    s.fev_q75 = quantile(s.final_fevs, 0.75);
    s.coverage_mean = mean(s.final_coverages);
    s.coverage_std = stddev_population(s.final_coverages);
    s.coverage_median = quantile(s.final_coverages, 0.5);
    s.coverage_q25 = quantile(s.final_coverages, 0.25);
    s.coverage_q75 = quantile(s.final_coverages, 0.75);

    s.convergence.reserve(schedule.size());
    std::vector<double> fevs(records.size()), covs(records.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        for (std::size_t r = 0; r < records.size(); ++r) {
            fevs[r] = records[r].history[i].best_fev;
            covs[r] = records[r].history[i].coverage;
        }
        SnapshotSummary snap;
        snap.evaluations = schedule[i].evaluations;
        snap.fev_median = quantile(fevs, 0.5);
        snap.fev_q25 = quantile(fevs, 0.25);
        snap.fev_q75 = quantile(fevs, 0.75);
        snap.coverage_median = quantile(covs, 0.5);
        s.convergence.push_back(snap);
    }
    return s;
}

}  // namespace dme

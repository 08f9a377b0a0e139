#include <catch_amalgamated.hpp>

#include <dme/algorithms.hpp>
#include <dme/rng.hpp>
#include <dme/stats.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace {

// Brute-force two-sided rank-sum p-value: enumerate every way of assigning
// the pooled midranks to group A and count tails at least as extreme.
double enumerated_p(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t na = a.size(), n = na + b.size();

    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t lhs, std::size_t rhs) { return pooled[lhs] < pooled[rhs]; });

    // Doubled midranks stay integral under ties.
    std::vector<long long> rank2(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && pooled[order[j]] == pooled[order[i]]) ++j;
        const long long doubled = static_cast<long long>(i) + static_cast<long long>(j) + 1;
        for (std::size_t t = i; t < j; ++t) rank2[order[t]] = doubled;
        i = j;
    }

    long long observed = 0;
    for (std::size_t t = 0; t < na; ++t) observed += rank2[t];
    const long long center = static_cast<long long>(na) * static_cast<long long>(n + 1);
    const long long dev = std::llabs(observed - center);

    std::vector<long long> sorted2(rank2);
    std::sort(sorted2.begin(), sorted2.end());

    // Walk all C(n, na) subsets via a selection mask in lexicographic order.
    std::vector<int> mask(n, 0);
    std::fill(mask.begin(), mask.begin() + na, 1);
    std::sort(mask.begin(), mask.end());
    long long tail = 0, total = 0;
    do {
        long long s = 0;
        for (std::size_t t = 0; t < n; ++t)
            if (mask[t]) s += sorted2[t];
        ++total;
        if (std::llabs(s - center) >= dev) ++tail;
    } while (std::next_permutation(mask.begin(), mask.end()));

    return static_cast<double>(tail) / static_cast<double>(total);
}

dme::RunRecord record_with(double fev, double coverage,
                           const std::vector<std::size_t>& schedule) {
    dme::RunRecord r;
    for (std::size_t e : schedule) r.history.push_back({e, fev, coverage});
    r.final_fev = fev;
    r.final_coverage = coverage;
    r.evaluations = schedule.empty() ? 0 : schedule.back();
    return r;
}

} // namespace

TEST_CASE("fev is the plain error difference", "[stats]") {
    CHECK(dme::fev(2.5, 2.5) == 0.0);
    CHECK(dme::fev(12.5, 2.5) == 10.0);
    CHECK(dme::fev(-449.0, -450.0) == 1.0);
    CHECK_THROWS(dme::fev(std::nan(""), 0.0));
    CHECK_THROWS(dme::fev(0.0, std::numeric_limits<double>::infinity()));
}

TEST_CASE("identical samples compare as equal", "[stats]") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    auto verdict = dme::wilcoxon_rank_sum(v, v, 0.05);
    CHECK(verdict.symbol == dme::VerdictSymbol::equals);
    CHECK(verdict.p_value == 1.0);
}

TEST_CASE("separated samples are significant in the right direction", "[stats]") {
    std::vector<double> a(10), b(10);
    std::iota(a.begin(), a.end(), 1.0);   // 1..10
    std::iota(b.begin(), b.end(), 11.0);  // 11..20

    auto fev_view = dme::wilcoxon_rank_sum(a, b, 0.05);  // smaller is better
    CHECK(fev_view.p_value < 0.05);
    CHECK(fev_view.symbol == dme::VerdictSymbol::plus);

    auto coverage_view = dme::wilcoxon_rank_sum(a, b, 0.05, true);
    CHECK(coverage_view.symbol == dme::VerdictSymbol::minus);

    // Complete separation at n=10 per group: the normal path still lands
    // close to the exact tail 2/C(20,10).
    CHECK(fev_view.p_value < 1e-3);
    CHECK(fev_view.statistic == 55.0);
}

TEST_CASE("swapping samples mirrors the verdict exactly", "[stats]") {
    dme::Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a, b;
        const std::size_t na = 2 + rng.uniform_index(7);
        const std::size_t nb = 2 + rng.uniform_index(7);
        for (std::size_t i = 0; i < na; ++i) a.push_back(double(rng.uniform_index(6)));
        for (std::size_t i = 0; i < nb; ++i) b.push_back(double(rng.uniform_index(6)));

        auto ab = dme::wilcoxon_rank_sum(a, b, 0.05);
        auto ba = dme::wilcoxon_rank_sum(b, a, 0.05);
        CHECK(ab.p_value == ba.p_value);
        if (ab.symbol == dme::VerdictSymbol::equals)
            CHECK(ba.symbol == dme::VerdictSymbol::equals);
        if (ab.symbol == dme::VerdictSymbol::plus)
            CHECK(ba.symbol == dme::VerdictSymbol::minus);
        if (ab.symbol == dme::VerdictSymbol::minus)
            CHECK(ba.symbol == dme::VerdictSymbol::plus);
    }
}

TEST_CASE("exact p-values match exhaustive enumeration", "[stats]") {
    dme::Rng rng(34);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t na = 1 + rng.uniform_index(8);
        const std::size_t nb = 1 + rng.uniform_index(8);
        std::vector<double> a, b;
        // Small integer grid provokes plenty of ties.
        for (std::size_t i = 0; i < na; ++i) a.push_back(double(rng.uniform_index(5)));
        for (std::size_t i = 0; i < nb; ++i) b.push_back(double(rng.uniform_index(5)));

        auto verdict = dme::wilcoxon_rank_sum(a, b, 0.05);
        const double oracle = enumerated_p(a, b);
        INFO("na=" << na << " nb=" << nb);
        CHECK(verdict.p_value == oracle);
    }
}

TEST_CASE("verdicts survive monotone transformations", "[stats]") {
    dme::Rng rng(56);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 6; ++i) a.push_back(rng.uniform(-3.0, 3.0));
        for (int i = 0; i < 8; ++i) b.push_back(rng.uniform(-3.0, 3.0));
        auto plain = dme::wilcoxon_rank_sum(a, b, 0.05);

        std::vector<double> ea(a), eb(b);
        for (double& v : ea) v = std::exp(v);
        for (double& v : eb) v = std::exp(v);
        auto mapped = dme::wilcoxon_rank_sum(ea, eb, 0.05);

        CHECK(plain.p_value == mapped.p_value);
        CHECK(plain.symbol == mapped.symbol);
    }
}

TEST_CASE("degenerate ties collapse to no verdict", "[stats]") {
    std::vector<double> a{3.0, 3.0, 3.0}, b{3.0, 3.0, 3.0};
    auto small = dme::wilcoxon_rank_sum(a, b, 0.05);
    CHECK(small.p_value == 1.0);
    CHECK(small.symbol == dme::VerdictSymbol::equals);

    // Same degenerate pool through the normal-approximation branch.
    std::vector<double> big_a(12, 7.0), big_b(15, 7.0);
    auto big = dme::wilcoxon_rank_sum(big_a, big_b, 0.05);
    CHECK(big.p_value == 1.0);
    CHECK(big.symbol == dme::VerdictSymbol::equals);
}

TEST_CASE("wilcoxon validates its inputs", "[stats]") {
    std::vector<double> v{1.0, 2.0};
    CHECK_THROWS(dme::wilcoxon_rank_sum({}, v, 0.05));
    CHECK_THROWS(dme::wilcoxon_rank_sum(v, {}, 0.05));
    CHECK_THROWS(dme::wilcoxon_rank_sum(v, v, 0.0));
    CHECK_THROWS(dme::wilcoxon_rank_sum(v, v, 1.0));
}

TEST_CASE("p-values stay inside the unit interval", "[stats]") {
    dme::Rng rng(78);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a, b;
        const std::size_t na = 1 + rng.uniform_index(14);
        const std::size_t nb = 1 + rng.uniform_index(14);
        for (std::size_t i = 0; i < na; ++i) a.push_back(double(rng.uniform_index(4)));
        for (std::size_t i = 0; i < nb; ++i) b.push_back(double(rng.uniform_index(4)));
        auto verdict = dme::wilcoxon_rank_sum(a, b, 0.05);
        CHECK(verdict.p_value >= 0.0);
        CHECK(verdict.p_value <= 1.0);
    }
}

TEST_CASE("quantiles interpolate linearly", "[stats]") {
    std::vector<double> five{5.0, 1.0, 4.0, 2.0, 3.0};
    CHECK(dme::quantile(five, 0.5) == 3.0);
    CHECK(dme::quantile(five, 0.25) == 2.0);
    CHECK(dme::quantile(five, 0.75) == 4.0);

    std::vector<double> four{1.0, 2.0, 3.0, 4.0};
    CHECK(dme::quantile(four, 0.5) == 2.5);
    CHECK(dme::quantile(four, 0.25) == 1.75);
    CHECK(dme::quantile(four, 0.75) == 3.25);

    CHECK(dme::mean({2.0, 4.0}) == 3.0);
    CHECK(dme::stddev_population({2.0, 4.0}) == 1.0);
}

TEST_CASE("summaries aggregate final metrics", "[stats]") {
    std::vector<std::size_t> schedule{100, 200};

    std::vector<dme::RunRecord> single{record_with(3.5, 0.25, schedule)};
    auto s1 = dme::summarize_runs(single);
    CHECK(s1.runs == 1);
    CHECK(s1.fev_mean == 3.5);
    CHECK(s1.fev_median == 3.5);
    CHECK(s1.fev_std == 0.0);
    CHECK(s1.coverage_mean == 0.25);

    std::vector<dme::RunRecord> five;
    for (double v : {1.0, 2.0, 3.0, 4.0, 5.0}) five.push_back(record_with(v, v / 10.0, schedule));
    auto s5 = dme::summarize_runs(five);
    CHECK(s5.fev_median == 3.0);
    CHECK(s5.fev_q25 == 2.0);
    CHECK(s5.fev_q75 == 4.0);
    CHECK(s5.fev_mean == 3.0);
    REQUIRE(s5.convergence.size() == 2);
    CHECK(s5.convergence[0].evaluations == 100);
    CHECK(s5.convergence[0].fev_median == 3.0);
    CHECK(s5.convergence[1].coverage_median == 0.3);
}

TEST_CASE("summaries match direct formulas on synthetic gaussians", "[stats]") {
    dme::Rng rng(90);
    std::vector<std::size_t> schedule{50};
    std::vector<dme::RunRecord> records;
    std::vector<double> values;
    for (int i = 0; i < 30; ++i) {
        const double v = 10.0 + 2.0 * rng.normal();
        values.push_back(v);
        records.push_back(record_with(v, 0.5, schedule));
    }
    auto summary = dme::summarize_runs(records);

    const double m = std::accumulate(values.begin(), values.end(), 0.0) / 30.0;
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / 30.0);

    CHECK(summary.fev_mean == Catch::Approx(m).epsilon(1e-12));
    CHECK(summary.fev_std == Catch::Approx(sd).epsilon(1e-12));
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    CHECK(summary.fev_median == dme::quantile_sorted(sorted, 0.5));
}

TEST_CASE("summaries reject mismatched schedules and empty input", "[stats]") {
    CHECK_THROWS(dme::summarize_runs({}));
    std::vector<dme::RunRecord> bad{record_with(1.0, 0.1, {100, 200}),
                                    record_with(2.0, 0.2, {100, 300})};
    CHECK_THROWS(dme::summarize_runs(bad));
}

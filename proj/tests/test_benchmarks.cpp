#include <catch_amalgamated.hpp>

#include <dme/benchmarks.hpp>
#include <dme/rng.hpp>
#include <dme/stats.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("every shifted function hits its bias at the shift", "[benchmarks]") {
    for (const std::string& name : dme::supported_functions()) {
        for (std::size_t n : {std::size_t(2), std::size_t(10)}) {
            dme::ProblemDefinition p = dme::make_problem(name, n);
            dme::Rng rng(1);
            INFO(name << " n=" << n);
            CHECK(p.evaluate(p.transform.shift, rng) == p.f_bias);
            CHECK(p.optimum_value == p.f_bias);
            CHECK(dme::fev(p.evaluate(p.transform.shift, rng), p.optimum_value) == 0.0);
        }
    }
}

TEST_CASE("unshifted unrotated rastrigin is zero at the origin", "[benchmarks]") {
    dme::ProblemDefinition p;
    p.name = "plain_rastrigin";
    p.kind = dme::FunctionKind::rastrigin;
    p.dimension = 4;
    p.bounds = dme::uniform_bounds(4, -5.0, 5.0);
    p.init_box = p.bounds;
    p.transform.shift.assign(4, 0.0);

    dme::Rng rng(1);
    CHECK(p.evaluate({0, 0, 0, 0}, rng) == 0.0);
    CHECK(p.evaluate({1, 0, 0, 0}, rng) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("f6 matches a textbook rosenbrock oracle", "[benchmarks]") {
    const std::size_t n = 10;
    dme::ProblemDefinition p = dme::make_problem("f6", n);
    dme::Rng rng(55);

    for (int trial = 0; trial < 100; ++trial) {
        dme::SolutionVector x(n);
        for (std::size_t j = 0; j < n; ++j)
            x[j] = p.transform.shift[j] + rng.uniform(-2.0, 2.0);

        // Independent reference: w = x - o + 1 puts the optimum at w = 1.
        double ref = 0.0;
        std::vector<double> w(n);
        for (std::size_t j = 0; j < n; ++j) w[j] = x[j] - p.transform.shift[j] + 1.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double t = w[j] * w[j] - w[j + 1];
            ref += 100.0 * t * t + (w[j] - 1.0) * (w[j] - 1.0);
        }

        const double got = p.evaluate(x, rng) - p.f_bias;
        CHECK(std::abs(got - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("rotation is applied before the base function", "[benchmarks]") {
    // 90-degree rotation in 2-D: z' = (-z2, z1) under the row-vector convention.
    dme::ProblemDefinition p;
    p.name = "rotated_schwefel";
    p.kind = dme::FunctionKind::schwefel_1_2;
    p.dimension = 2;
    p.bounds = dme::uniform_bounds(2, -100.0, 100.0);
    p.init_box = p.bounds;
    p.transform.shift = {0.0, 0.0};
    p.transform.rotation = {0.0, 1.0, -1.0, 0.0};

    dme::Rng rng(1);
    const double a = 3.0, b = 5.0;
    const double expected = (-b) * (-b) + (-b + a) * (-b + a);
    CHECK(p.evaluate({a, b}, rng) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("generated rotations are orthogonal", "[benchmarks]") {
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
        for (std::size_t n : {std::size_t(2), std::size_t(10), std::size_t(30)}) {
            std::vector<double> m = dme::random_rotation(n, seed);
            CHECK(dme::orthogonality_error(m, n) <= 1e-9);
        }
    }
    dme::ProblemDefinition p = dme::make_problem("f10", 10);
    REQUIRE(!p.transform.rotation.empty());
    CHECK(dme::orthogonality_error(p.transform.rotation, 10) <= 1e-9);
}

TEST_CASE("behavior normalizes half sums", "[benchmarks]") {
    dme::ProblemDefinition p = dme::make_problem("f9", 4);  // bounds [-5,5]
    dme::BehaviorPoint b = p.behavior({1, 2, 3, 4});
    CHECK(b[0] == 0.65);
    CHECK(b[1] == 0.85);

    CHECK(p.behavior({-5, -5, -5, -5}) == dme::BehaviorPoint{0.0, 0.0});
    CHECK(p.behavior({5, 5, 5, 5}) == dme::BehaviorPoint{1.0, 1.0});
}

TEST_CASE("behavior splits odd dimensions as floor and remainder", "[benchmarks]") {
    dme::ProblemDefinition p = dme::make_problem("f9", 3);
    dme::BehaviorPoint b = p.behavior({5, -5, -5});
    CHECK(b[0] == 1.0);
    CHECK(b[1] == 0.0);

    dme::BehaviorPoint c = p.behavior({1, 2, 3});
    CHECK(c[0] == Catch::Approx(0.6).margin(1e-15));
    CHECK(c[1] == Catch::Approx(0.75).margin(1e-15));
}

TEST_CASE("clip modes differ on out-of-bounds genes", "[benchmarks]") {
    using dme::ClipMode;
    CHECK(dme::clip_gene(-200.0, -100.0, 100.0, ClipMode::saturating) == -100.0);
    CHECK(dme::clip_gene(250.0, -100.0, 100.0, ClipMode::saturating) == 100.0);
    CHECK(dme::clip_gene(7.0, -100.0, 100.0, ClipMode::saturating) == 7.0);

    // Literal reading: any out-of-bounds contribution is x_min/x, whichever
    // side the gene escaped from.
    CHECK(dme::clip_gene(-200.0, -100.0, 100.0, ClipMode::literal) == 0.5);
    CHECK(dme::clip_gene(200.0, -100.0, 100.0, ClipMode::literal) == -0.5);
    CHECK(dme::clip_gene(7.0, -100.0, 100.0, ClipMode::literal) == 7.0);

    // Saturating behavior can't see how far out a gene drifted; literal can.
    dme::ProblemDefinition sat = dme::make_problem("f1", 2);
    CHECK(sat.behavior({-150.0, 0.0}) == sat.behavior({-1e9, 0.0}));

    dme::ProblemOptions lit_opt;
    lit_opt.clip_mode = ClipMode::literal;
    dme::ProblemDefinition lit = dme::make_problem("f1", 2, lit_opt);
    CHECK(lit.behavior({-150.0, 0.0}) != lit.behavior({-1e9, 0.0}));

    // Literal contributions stay bounded by the box magnitudes.
    dme::Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-1e6, 1e6);
        const double c = dme::clip_gene(x, -100.0, 100.0, ClipMode::literal);
        CHECK(std::abs(c) <= 100.0);
    }
}

TEST_CASE("unbounded problems clip against the init box", "[benchmarks]") {
    dme::ProblemDefinition p = dme::make_problem("f7", 2);
    CHECK(p.bounds.bounded == false);
    CHECK(p.init_box.lower == std::vector<double>{0.0, 0.0});
    CHECK(p.init_box.upper == std::vector<double>{600.0, 600.0});
    CHECK(p.behavior({700.0, -5.0}) == dme::BehaviorPoint{1.0, 0.0});
}

TEST_CASE("f8 pins even shift components to the lower bound", "[benchmarks]") {
    dme::ProblemDefinition p = dme::make_problem("f8", 10);
    for (std::size_t j = 0; j < 10; j += 2)
        CHECK(p.transform.shift[j] == -32.0);
    for (std::size_t j = 1; j < 10; j += 2) {
        CHECK(p.transform.shift[j] > -32.0);
        CHECK(p.transform.shift[j] < 32.0);
    }
    dme::Rng rng(1);
    CHECK(p.evaluate(p.transform.shift, rng) == p.f_bias);
}

TEST_CASE("f4 multiplies noise on top of f2's base", "[benchmarks]") {
    dme::ProblemDefinition noisy = dme::make_problem("f4", 4);
    dme::ProblemDefinition quiet = noisy;
    quiet.transform.noisy = false;

    dme::Rng noise_rng(9), quiet_rng(9);
    dme::SolutionVector x{10.0, -20.0, 5.0, 40.0};
    const double base = quiet.evaluate(x, quiet_rng) - quiet.f_bias;
    REQUIRE(base > 0.0);

    double prev = -1.0;
    bool saw_distinct = false;
    for (int i = 0; i < 50; ++i) {
        const double v = noisy.evaluate(x, noise_rng) - noisy.f_bias;
        CHECK(v >= base - 1e-9 * base);  // noise factor is 1 + 0.4|N| >= 1
        if (i > 0 && v != prev) saw_distinct = true;
        prev = v;
    }
    CHECK(saw_distinct);

    // At the optimum the base is zero, so noise cannot move it off the bias.
    dme::Rng rng2(33);
    CHECK(noisy.evaluate(noisy.transform.shift, rng2) == noisy.f_bias);
}

TEST_CASE("overflow saturates to the sentinel with a diagnostic", "[benchmarks]") {
    dme::ProblemDefinition p = dme::make_problem("f2", 2);
    dme::Rng rng(1);
    dme::EvalDiagnostics diag;
    const double v = p.evaluate({1e300, 1e300}, rng, &diag);
    CHECK(v == dme::kOverflowSentinel);
    CHECK(diag.overflow_saturations == 1);
    CHECK(std::isfinite(v));
}

TEST_CASE("data file loaders validate shape and orthogonality", "[benchmarks]") {
    auto shift_path = temp_file("dme_test_shift.txt");
    {
        std::ofstream out(shift_path);
        out << "1.5 -2.5 3.5\n";
    }
    std::vector<double> shift = dme::load_shift_file(shift_path.string(), 3);
    CHECK(shift == std::vector<double>{1.5, -2.5, 3.5});
    CHECK_THROWS(dme::load_shift_file(shift_path.string(), 4));

    auto rot_path = temp_file("dme_test_rot.txt");
    {
        std::ofstream out(rot_path);
        out << "0 1\n-1 0\n";
    }
    std::vector<double> rot = dme::load_rotation_file(rot_path.string(), 2);
    CHECK(rot == std::vector<double>{0.0, 1.0, -1.0, 0.0});

    auto skew_path = temp_file("dme_test_skew.txt");
    {
        std::ofstream out(skew_path);
        out << "1 1\n0 1\n";
    }
    CHECK_THROWS(dme::load_rotation_file(skew_path.string(), 2));

    std::filesystem::remove(shift_path);
    std::filesystem::remove(rot_path);
    std::filesystem::remove(skew_path);
}

TEST_CASE("problem construction rejects bad requests", "[benchmarks]") {
    CHECK_THROWS(dme::make_problem("nope", 10));
    CHECK_THROWS(dme::make_problem("f1", 1));

    dme::ProblemOptions opt;
    opt.rotation_file = "whatever.txt";
    CHECK_THROWS(dme::make_problem("f1", 4, opt));  // f1 takes no rotation

    // Canonical names are case-insensitive.
    dme::ProblemDefinition p = dme::make_problem("F9", 4);
    CHECK(p.name == "f9");
}

TEST_CASE("data files override generated transforms", "[benchmarks]") {
    auto shift_path = temp_file("dme_test_shift_f1.txt");
    {
        std::ofstream out(shift_path);
        out << "1 2 3 4\n";
    }
    dme::ProblemOptions opt;
    opt.shift_file = shift_path.string();
    dme::ProblemDefinition p = dme::make_problem("f1", 4, opt);
    CHECK(p.transform.shift == std::vector<double>{1, 2, 3, 4});
    dme::Rng rng(1);
    CHECK(p.evaluate({1, 2, 3, 4}, rng) == p.f_bias);
    std::filesystem::remove(shift_path);
}

TEST_CASE("generated shifts are reproducible and interior", "[benchmarks]") {
    dme::ProblemDefinition a = dme::make_problem("f1", 10);
    dme::ProblemDefinition b = dme::make_problem("f1", 10);
    CHECK(a.transform.shift == b.transform.shift);

    // Inner 80% of [-100,100] is [-80,80].
    for (double o : a.transform.shift) {
        CHECK(o >= -80.0);
        CHECK(o <= 80.0);
    }

    dme::ProblemOptions other;
    other.transform_seed = 77;
    dme::ProblemDefinition c = dme::make_problem("f1", 10, other);
    CHECK(c.transform.shift != a.transform.shift);
}

TEST_CASE("bates narrowing matches the analytic width", "[benchmarks]") {
    dme::Rng rng(2718);
    auto table = dme::bates_narrowing_check({2, 10, 20, 30, 50}, 40000, rng);
    REQUIRE(table.size() == 5);

    // n=2: first BC is a single uniform gene, sd = 1/sqrt(12).
    const double analytic = 1.0 / std::sqrt(12.0);
    CHECK(std::abs(table[0].second - analytic) <= 0.02 * analytic);

    for (std::size_t i = 1; i < table.size(); ++i)
        CHECK(table[i].second < table[i - 1].second);  // strictly narrower

    CHECK(table[2].second < table[0].second);  // n=20 below n=2
    CHECK_THROWS(dme::bates_narrowing_check({2}, 5000, rng));
    CHECK_THROWS(dme::bates_narrowing_check({1}, 20000, rng));
}

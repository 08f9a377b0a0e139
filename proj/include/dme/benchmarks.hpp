#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace dme {

// How out-of-bounds genes contribute to the behavior descriptor.
// `saturating` pins the gene to the violated bound. `literal` maps an
// out-of-bounds gene x to x_min/x, which keeps the contribution small but
// is an odd rule; it is kept available because some published setups use
// it. Saturating is the default.
enum class ClipMode { saturating, literal };

enum class FunctionKind {
    sphere,            // f1
    schwefel_1_2,      // f2 (f4 adds fitness noise)
    rosenbrock,        // f6
    griewank,          // f7, rotated, no search bounds
    ackley,            // f8, rotated, optimum on the box boundary
    rastrigin,         // f9 (f10 adds rotation)
    expanded_scaffer,  // f14, rotated
};

struct TransformData {
    std::vector<double> shift;     // optimum location o
    std::vector<double> rotation;  // row-major n*n orthogonal; empty = identity
    bool noisy = false;            // multiplicative fitness noise
};

struct EvalDiagnostics {
    std::uint64_t overflow_saturations = 0;
};

// Returned instead of an overflowed objective value so NaN/inf never
// leaves the evaluation layer.
inline constexpr double kOverflowSentinel = 1e300;

// Largest absolute entry of M*M^T - I.
inline double orthogonality_error(const std::vector<double>& m, std::size_t n) {
    if (m.size() != n * n) throw std::invalid_argument("orthogonality_error: bad shape");
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t a = 0; a < n; ++a) dot += m[i * n + a] * m[j * n + a];
            worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

// Random orthogonal matrix: Gaussian entries, then modified Gram-Schmidt
// over the rows with a second orthogonalization pass. Rank deficiency
// (vanishing row norm) redraws, which for Gaussian input essentially
// never happens.
inline std::vector<double> random_rotation(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> m(n * n);
    while (true) {
        for (double& v : m) v = rng.normal();
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            double* row = m.data() + i * n;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t p = 0; p < i; ++p) {
                    const double* prev = m.data() + p * n;
                    double dot = 0.0;
                    for (std::size_t a = 0; a < n; ++a) dot += row[a] * prev[a];
                    for (std::size_t a = 0; a < n; ++a) row[a] -= dot * prev[a];
                }
            }
            double norm2 = 0.0;
            for (std::size_t a = 0; a < n; ++a) norm2 += row[a] * row[a];
            if (norm2 < 1e-12) {
                ok = false;
                break;
            }
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t a = 0; a < n; ++a) row[a] *= inv;
        }
        if (ok) return m;
    }
}

// CEC-style data files: whitespace-separated decimal text.
inline std::vector<double> load_numeric_file(const std::string& path, std::size_t count) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file " + path);
    std::vector<double> values;
    values.reserve(count);
    double v = 0.0;
    while (values.size() < count && (in >> v)) values.push_back(v);
    if (values.size() < count)
        throw std::runtime_error("data file " + path + " holds fewer than " +
                                 std::to_string(count) + " values");
    return values;
}

inline std::vector<double> load_shift_file(const std::string& path, std::size_t n) {
    return load_numeric_file(path, n);
}

inline std::vector<double> load_rotation_file(const std::string& path, std::size_t n) {
    std::vector<double> m = load_numeric_file(path, n * n);
    const double err = orthogonality_error(m, n);
    if (err > 1e-9)
        throw std::runtime_error("rotation matrix in " + path +
                                 " is not orthogonal (error " + std::to_string(err) + ")");
    return m;
}

inline double clip_gene(double x, double lo, double hi, ClipMode mode) {
    if (x >= lo && x <= hi) return x;
    if (mode == ClipMode::saturating) return x < lo ? lo : hi;
    // Literal rule: out-of-bounds maps to x_min/x. The zero guard only
    // matters for boxes with lo > 0, where x = 0 falls outside.
    return x == 0.0 ? 0.0 : lo / x;
}

// A fixed benchmark instance: objective (minimization, bias included),
// box, and the two-dimensional linear-projection behavior descriptor.
// Immutable once built and safe to share across runs; the noise stream
// for noisy variants is supplied per evaluation by the caller.
struct ProblemDefinition {
    std::string name;
    FunctionKind kind = FunctionKind::sphere;
    std::size_t dimension = 0;
    double f_bias = 0.0;
    double optimum_value = 0.0;
    SearchBounds bounds;    // bounded=false keeps the init box in lower/upper
    SearchBounds init_box;  // equals bounds for bounded problems
    TransformData transform;
    ClipMode clip_mode = ClipMode::saturating;

    double evaluate(const SolutionVector& x, Rng& rng, EvalDiagnostics* diag = nullptr) const {
        if (x.size() != dimension)
            throw std::invalid_argument("evaluate: dimension mismatch on " + name);
        const std::size_t n = dimension;
        std::vector<double> z(n);
        for (std::size_t j = 0; j < n; ++j) z[j] = x[j] - transform.shift[j];
        if (!transform.rotation.empty()) {
            std::vector<double> rotated(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += z[j] * transform.rotation[j * n + i];
                rotated[i] = acc;
            }
            z.swap(rotated);
        }

        double value = 0.0;
        switch (kind) {
            case FunctionKind::sphere: {
                for (const double zi : z) value += zi * zi;
                break;
            }
            case FunctionKind::schwefel_1_2: {
                double prefix = 0.0;
                for (const double zi : z) {
                    prefix += zi;
                    value += prefix * prefix;
                }
                break;
            }
            case FunctionKind::rosenbrock: {
                // Optimum sits at z = 0 via the +1 offset, so the stored
                // shift is the true optimum location.
                for (std::size_t j = 0; j + 1 < n; ++j) {
                    const double a = z[j] + 1.0;
                    const double b = z[j + 1] + 1.0;
                    const double t = a * a - b;
                    value += 100.0 * t * t + (a - 1.0) * (a - 1.0);
                }
                break;
            }
            case FunctionKind::griewank: {
                double sum = 0.0, prod = 1.0;
                for (std::size_t j = 0; j < n; ++j) {
                    sum += z[j] * z[j];
                    prod *= std::cos(z[j] / std::sqrt(static_cast<double>(j + 1)));
                }
                value = sum / 4000.0 - prod + 1.0;
                break;
            }
            case FunctionKind::ackley: {
                double sum_sq = 0.0, sum_cos = 0.0;
                for (const double zi : z) {
                    sum_sq += zi * zi;
                    sum_cos += std::cos(2.0 * std::numbers::pi * zi);
                }
                const double inv_n = 1.0 / static_cast<double>(n);
                value = -20.0 * std::exp(-0.2 * std::sqrt(sum_sq * inv_n)) -
                        std::exp(sum_cos * inv_n) + 20.0 + std::numbers::e;
                break;
            }
            case FunctionKind::rastrigin: {
                for (const double zi : z)
                    value += zi * zi - 10.0 * std::cos(2.0 * std::numbers::pi * zi) + 10.0;
                break;
            }
            case FunctionKind::expanded_scaffer: {
                auto scaffer = [](double a, double b) {
                    const double s = a * a + b * b;
                    const double sin_term = std::sin(std::sqrt(s));
                    const double denom = 1.0 + 0.001 * s;
                    return 0.5 + (sin_term * sin_term - 0.5) / (denom * denom);
                };
                for (std::size_t j = 0; j < n; ++j) value += scaffer(z[j], z[(j + 1) % n]);
                break;
            }
        }

        if (transform.noisy) value *= 1.0 + 0.4 * std::abs(rng.normal());
        const double f = value + f_bias;
        if (!std::isfinite(f)) {
            if (diag) ++diag->overflow_saturations;
            return kOverflowSentinel;
        }
        return f;
    }

    // b(x) = (sum of clipped first-half genes, sum of the rest), each half
    // affinely mapped from its attainable range onto [0,1]. Unbounded
    // problems clip against the initialization box.
    BehaviorPoint behavior(const SolutionVector& x) const {
        if (x.size() != dimension)
            throw std::invalid_argument("behavior: dimension mismatch on " + name);
        const std::size_t half = dimension / 2;
        BehaviorPoint b(2);
        b[0] = behavior_component(x, 0, half);
        b[1] = behavior_component(x, half, dimension);
        return b;
    }

private:
    double behavior_component(const SolutionVector& x, std::size_t begin, std::size_t end) const {
        double raw = 0.0, lo_sum = 0.0, hi_sum = 0.0;
        for (std::size_t j = begin; j < end; ++j) {
            raw += clip_gene(x[j], bounds.lower[j], bounds.upper[j], clip_mode);
            lo_sum += bounds.lower[j];
            hi_sum += bounds.upper[j];
        }
        const double v = (raw - lo_sum) / (hi_sum - lo_sum);
        return std::clamp(v, 0.0, 1.0);
    }
};

inline double evaluate(const ProblemDefinition& p, const SolutionVector& x, Rng& rng,
                       EvalDiagnostics* diag = nullptr) {
    return p.evaluate(x, rng, diag);
}

inline BehaviorPoint behavior(const ProblemDefinition& p, const SolutionVector& x) {
    return p.behavior(x);
}

struct ProblemOptions {
    ClipMode clip_mode = ClipMode::saturating;
    std::uint64_t transform_seed = 2005;  // drives shift/rotation generation
    std::string shift_file;               // optional CEC data files; generated when empty
    std::string rotation_file;
};

namespace detail {

struct FunctionSpec {
    const char* id;
    int number;
    FunctionKind kind;
    double lo, hi;
    double bias;
    bool bounded;
    bool rotated;
    bool noisy;
    bool optimum_on_bounds;
};

inline const std::vector<FunctionSpec>& function_table() {
    static const std::vector<FunctionSpec> table = {
        {"f1", 1, FunctionKind::sphere, -100.0, 100.0, -450.0, true, false, false, false},
        {"f2", 2, FunctionKind::schwefel_1_2, -100.0, 100.0, -450.0, true, false, false, false},
        {"f4", 4, FunctionKind::schwefel_1_2, -100.0, 100.0, -450.0, true, false, true, false},
        {"f6", 6, FunctionKind::rosenbrock, -100.0, 100.0, 390.0, true, false, false, false},
        {"f7", 7, FunctionKind::griewank, 0.0, 600.0, -180.0, false, true, false, false},
        {"f8", 8, FunctionKind::ackley, -32.0, 32.0, -140.0, true, true, false, true},
        {"f9", 9, FunctionKind::rastrigin, -5.0, 5.0, -330.0, true, false, false, false},
        {"f10", 10, FunctionKind::rastrigin, -5.0, 5.0, -330.0, true, true, false, false},
        {"f14", 14, FunctionKind::expanded_scaffer, -100.0, 100.0, -300.0, true, true, false, false},
    };
    return table;
}

inline std::string canonical_function_name(const std::string& name) {
    std::string id;
    for (const char ch : name) id.push_back(static_cast<char>(std::tolower(ch)));
    return id;
}

}  // namespace detail

inline std::vector<std::string> supported_functions() {
    std::vector<std::string> names;
    for (const auto& spec : detail::function_table()) names.emplace_back(spec.id);
    return names;
}

inline ProblemDefinition make_problem(const std::string& name, std::size_t n,
                                      const ProblemOptions& options = {}) {
    if (n < 2)
        throw std::invalid_argument("make_problem: dimension must be at least 2");
    const std::string id = detail::canonical_function_name(name);
    const detail::FunctionSpec* spec = nullptr;
    for (const auto& s : detail::function_table())
        if (id == s.id) spec = &s;
    if (!spec) {
        std::string known;
        for (const auto& s : detail::function_table()) {
            if (!known.empty()) known += ", ";
            known += s.id;
        }
        throw std::invalid_argument("make_problem: unknown function '" + name +
                                    "' (supported: " + known + ")");
    }

    ProblemDefinition p;
    p.name = spec->id;
    p.kind = spec->kind;
    p.dimension = n;
    p.f_bias = spec->bias;
    p.optimum_value = spec->bias;
    p.init_box = uniform_bounds(n, spec->lo, spec->hi);
    p.bounds = p.init_box;
    p.bounds.bounded = spec->bounded;
    p.clip_mode = options.clip_mode;
    p.transform.noisy = spec->noisy;

    const auto tag = static_cast<std::uint64_t>(spec->number) * 1000003ULL + n;
    if (!options.shift_file.empty()) {
        p.transform.shift = load_shift_file(options.shift_file, n);
    } else {
        // Shift drawn from the inner 80% of the box; functions whose
        // optimum lies on the boundary pin every even-index component to
        // the lower bound instead.
        Rng rng(derive_seed(options.transform_seed, 2 * tag));
        p.transform.shift.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (spec->optimum_on_bounds && j % 2 == 0)
                p.transform.shift[j] = spec->lo;
            else
                p.transform.shift[j] = spec->lo + (0.1 + 0.8 * rng.uniform01()) * (spec->hi - spec->lo);
        }
    }
    if (p.transform.shift.size() != n)
        throw std::invalid_argument("make_problem: shift dimension mismatch");

    if (spec->rotated) {
        if (!options.rotation_file.empty())
            p.transform.rotation = load_rotation_file(options.rotation_file, n);
        else
            p.transform.rotation = random_rotation(n, derive_seed(options.transform_seed, 2 * tag + 1));
    } else if (!options.rotation_file.empty()) {
        throw std::invalid_argument("make_problem: " + p.name + " does not take a rotation");
    }
    return p;
}

// Spread of the normalized first behavior component under uniform random
// genes, per dimension. The normalized component is the mean of floor(n/2)
// iid uniforms whatever the box, so sampling the unit box loses nothing.
// Following the Bates distribution, the spread shrinks as n grows.
inline std::vector<std::pair<std::size_t, double>> bates_narrowing_check(
    const std::vector<std::size_t>& n_values, std::size_t samples, Rng& rng) {
    if (samples < 10000)
        throw std::invalid_argument("bates_narrowing_check: need at least 10,000 samples");
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(n_values.size());
    for (const std::size_t n : n_values) {
        if (n < 2) throw std::invalid_argument("bates_narrowing_check: n must be at least 2");
        const std::size_t half = n / 2;
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < samples; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < half; ++j) sum += rng.uniform01();
            const double v = sum / static_cast<double>(half);
            s += v;
            s2 += v * v;
        }
        const double mean = s / static_cast<double>(samples);
        const double var = std::max(0.0, s2 / static_cast<double>(samples) - mean * mean);
        out.emplace_back(n, std::sqrt(var));
    }
    return out;
}

}  // namespace dme

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace dme {

// Search-space operators. All of them are pure given the random stream
// passed in, and none of them repairs out-of-bounds genes: the behavior
// function clips its own inputs and the objectives are defined outside the
// box, so repair would alter the search dynamics.

inline SolutionVector random_solution(const SearchBounds& bounds, Rng& rng) {
    const std::size_t d = bounds.dimension();
    SolutionVector x(d);
    for (std::size_t j = 0; j < d; ++j)
        x[j] = bounds.lower[j] + rng.uniform01() * (bounds.upper[j] - bounds.lower[j]);
    return x;
}

// DE/rand/1 mutant: r1 + F * (r2 - r3).
inline SolutionVector de_rand_1(const SolutionVector& r1, const SolutionVector& r2,
                                const SolutionVector& r3, double F) {
    const std::size_t d = r1.size();
    if (r2.size() != d || r3.size() != d)
        throw std::invalid_argument("de_rand_1: dimension mismatch");
    SolutionVector v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = r1[j] + F * (r2[j] - r3[j]);
    return v;
}

// Binomial crossover. j_rand is drawn first, then one uniform draw per
// gene (drawn even at the forced index, to keep the stream layout fixed).
// Gene j comes from the mutant when the draw is <= CR or j equals j_rand,
// so at least one mutant gene always survives.
inline SolutionVector binomial_crossover(const SolutionVector& target,
                                         const SolutionVector& mutant, double CR, Rng& rng) {
    const std::size_t d = target.size();
    if (mutant.size() != d)
        throw std::invalid_argument("binomial_crossover: dimension mismatch");
    if (CR < 0.0 || CR > 1.0)
        throw std::invalid_argument("binomial_crossover: CR outside [0,1]");
    const std::size_t j_rand = static_cast<std::size_t>(rng.uniform_index(d));
    SolutionVector u(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double r = rng.uniform01();
        u[j] = (r <= CR || j == j_rand) ? mutant[j] : target[j];
    }
    return u;
}

// Isotropic Gaussian mutation over every coordinate, as used by the
// CVT-MAP-Elites baseline.
inline SolutionVector gaussian_mutation(const SolutionVector& parent,
                                        const std::vector<double>& sigma, Rng& rng) {
    const std::size_t d = parent.size();
    if (sigma.size() != d)
        throw std::invalid_argument("gaussian_mutation: sigma dimension mismatch");
    SolutionVector child(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (sigma[j] < 0.0)
            throw std::invalid_argument("gaussian_mutation: negative sigma");
        child[j] = parent[j] + sigma[j] * rng.normal();
    }
    return child;
}

// Per-coordinate step of (x_max - x_min) / 300, the baseline's default.
inline std::vector<double> default_sigma(const SearchBounds& bounds) {
    std::vector<double> sigma(bounds.dimension());
    for (std::size_t j = 0; j < sigma.size(); ++j)
        sigma[j] = (bounds.upper[j] - bounds.lower[j]) / 300.0;
    return sigma;
}

}  // namespace dme

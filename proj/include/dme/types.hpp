#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dme {

// A point in the D-dimensional real search space.
using SolutionVector = std::vector<double>;

// A point in the normalized behavior space [0,1]^N.
using BehaviorPoint = std::vector<double>;

struct SearchBounds {
    std::vector<double> lower;
    std::vector<double> upper;
    bool bounded = true;  // false for problems with an unbounded search space

    std::size_t dimension() const { return lower.size(); }

    void validate() const {
        if (lower.size() != upper.size())
            throw std::invalid_argument("SearchBounds: lower/upper size mismatch");
        if (bounded) {
            for (std::size_t j = 0; j < lower.size(); ++j)
                if (!(lower[j] < upper[j]))
                    throw std::invalid_argument(
                        "SearchBounds: lower must be strictly below upper at index " +
                        std::to_string(j));
        }
    }
};

inline SearchBounds uniform_bounds(std::size_t dim, double lo, double hi) {
    SearchBounds b;
    b.lower.assign(dim, lo);
    b.upper.assign(dim, hi);
    return b;
}

struct DEParameters {
    double scale_factor = 0.5;     // F
    double crossover_rate = 0.9;   // CR

    void validate() const {
        if (!(scale_factor > 0.0) || scale_factor > 2.0)
            throw std::invalid_argument("DEParameters: F must be in (0, 2]");
        if (crossover_rate < 0.0 || crossover_rate > 1.0)
            throw std::invalid_argument("DEParameters: CR must be in [0, 1]");
    }
};

}  // namespace dme

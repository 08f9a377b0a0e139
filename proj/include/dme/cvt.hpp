#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "format.hpp"
#include "kdtree.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace dme {

// Immutable set of k centroids in [0,1]^dim with an exact nearest-neighbor
// index on top. Safe to share across threads once built. Non-copyable
// because the kd-tree references the centroid storage; moving is fine
// (vector moves keep the heap buffer alive).
class CentroidIndex {
public:
    CentroidIndex(std::vector<double> flat_centroids, std::size_t k, std::size_t dim)
        : data_(std::move(flat_centroids)), k_(k), dim_(dim) {
        if (k == 0 || dim == 0 || data_.size() != k * dim)
            throw std::invalid_argument("CentroidIndex: bad centroid array shape");
        tree_.build(data_.data(), k_, dim_);
    }

    CentroidIndex(const CentroidIndex&) = delete;
    CentroidIndex& operator=(const CentroidIndex&) = delete;
    CentroidIndex(CentroidIndex&&) = default;
    CentroidIndex& operator=(CentroidIndex&&) = default;

    std::size_t k() const { return k_; }
    std::size_t dimension() const { return dim_; }

    std::span<const double> centroid(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

    const std::vector<double>& flat() const { return data_; }

    std::size_t nearest(std::span<const double> b) const { return tree_.nearest(b); }

private:
    std::vector<double> data_;
    std::size_t k_ = 0;
    std::size_t dim_ = 0;
    KdTree tree_;
};

inline std::size_t nearest_centroid(const CentroidIndex& index, const BehaviorPoint& b) {
    if (b.size() != index.dimension())
        throw std::invalid_argument("nearest_centroid: behavior dimension mismatch");
    return index.nearest(b);
}

inline constexpr std::size_t kDefaultCvtIterations = 100;
inline constexpr double kCvtDisplacementTol = 1e-6;

inline std::size_t default_cvt_samples(std::size_t k) {
    return std::max<std::size_t>(100 * k, 100000);
}

// The fixed sample set Lloyd iteration runs over, row-major, coordinates
// drawn one sample at a time from a single stream.
inline std::vector<double> draw_unit_samples(std::size_t count, std::size_t dim,
                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> samples(count * dim);
    for (double& v : samples) v = rng.uniform01();
    return samples;
}

namespace detail {

// Nearest-centroid assignment for every sample. Chunked across threads;
// each sample's result is independent, so the outcome does not depend on
// the thread count.
inline void assign_nearest(const std::vector<double>& samples, std::size_t dim,
                           const KdTree& tree, std::vector<std::uint32_t>& out) {
    const std::size_t count = samples.size() / dim;
    out.resize(count);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = static_cast<std::uint32_t>(
                tree.nearest({samples.data() + i * dim, dim}));
    };
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (count < 4096 || hw == 1) {
        work(0, count);
        return;
    }
    const std::size_t threads = std::min(hw, (count + 4095) / 4096);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Mean squared distance from each sample to its nearest centroid.
inline double quantization_energy(const std::vector<double>& centroids, std::size_t k,
                                  const std::vector<double>& samples, std::size_t dim) {
    KdTree tree;
    tree.build(centroids.data(), k, dim);
    const std::size_t count = samples.size() / dim;
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double* s = samples.data() + i * dim;
        const double* c = centroids.data() + tree.nearest({s, dim}) * dim;
        for (std::size_t a = 0; a < dim; ++a) {
            const double diff = s[a] - c[a];
            total += diff * diff;
        }
    }
    return total / static_cast<double>(count);
}

// One Lloyd update in place: assign samples to nearest centroids, move each
// centroid to the mean of its assigned samples, leave centroids with no
// samples where they are. Returns the largest centroid displacement.
// Accumulation runs serially in sample order, so the result is identical
// for any thread count.
inline double lloyd_step(std::vector<double>& centroids, std::size_t k,
                         const std::vector<double>& samples, std::size_t dim) {
    KdTree tree;
    tree.build(centroids.data(), k, dim);
    std::vector<std::uint32_t> assignment;
    detail::assign_nearest(samples, dim, tree, assignment);

    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::uint64_t> counts(k, 0);
    const std::size_t count = samples.size() / dim;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t c = assignment[i];
        const double* s = samples.data() + i * dim;
        double* acc = sums.data() + static_cast<std::size_t>(c) * dim;
        for (std::size_t a = 0; a < dim; ++a) acc[a] += s[a];
        ++counts[c];
    }

    double max_disp = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        double* cur = centroids.data() + c * dim;
        const double* acc = sums.data() + c * dim;
        double d2 = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            const double next = acc[a] / static_cast<double>(counts[c]);
            const double diff = next - cur[a];
            d2 += diff * diff;
            cur[a] = next;
        }
        max_disp = std::max(max_disp, std::sqrt(d2));
    }
    return max_disp;
}

// Lloyd iteration over a fixed uniform sample set in [0,1]^N. Centroids
// start at the first k samples, so k = K with one iteration leaves every
// centroid exactly on a sample point. Stops early once the largest
// centroid displacement drops below kCvtDisplacementTol.
inline CentroidIndex cvt_approximation(std::size_t k, std::size_t N, std::size_t sample_count,
                                       std::size_t max_iterations, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("cvt_approximation: k must be positive");
    if (N == 0) throw std::invalid_argument("cvt_approximation: N must be positive");
    if (sample_count < k)
        throw std::invalid_argument("cvt_approximation: sample_count must be >= k");

    const std::vector<double> samples = draw_unit_samples(sample_count, N, seed);
    std::vector<double> centroids(samples.begin(), samples.begin() + k * N);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        const double disp = lloyd_step(centroids, k, samples, N);
        if (disp < kCvtDisplacementTol) break;
    }
    return CentroidIndex(std::move(centroids), k, N);
}

inline CentroidIndex cvt_approximation(std::size_t k, std::size_t N, std::uint64_t seed) {
    return cvt_approximation(k, N, default_cvt_samples(k), kDefaultCvtIterations, seed);
}

// Plain-text persistence: "k N" header, then one centroid per line. The
// 17-digit formatting makes save/load round-trip bit-exact.
inline void save_centroids(std::ostream& out, const CentroidIndex& index) {
    out << index.k() << ' ' << index.dimension() << '\n';
    for (std::size_t i = 0; i < index.k(); ++i) {
        const auto c = index.centroid(i);
        for (std::size_t a = 0; a < c.size(); ++a) {
            if (a) out << ' ';
            out << fmt17(c[a]);
        }
        out << '\n';
    }
}

inline void save_centroids(const std::string& path, const CentroidIndex& index) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_centroids: cannot open " + path);
    save_centroids(out, index);
    if (!out) throw std::runtime_error("save_centroids: write failed for " + path);
}

inline CentroidIndex load_centroids(std::istream& in) {
    std::size_t k = 0, dim = 0;
    if (!(in >> k >> dim) || k == 0 || dim == 0)
        throw std::runtime_error("load_centroids: bad header line");
    std::vector<double> data;
    data.reserve(k * dim);
    for (std::size_t i = 0; i < k * dim; ++i) {
        std::string token;
        if (!(in >> token))
            throw std::runtime_error("load_centroids: truncated centroid data");
        const double v = parse_double(token);
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw std::runtime_error("load_centroids: coordinate outside [0,1]: " + token);
        data.push_back(v);
    }
    return CentroidIndex(std::move(data), k, dim);
}

inline CentroidIndex load_centroids(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_centroids: cannot open " + path);
    return load_centroids(in);
}

}  // namespace dme

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvt.hpp"
#include "format.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace dme {

enum class InsertionOutcome { inserted_new, replaced, rejected };

struct InsertResult {
    InsertionOutcome outcome;
    std::size_t cell;
};

// One elite per CVT cell, maximization-oriented: a candidate takes a cell
// only when the cell is empty or the candidate's fitness is strictly
// higher. Minimized objectives get negated before insertion (see the
// benchmark layer), which keeps this class free of sign special cases.
//
// Holds a reference to its CentroidIndex; the index must outlive the
// archive. Single-writer: archives are never shared between runs.
class EliteArchive {
public:
    explicit EliteArchive(const CentroidIndex& index)
        : index_(&index),
          solutions_(index.k()),
          behaviors_(index.k()),
          fitness_(index.k(), 0.0),
          filled_(index.k(), 0) {}

    const CentroidIndex& centroid_index() const { return *index_; }
    std::size_t k() const { return index_->k(); }
    std::size_t filled_count() const { return filled_cells_.size(); }
    double coverage() const {
        return static_cast<double>(filled_count()) / static_cast<double>(k());
    }

    bool filled(std::size_t cell) const { return filled_.at(cell) != 0; }

    const SolutionVector& solution(std::size_t cell) const {
        require_filled(cell);
        return solutions_[cell];
    }
    double fitness(std::size_t cell) const {
        require_filled(cell);
        return fitness_[cell];
    }
    const BehaviorPoint& behavior(std::size_t cell) const {
        require_filled(cell);
        return behaviors_[cell];
    }

    // Cells in first-fill order. Cells never empty again, so this only grows.
    const std::vector<std::uint32_t>& filled_cells() const { return filled_cells_; }

    double best_fitness() const {
        if (filled_cells_.empty()) throw std::logic_error("EliteArchive: empty archive");
        return best_fitness_;
    }
    std::size_t best_cell() const {
        if (filled_cells_.empty()) throw std::logic_error("EliteArchive: empty archive");
        return best_cell_;
    }

    // Gene count of stored solutions; 0 until the first insertion.
    std::size_t solution_dimension() const { return solution_dim_; }

    // Count of candidates turned away for carrying a NaN or infinite
    // fitness (CEC objectives can overflow far outside the box).
    std::uint64_t nonfinite_rejections() const { return nonfinite_rejections_; }

    InsertResult add(const SolutionVector& x, double fitness, const BehaviorPoint& b) {
        if (!std::isfinite(fitness)) {
            ++nonfinite_rejections_;
            return {InsertionOutcome::rejected, k()};
        }
        const std::size_t cell = nearest_centroid(*index_, b);
        if (!filled_[cell]) {
            solutions_[cell] = x;
            behaviors_[cell] = b;
            fitness_[cell] = fitness;
            filled_[cell] = 1;
            filled_cells_.push_back(static_cast<std::uint32_t>(cell));
            solution_dim_ = x.size();
            note_best(fitness, cell);
            return {InsertionOutcome::inserted_new, cell};
        }
        if (fitness > fitness_[cell]) {
            solutions_[cell] = x;
            behaviors_[cell] = b;
            fitness_[cell] = fitness;
            note_best(fitness, cell);
            return {InsertionOutcome::replaced, cell};
        }
        return {InsertionOutcome::rejected, cell};
    }

private:
    void note_best(double fitness, std::size_t cell) {
        if (filled_cells_.size() == 1 || fitness > best_fitness_) {
            best_fitness_ = fitness;
            best_cell_ = cell;
        }
    }
    void require_filled(std::size_t cell) const {
        if (!filled_.at(cell)) throw std::logic_error("EliteArchive: cell is empty");
    }

    const CentroidIndex* index_;
    std::vector<SolutionVector> solutions_;
    std::vector<BehaviorPoint> behaviors_;
    std::vector<double> fitness_;
    std::vector<std::uint8_t> filled_;
    std::vector<std::uint32_t> filled_cells_;
    double best_fitness_ = -std::numeric_limits<double>::infinity();
    std::size_t best_cell_ = 0;
    std::size_t solution_dim_ = 0;
    std::uint64_t nonfinite_rejections_ = 0;
};

inline InsertionOutcome add_to_archive(EliteArchive& archive, const SolutionVector& x,
                                       double fitness, const BehaviorPoint& b) {
    return archive.add(x, fitness, b).outcome;
}

inline double coverage(const EliteArchive& archive) { return archive.coverage(); }

struct EliteRef {
    std::size_t cell;
    const SolutionVector* solution;
};

// Uniform draw of `count` distinct non-empty cells. Dense requests shuffle
// a copy of the filled list; sparse ones (the hot path: count is 4) use
// rejection sampling, which is equivalent in distribution.
inline std::vector<EliteRef> sample_distinct_elites(const EliteArchive& archive,
                                                    std::size_t count, Rng& rng) {
    if (count == 0) throw std::invalid_argument("sample_distinct_elites: count must be positive");
    const auto& cells = archive.filled_cells();
    const std::size_t m = cells.size();
    if (m < count)
        throw std::runtime_error("sample_distinct_elites: fewer non-empty cells than requested");

    std::vector<EliteRef> out;
    out.reserve(count);
    if (count * 2 >= m) {
        std::vector<std::uint32_t> pool(cells);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(m - i));
            std::swap(pool[i], pool[j]);
            out.push_back({pool[i], &archive.solution(pool[i])});
        }
    } else {
        std::vector<std::uint32_t> taken;
        taken.reserve(count);
        while (out.size() < count) {
            const auto pos = static_cast<std::uint32_t>(rng.uniform_index(m));
            bool dup = false;
            for (const std::uint32_t t : taken) dup = dup || (t == pos);
            if (dup) continue;
            taken.push_back(pos);
            const std::size_t cell = cells[pos];
            out.push_back({cell, &archive.solution(cell)});
        }
    }
    return out;
}

// CSV dump, one row per filled cell in cell-index order:
//   cell, centroid coords, fitness, behavior coords, solution genes
// Values use 17-significant-digit formatting so a reload is bit-exact.
inline void save_archive_csv(std::ostream& out, const EliteArchive& archive) {
    const std::size_t N = archive.centroid_index().dimension();
    const std::size_t n = archive.solution_dimension();
    out << "cell";
    for (std::size_t a = 0; a < N; ++a) out << ",centroid" << a;
    out << ",fitness";
    for (std::size_t a = 0; a < N; ++a) out << ",behavior" << a;
    for (std::size_t j = 0; j < n; ++j) out << ",x" << j;
    out << '\n';
    for (std::size_t cell = 0; cell < archive.k(); ++cell) {
        if (!archive.filled(cell)) continue;
        out << cell;
        for (const double c : archive.centroid_index().centroid(cell)) out << ',' << fmt17(c);
        out << ',' << fmt17(archive.fitness(cell));
        for (const double b : archive.behavior(cell)) out << ',' << fmt17(b);
        for (const double g : archive.solution(cell)) out << ',' << fmt17(g);
        out << '\n';
    }
}

inline void save_archive_csv(const std::string& path, const EliteArchive& archive) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_archive_csv: cannot open " + path);
    save_archive_csv(out, archive);
    if (!out) throw std::runtime_error("save_archive_csv: write failed for " + path);
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace detail

// Rebuilds an archive from a dump produced against the same centroid set.
// Every row is cross-checked: the stored centroid coordinates must match
// the index bit-exactly and the behavior point must still map to the
// recorded cell.
inline EliteArchive load_archive_csv(std::istream& in, const CentroidIndex& index) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_archive_csv: missing header");
    const auto header = detail::split_csv_row(line);
    const std::size_t N = index.dimension();
    if (header.size() < 2 + 2 * N || header[0] != "cell")
        throw std::runtime_error("load_archive_csv: unexpected header layout");
    const std::size_t n = header.size() - (2 + 2 * N);

    EliteArchive archive(index);
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_row(line);
        const std::string where = " (row " + std::to_string(row_no) + ")";
        if (fields.size() != header.size())
            throw std::runtime_error("load_archive_csv: column count mismatch" + where);
        std::size_t f = 0;
        const auto cell = static_cast<std::size_t>(std::stoull(fields[f++]));
        if (cell >= index.k())
            throw std::runtime_error("load_archive_csv: cell index out of range" + where);
        const auto centroid = index.centroid(cell);
        for (std::size_t a = 0; a < N; ++a)
            if (parse_double(fields[f++]) != centroid[a])
                throw std::runtime_error(
                    "load_archive_csv: centroid mismatch with index" + where);
        const double fitness = parse_double(fields[f++]);
        BehaviorPoint b(N);
        for (std::size_t a = 0; a < N; ++a) b[a] = parse_double(fields[f++]);
        SolutionVector x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = parse_double(fields[f++]);
        const InsertResult result = archive.add(x, fitness, b);
        if (result.outcome != InsertionOutcome::inserted_new || result.cell != cell)
            throw std::runtime_error(
                "load_archive_csv: row does not map back to its recorded cell" + where);
    }
    return archive;
}

inline EliteArchive load_archive_csv(const std::string& path, const CentroidIndex& index) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_archive_csv: cannot open " + path);
    return load_archive_csv(in, index);
}

}  // namespace dme

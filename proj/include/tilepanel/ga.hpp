#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tilepanel/compat.hpp"
#include "tilepanel/error.hpp"
#include "tilepanel/geometry.hpp"
#include "tilepanel/parallel.hpp"
#include "tilepanel/puzzle.hpp"

namespace tilepanel {

using Rng = std::mt19937_64;

inline constexpr int kPhaseCount = 6;

struct GaConfig {
    int population_size = 100;
    int generations = 500;
    double skip_p1 = 0.10;
    double skip_p2 = 0.10;
    double skip_p3 = 0.20;
    double score_threshold_floor = 0.8;
    int elite_count = 1;
    int runs = 10;
    std::uint64_t seed = 0;
    /// Resample phase skips before every placement instead of once per crossover.
    bool skip_per_step = false;
    /// Worker threads for independent runs; 0 picks the hardware concurrency.
    int threads = 0;

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(skip_p1) || !prob(skip_p2) || !prob(skip_p3)) throw InputError("skip probabilities must lie in [0, 1]");
        if (population_size < 2) throw InputError("population_size must be at least 2");
        if (generations < 0) throw InputError("generations must be non-negative");
        if (elite_count < 0 || elite_count >= population_size)
            throw InputError("elite_count must lie in [0, population_size)");
        if (runs < 1) throw InputError("runs must be at least 1");
    }
};

/// What the solver may assume about the puzzle.
struct SolverFrame {
    int n_tiles = 0;
    Variant variant = Variant::Type1;
    std::optional<int> rows; // both set when dimensions are known
    std::optional<int> cols;

    bool dims_known() const noexcept { return rows.has_value() && cols.has_value(); }
    int max_rows() const noexcept { return rows.value_or(n_tiles); }
    int max_cols() const noexcept { return cols.value_or(n_tiles); }
};

inline SolverFrame frame_for(const PuzzleBundle& bundle, Variant variant, bool dims_known) {
    SolverFrame f{bundle.size(), variant, std::nullopt, std::nullopt};
    if (dims_known) {
        if (!bundle.dims_known()) throw InputError("bundle does not record its dimensions");
        f.rows = bundle.rows;
        f.cols = bundle.cols;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Chromosome

namespace detail {
/// Score of `left` abutting `right` horizontally, or of `upper` above `lower` when vertical.
inline float abutment_score(const CompatibilityMatrix& m, const Placement& first, const Placement& second,
                            bool vertical) noexcept {
    const Side out = vertical ? Side::Bottom : Side::Right;
    const Side in = vertical ? Side::Top : Side::Left;
    return m.score({first.tile, side_facing(out, first.rot)}, {second.tile, side_facing(in, second.rot)});
}
} // namespace detail

/// A neighbouring tile seen from some tile's side, with its rotation relative to that tile.
struct Neighbor {
    int tile = -1;
    Rotation relative;

    friend constexpr bool operator==(Neighbor, Neighbor) = default;
};

/// A complete configuration: every tile placed once, translated so the bounding box starts at (0, 0).
/// Fitness, per-tile scores and the neighbour table are computed on construction.
class Chromosome {
public:
    Chromosome() = default;

    Chromosome(std::vector<Placement> placements, const CompatibilityMatrix& m) {
        const int n = m.n_tiles();
        if (static_cast<int>(placements.size()) != n) throw InputError("chromosome must place every tile");
        int min_r = std::numeric_limits<int>::max(), min_c = min_r;
        int max_r = std::numeric_limits<int>::min(), max_c = max_r;
        for (const Placement& p : placements) {
            min_r = std::min(min_r, p.cell.row);
            max_r = std::max(max_r, p.cell.row);
            min_c = std::min(min_c, p.cell.col);
            max_c = std::max(max_c, p.cell.col);
        }
        height_ = max_r - min_r + 1;
        width_ = max_c - min_c + 1;
        if (static_cast<long long>(height_) * width_ > 64LL * n * n + 64)
            throw InputError("chromosome bounding box is implausibly large");

        placements_.assign(static_cast<std::size_t>(n), Placement{});
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        grid_.assign(static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_), -1);
        for (Placement p : placements) {
            if (p.tile < 0 || p.tile >= n || seen[static_cast<std::size_t>(p.tile)])
                throw InputError("chromosome places a tile twice or names an unknown tile");
            if (m.variant() == Variant::Type1 && p.rot.quarter_turns() != 0)
                throw InputError("Type1 chromosome cannot rotate tiles");
            seen[static_cast<std::size_t>(p.tile)] = 1;
            p.cell = {p.cell.row - min_r, p.cell.col - min_c};
            int& slot = grid_[grid_index(p.cell)];
            if (slot != -1) throw InputError("chromosome puts two tiles in one cell");
            slot = p.tile;
            placements_[static_cast<std::size_t>(p.tile)] = p;
        }
        evaluate(m);
    }

    int n_tiles() const noexcept { return static_cast<int>(placements_.size()); }
    /// Placements indexed by tile id.
    const std::vector<Placement>& placements() const noexcept { return placements_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    int tile_at(Cell c) const noexcept {
        if (c.row < 0 || c.col < 0 || c.row >= height_ || c.col >= width_) return -1;
        return grid_[grid_index(c)];
    }

    double fitness() const noexcept { return fitness_; }
    int boundary_count() const noexcept { return boundaries_; }
    double mean_boundary_compat() const noexcept { return boundaries_ == 0 ? 0.0 : fitness_ / boundaries_; }

    int degree(int tile) const noexcept { return degree_[static_cast<std::size_t>(tile)]; }
    double piece_score(int tile) const {
        const int d = degree(tile);
        if (d == 0) throw std::logic_error("piece_score of a tile without neighbours");
        return piece_sum_[static_cast<std::size_t>(tile)] / d;
    }

    /// The tile touching `tile`'s original side `side`, if any.
    Neighbor neighbor(int tile, Side side) const noexcept { return neighbors_[static_cast<std::size_t>(4 * tile + index(side))]; }

    friend bool operator==(const Chromosome& a, const Chromosome& b) noexcept { return a.placements_ == b.placements_; }

private:
    std::size_t grid_index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.col);
    }

    void evaluate(const CompatibilityMatrix& m) {
        const auto n = placements_.size();
        fitness_ = 0.0;
        boundaries_ = 0;
        piece_sum_.assign(n, 0.0);
        degree_.assign(n, 0);
        neighbors_.assign(4 * n, Neighbor{});
        for (const Placement& a : placements_) {
            for (const bool vertical : {false, true}) {
                const int b_tile = tile_at(step(a.cell, vertical ? Side::Bottom : Side::Right));
                if (b_tile < 0) continue;
                const Placement& b = placements_[static_cast<std::size_t>(b_tile)];
                const double s = detail::abutment_score(m, a, b, vertical);
                fitness_ += s;
                ++boundaries_;
                piece_sum_[static_cast<std::size_t>(a.tile)] += s;
                piece_sum_[static_cast<std::size_t>(b.tile)] += s;
                ++degree_[static_cast<std::size_t>(a.tile)];
                ++degree_[static_cast<std::size_t>(b.tile)];
            }
            for (const Side world : kAllSides) {
                const int b_tile = tile_at(step(a.cell, world));
                if (b_tile < 0) continue;
                const Side own = side_facing(world, a.rot);
                neighbors_[static_cast<std::size_t>(4 * a.tile + index(own))] = {
                    b_tile, placements_[static_cast<std::size_t>(b_tile)].rot - a.rot};
            }
        }
    }

    std::vector<Placement> placements_;
    std::vector<int> grid_;
    int height_ = 0;
    int width_ = 0;
    double fitness_ = 0.0;
    int boundaries_ = 0;
    std::vector<double> piece_sum_;
    std::vector<int> degree_;
    std::vector<Neighbor> neighbors_;
};

/// Sum of matrix scores over all horizontally and vertically adjacent pairs,
/// the left (or upper) tile acting as anchor.
inline double fitness(const Chromosome& c, const CompatibilityMatrix&) noexcept { return c.fitness(); }

inline double fitness(const std::vector<Placement>& placements, const CompatibilityMatrix& m) {
    return Chromosome(placements, m).fitness();
}

inline double mean_boundary_compat(const Chromosome& c, const CompatibilityMatrix&) noexcept {
    return c.mean_boundary_compat();
}

/// Mean score over the tile's placed neighbours.
inline double piece_score(const Chromosome& c, int tile, const CompatibilityMatrix&) { return c.piece_score(tile); }

/// Describes why `c` is not a valid chromosome for `frame`, or nullopt if it is.
inline std::optional<std::string> validity_error(const Chromosome& c, const SolverFrame& frame) {
    if (c.n_tiles() != frame.n_tiles) return "wrong number of placements";
    std::vector<char> tile_seen(static_cast<std::size_t>(frame.n_tiles), 0);
    std::vector<Cell> cells;
    int min_r = std::numeric_limits<int>::max(), min_c = min_r;
    int max_r = std::numeric_limits<int>::min(), max_c = max_r;
    for (int t = 0; t < c.n_tiles(); ++t) {
        const Placement& p = c.placements()[static_cast<std::size_t>(t)];
        if (p.tile != t || tile_seen[static_cast<std::size_t>(t)]) return "tile bookkeeping broken";
        tile_seen[static_cast<std::size_t>(t)] = 1;
        if (frame.variant == Variant::Type1 && p.rot.quarter_turns() != 0) return "rotated tile in Type1 puzzle";
        cells.push_back(p.cell);
        min_r = std::min(min_r, p.cell.row);
        max_r = std::max(max_r, p.cell.row);
        min_c = std::min(min_c, p.cell.col);
        max_c = std::max(max_c, p.cell.col);
    }
    std::sort(cells.begin(), cells.end());
    if (std::adjacent_find(cells.begin(), cells.end()) != cells.end()) return "two tiles share a cell";
    const int h = max_r - min_r + 1;
    const int w = max_c - min_c + 1;
    if (h > frame.max_rows() || w > frame.max_cols()) return "bounding box exceeds the puzzle frame";
    if (static_cast<long long>(h) * w < frame.n_tiles) return "bounding box too small";
    return std::nullopt;
}

/// Turns a whole configuration counterclockwise by `r` about the origin.
inline std::vector<Placement> rotate_configuration(std::vector<Placement> placements, Rotation r) {
    for (Placement& p : placements) {
        for (int q = 0; q < r.quarter_turns(); ++q) p.cell = {-p.cell.col, p.cell.row};
        p.rot = p.rot + r;
    }
    return placements;
}

/// Representative of a configuration up to global translation (and, for Type2, rotation):
/// sorted by tile, translated to the origin, smallest over the admissible global rotations.
inline std::vector<Placement> canonical_form(const std::vector<Placement>& placements, Variant variant) {
    std::optional<std::vector<Placement>> best;
    const int turns = variant == Variant::Type2 ? 4 : 1;
    for (int q = 0; q < turns; ++q) {
        auto cand = rotate_configuration(placements, Rotation(q));
        int min_r = std::numeric_limits<int>::max(), min_c = min_r;
        for (const Placement& p : cand) {
            min_r = std::min(min_r, p.cell.row);
            min_c = std::min(min_c, p.cell.col);
        }
        for (Placement& p : cand) p.cell = {p.cell.row - min_r, p.cell.col - min_c};
        std::sort(cand.begin(), cand.end(), [](const Placement& a, const Placement& b) { return a.tile < b.tile; });
        auto key = [](const std::vector<Placement>& v) {
            std::vector<std::array<int, 3>> k;
            for (const Placement& p : v) k.push_back({p.cell.row, p.cell.col, p.rot.quarter_turns()});
            return k;
        };
        if (!best || key(cand) < key(*best)) best = std::move(cand);
    }
    return best.value_or(std::vector<Placement>{});
}

// ---------------------------------------------------------------------------
// Kernel-growth crossover

/// First- and second-most compatible candidate of every edge (ties to the lowest edge index).
class MatrixIndex {
public:
    explicit MatrixIndex(const CompatibilityMatrix& m) : matrix_(&m) {
        if (m.semantics() != Semantics::Similarity) throw InputError("solver needs similarity scores");
        const auto edges = static_cast<std::size_t>(m.n_edges());
        best_[0].assign(edges, -1);
        best_[1].assign(edges, -1);
        for (int i = 0; i < m.n_edges(); ++i) {
            int first = -1, second = -1;
            const auto row = m.row(i);
            for (int j = 0; j < m.n_edges(); ++j) {
                if (!m.admissible(i, j)) continue;
                const float v = row[static_cast<std::size_t>(j)];
                if (first < 0 || v > row[static_cast<std::size_t>(first)]) {
                    second = first;
                    first = j;
                } else if (second < 0 || v > row[static_cast<std::size_t>(second)]) {
                    second = j;
                }
            }
            best_[0][static_cast<std::size_t>(i)] = first;
            best_[1][static_cast<std::size_t>(i)] = second;
        }
    }

    const CompatibilityMatrix& matrix() const noexcept { return *matrix_; }
    /// rank 0: most compatible edge, rank 1: second-most; -1 if none.
    int best(int edge, int rank) const noexcept { return best_[static_cast<std::size_t>(rank)][static_cast<std::size_t>(edge)]; }

private:
    const CompatibilityMatrix* matrix_;
    std::array<std::vector<int>, 2> best_;
};

/// Which of phases I-V may fire. Phase VI is always available.
using PhaseMask = std::array<bool, 5>;

inline constexpr PhaseMask kAllPhases{true, true, true, true, true};
inline constexpr PhaseMask kRandomOnly{false, false, false, false, false};

/// Placement log of one crossover. Phase 0 marks the seed.
struct CrossoverTrace {
    struct Step {
        int phase = 0;
        Placement placement;
        PhaseMask enabled{};
    };
    std::vector<Step> steps;
};

using PhaseCounts = std::array<std::size_t, kPhaseCount>;

/// Grows children by kernel growth. Holds reusable scratch space, so one instance
/// per thread; the matrix and index are shared read-only.
class KernelGrower {
public:
    KernelGrower(const MatrixIndex& index, SolverFrame frame)
        : index_(&index), m_(&index.matrix()), frame_(frame), n_(frame.n_tiles) {
        if (m_->n_tiles() != n_) throw InputError("matrix and puzzle disagree on tile count");
        if (m_->variant() != frame.variant) throw InputError("matrix variant does not match the puzzle variant");
        if (frame.dims_known() && *frame.rows * *frame.cols != n_) throw InputError("rows * cols must equal the tile count");
        lim_r_ = frame.max_rows();
        lim_c_ = frame.max_cols();
        grid_w_ = 2 * lim_c_ + 1;
        grid_.assign(static_cast<std::size_t>(2 * lim_r_ + 1) * static_cast<std::size_t>(grid_w_), -1);
        placed_.assign(static_cast<std::size_t>(n_), 0);
        tile_cell_.assign(static_cast<std::size_t>(n_), -1);
        tile_rot_.assign(static_cast<std::size_t>(n_), Rotation{});
        unplaced_pos_.assign(static_cast<std::size_t>(n_), 0);
    }

    const SolverFrame& frame() const noexcept { return frame_; }

    /// Crossover of two parents. Phases I-III are each disabled with their skip probability.
    Chromosome crossover(const Chromosome& a, const Chromosome& b, const GaConfig& cfg, Rng& rng,
                         PhaseCounts* counts = nullptr, CrossoverTrace* trace = nullptr) {
        const Chromosome& hi = a.fitness() >= b.fitness() ? a : b;
        const Chromosome& lo = &hi == &a ? b : a;
        return grow(&hi, &lo, kAllPhases, cfg, rng, counts, trace);
    }

    /// Random kernel growth (phase VI only).
    Chromosome random(Rng& rng, PhaseCounts* counts = nullptr) {
        return grow(nullptr, nullptr, kRandomOnly, GaConfig{}, rng, counts, nullptr);
    }

    /// Grows a full configuration. `allowed` caps which phases may ever fire;
    /// skip sampling further disables phases I-III.
    Chromosome grow(const Chromosome* hi, const Chromosome* lo, PhaseMask allowed, const GaConfig& cfg, Rng& rng,
                    PhaseCounts* counts, CrossoverTrace* trace) {
        hi_ = hi;
        lo_ = lo;
        if (hi) mark_good(*hi, cfg.score_threshold_floor, good_hi_);
        if (lo) mark_good(*lo, cfg.score_threshold_floor, good_lo_);

        std::bernoulli_distribution skip1(cfg.skip_p1), skip2(cfg.skip_p2), skip3(cfg.skip_p3);
        auto sample_mask = [&] {
            PhaseMask mask = allowed;
            // Always draw all three so the random stream does not depend on `allowed`.
            const bool s1 = skip1(rng), s2 = skip2(rng), s3 = skip3(rng);
            mask[0] = mask[0] && !s1;
            mask[1] = mask[1] && !s2;
            mask[2] = mask[2] && !s3;
            return mask;
        };
        PhaseMask enabled = hi ? sample_mask() : allowed;

        reset();
        {
            const int seed_tile = std::uniform_int_distribution<int>(0, n_ - 1)(rng);
            const Rotation seed_rot = random_rotation(rng);
            place(cell_index(0, 0), seed_tile, seed_rot);
            if (trace) trace->steps.push_back({0, placement_of(seed_tile), enabled});
        }

        while (placed_count_ < n_) {
            if (cfg.skip_per_step && hi) enabled = sample_mask();
            int phase = 0;
            for (int k = 0; k < 3 && phase == 0; ++k)
                if (enabled[static_cast<std::size_t>(k)] && take_inherited(k, rng)) phase = k + 1;
            for (int k = 0; k < 2 && phase == 0; ++k)
                if (enabled[static_cast<std::size_t>(3 + k)] && take_ranked(k)) phase = 4 + k;
            if (phase == 0) {
                place_randomly(rng);
                phase = 6;
            }
            if (counts) ++(*counts)[static_cast<std::size_t>(phase - 1)];
            if (trace) trace->steps.push_back({phase, placement_of(last_tile_), enabled});
        }

        std::vector<Placement> out;
        out.reserve(static_cast<std::size_t>(n_));
        for (int t = 0; t < n_; ++t) out.push_back(placement_of(t));
        return Chromosome(std::move(out), *m_);
    }

private:
    struct Candidate {
        int cell;
        int tile;
        Rotation rot;
    };
    struct Ranked {
        float score;
        int edge;
        int cell;
        int tile;
        Rotation rot;
    };
    // Max-heap order: higher score first, then lower (tile, side), then lower cell.
    static bool heap_less(const Ranked& a, const Ranked& b) noexcept {
        if (a.score != b.score) return a.score < b.score;
        if (a.edge != b.edge) return a.edge > b.edge;
        return a.cell > b.cell;
    }

    Rotation random_rotation(Rng& rng) const {
        return frame_.variant == Variant::Type2 ? Rotation(std::uniform_int_distribution<int>(0, 3)(rng)) : Rotation{};
    }

    void mark_good(const Chromosome& parent, double floor, std::vector<char>& good) const {
        const double threshold = std::max(floor, parent.mean_boundary_compat());
        good.assign(static_cast<std::size_t>(n_), 0);
        for (int t = 0; t < n_; ++t)
            good[static_cast<std::size_t>(t)] = parent.degree(t) > 0 && parent.piece_score(t) > threshold;
    }

    int cell_index(int row, int col) const noexcept { return (row + lim_r_) * grid_w_ + (col + lim_c_); }
    Cell cell_of(int idx) const noexcept { return {idx / grid_w_ - lim_r_, idx % grid_w_ - lim_c_}; }

    Placement placement_of(int tile) const {
        return {cell_of(tile_cell_[static_cast<std::size_t>(tile)]), tile, tile_rot_[static_cast<std::size_t>(tile)]};
    }

    /// Whether the bounding box would still fit the frame with `c` occupied.
    bool fits(Cell c) const noexcept {
        if (placed_count_ == 0) return true;
        const int h = std::max(max_r_, c.row) - std::min(min_r_, c.row) + 1;
        const int w = std::max(max_c_, c.col) - std::min(min_c_, c.col) + 1;
        return h <= lim_r_ && w <= lim_c_;
    }

    bool open(int cell) const noexcept { return grid_[static_cast<std::size_t>(cell)] == -1 && fits(cell_of(cell)); }
    bool usable(const Candidate& c) const noexcept { return !placed_[static_cast<std::size_t>(c.tile)] && open(c.cell); }

    void reset() {
        for (int t = 0; t < n_; ++t) {
            const int cell = tile_cell_[static_cast<std::size_t>(t)];
            if (cell >= 0) grid_[static_cast<std::size_t>(cell)] = -1;
            tile_cell_[static_cast<std::size_t>(t)] = -1;
            placed_[static_cast<std::size_t>(t)] = 0;
        }
        unplaced_.resize(static_cast<std::size_t>(n_));
        for (int t = 0; t < n_; ++t) {
            unplaced_[static_cast<std::size_t>(t)] = t;
            unplaced_pos_[static_cast<std::size_t>(t)] = t;
        }
        for (auto& l : inherited_) l.clear();
        for (auto& h : ranked_) h.clear();
        frontier_.clear();
        placed_count_ = 0;
    }

    void place(int cell, int tile, Rotation rot) {
        const Cell c = cell_of(cell);
        if (placed_count_ == 0) {
            min_r_ = max_r_ = c.row;
            min_c_ = max_c_ = c.col;
        } else {
            min_r_ = std::min(min_r_, c.row);
            max_r_ = std::max(max_r_, c.row);
            min_c_ = std::min(min_c_, c.col);
            max_c_ = std::max(max_c_, c.col);
        }
        grid_[static_cast<std::size_t>(cell)] = tile;
        tile_cell_[static_cast<std::size_t>(tile)] = cell;
        tile_rot_[static_cast<std::size_t>(tile)] = rot;
        placed_[static_cast<std::size_t>(tile)] = 1;
        ++placed_count_;
        last_tile_ = tile;

        const int pos = unplaced_pos_[static_cast<std::size_t>(tile)];
        const int moved = unplaced_.back();
        unplaced_[static_cast<std::size_t>(pos)] = moved;
        unplaced_pos_[static_cast<std::size_t>(moved)] = pos;
        unplaced_.pop_back();

        for (const Side dir : kAllSides) {
            const Cell nc = step(c, dir);
            const int ni = cell_index(nc.row, nc.col);
            if (!open(ni)) continue; // an unfit cell never becomes fit again
            frontier_.push_back(ni);

            const Side own = side_facing(dir, rot);
            if (hi_) {
                const Neighbor nh = hi_->neighbor(tile, own);
                const Neighbor nl = lo_->neighbor(tile, own);
                if (nh.tile >= 0 && !placed_[static_cast<std::size_t>(nh.tile)]) {
                    if (good_hi_[static_cast<std::size_t>(tile)] && good_hi_[static_cast<std::size_t>(nh.tile)])
                        inherited_[0].push_back({ni, nh.tile, rot + nh.relative});
                    if (nh == nl) inherited_[2].push_back({ni, nh.tile, rot + nh.relative});
                }
                if (nl.tile >= 0 && !placed_[static_cast<std::size_t>(nl.tile)] &&
                    good_lo_[static_cast<std::size_t>(tile)] && good_lo_[static_cast<std::size_t>(nl.tile)])
                    inherited_[1].push_back({ni, nl.tile, rot + nl.relative});
            }
            const int edge = 4 * tile + index(own);
            for (int k = 0; k < 2; ++k) {
                const int best = index_->best(edge, k);
                if (best < 0 || placed_[static_cast<std::size_t>(best / 4)]) continue;
                const auto best_side = static_cast<Side>(best % 4);
                ranked_[static_cast<std::size_t>(k)].push_back(
                    {(*m_)(edge, best), best, ni, best / 4, rotation_between(best_side, opposite(dir))});
                std::push_heap(ranked_[static_cast<std::size_t>(k)].begin(), ranked_[static_cast<std::size_t>(k)].end(),
                               heap_less);
            }
        }
    }

    // Phases I-III: a uniformly random still-usable candidate.
    bool take_inherited(int k, Rng& rng) {
        auto& list = inherited_[static_cast<std::size_t>(k)];
        while (!list.empty()) {
            const auto at = std::uniform_int_distribution<std::size_t>(0, list.size() - 1)(rng);
            const Candidate c = list[at];
            list[at] = list.back();
            list.pop_back();
            if (usable(c)) {
                place(c.cell, c.tile, c.rot);
                return true;
            }
        }
        return false;
    }

    // Phases IV-V: the globally best-scoring usable candidate.
    bool take_ranked(int k) {
        auto& heap = ranked_[static_cast<std::size_t>(k)];
        while (!heap.empty()) {
            std::pop_heap(heap.begin(), heap.end(), heap_less);
            const Ranked r = heap.back();
            heap.pop_back();
            if (usable({r.cell, r.tile, r.rot})) {
                place(r.cell, r.tile, r.rot);
                return true;
            }
        }
        return false;
    }

    // Phase VI.
    void place_randomly(Rng& rng) {
        const int tile = unplaced_[std::uniform_int_distribution<std::size_t>(0, unplaced_.size() - 1)(rng)];
        while (true) {
            // A connected partial kernel inside a feasible frame always has an open neighbour cell.
            const auto at = std::uniform_int_distribution<std::size_t>(0, frontier_.size() - 1)(rng);
            const int cell = frontier_[at];
            frontier_[at] = frontier_.back();
            frontier_.pop_back();
            if (open(cell)) {
                place(cell, tile, random_rotation(rng));
                return;
            }
        }
    }

    const MatrixIndex* index_;
    const CompatibilityMatrix* m_;
    SolverFrame frame_;
    int n_;
    int lim_r_ = 0, lim_c_ = 0, grid_w_ = 0;

    std::vector<int> grid_;
    std::vector<char> placed_;
    std::vector<int> tile_cell_;
    std::vector<Rotation> tile_rot_;
    std::vector<int> unplaced_;
    std::vector<int> unplaced_pos_;
    int placed_count_ = 0;
    int last_tile_ = -1;
    int min_r_ = 0, max_r_ = 0, min_c_ = 0, max_c_ = 0;

    const Chromosome* hi_ = nullptr;
    const Chromosome* lo_ = nullptr;
    std::vector<char> good_hi_, good_lo_;
    std::array<std::vector<Candidate>, 3> inherited_;
    std::array<std::vector<Ranked>, 2> ranked_;
    std::vector<int> frontier_;
};

/// One-off crossover; builds its own index and scratch space.
inline Chromosome crossover(const Chromosome& parent_a, const Chromosome& parent_b, const CompatibilityMatrix& m,
                            const SolverFrame& frame, const GaConfig& cfg, Rng& rng, CrossoverTrace* trace = nullptr) {
    const MatrixIndex index(m);
    KernelGrower grower(index, frame);
    return grower.crossover(parent_a, parent_b, cfg, rng, nullptr, trace);
}

// ---------------------------------------------------------------------------
// Selection

/// Fitness-proportional sampling. Falls back to uniform when every fitness is 0.
class RouletteWheel {
public:
    explicit RouletteWheel(std::span<const double> fitness) {
        if (fitness.empty()) throw std::logic_error("roulette over an empty population");
        cumulative_.reserve(fitness.size());
        double total = 0.0;
        for (const double f : fitness) {
            if (!(f >= 0.0)) throw InputError("roulette selection needs non-negative fitness");
            total += f;
            cumulative_.push_back(total);
        }
    }

    std::size_t spin(Rng& rng) const {
        const double total = cumulative_.back();
        if (total <= 0.0) return std::uniform_int_distribution<std::size_t>(0, cumulative_.size() - 1)(rng);
        const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

private:
    std::vector<double> cumulative_;
};

inline const Chromosome& roulette_select(std::span<const Chromosome> population, Rng& rng) {
    if (population.empty()) throw std::logic_error("roulette over an empty population");
    std::vector<double> f;
    f.reserve(population.size());
    for (const Chromosome& c : population) f.push_back(c.fitness());
    return population[RouletteWheel(f).spin(rng)];
}

// ---------------------------------------------------------------------------
// Generational loop

struct GenerationStats {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    PhaseCounts phase_placements{};
};

struct RunResult {
    Chromosome best;
    std::vector<GenerationStats> log; // entry 0 is the initial population
    std::uint64_t seed = 0;
};

/// Called after every generation (0 = initial population) with the whole population.
using GenerationObserver = std::function<void(int run, int generation, std::span<const Chromosome> population)>;

namespace detail {
inline GenerationStats summarize(int generation, std::span<const Chromosome> pop, const PhaseCounts& counts) {
    GenerationStats s{generation, -std::numeric_limits<double>::infinity(), 0.0, counts};
    for (const Chromosome& c : pop) {
        s.best_fitness = std::max(s.best_fitness, c.fitness());
        s.mean_fitness += c.fitness();
    }
    s.mean_fitness /= static_cast<double>(pop.size());
    return s;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

/// Seed of run `run` derived from the master seed.
inline std::uint64_t run_seed(std::uint64_t master, int run) noexcept {
    return detail::splitmix64(master ^ detail::splitmix64(static_cast<std::uint64_t>(run) + 1));
}

/// One GA run: random initial population, then elitism plus roulette-selected crossover children.
inline RunResult run_ga(const MatrixIndex& index, const SolverFrame& frame, const GaConfig& cfg, std::uint64_t seed,
                        const GenerationObserver& observer = {}, int run_id = 0) {
    cfg.validate();
    const CompatibilityMatrix& m = index.matrix();
    if (!m.normalized()) throw InputError("solver needs a normalized matrix");

    Rng rng(seed);
    KernelGrower grower(index, frame);
    const auto pop_size = static_cast<std::size_t>(cfg.population_size);

    std::vector<Chromosome> population;
    population.reserve(pop_size);
    PhaseCounts counts{};
    for (std::size_t i = 0; i < pop_size; ++i) population.push_back(grower.random(rng, &counts));

    RunResult result;
    result.seed = seed;
    auto best_of = [](const std::vector<Chromosome>& pop) {
        return std::max_element(pop.begin(), pop.end(),
                                [](const Chromosome& a, const Chromosome& b) { return a.fitness() < b.fitness(); });
    };
    result.best = *best_of(population);
    result.log.push_back(detail::summarize(0, population, counts));
    if (observer) observer(run_id, 0, population);

    std::vector<Chromosome> next;
    std::vector<double> fit(pop_size);
    std::vector<std::size_t> order(pop_size);
    for (int gen = 1; gen <= cfg.generations; ++gen) {
        for (std::size_t i = 0; i < pop_size; ++i) fit[i] = population[i].fitness();
        const RouletteWheel wheel(fit);

        for (std::size_t i = 0; i < pop_size; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
        next.clear();
        for (int e = 0; e < cfg.elite_count; ++e) next.push_back(population[order[static_cast<std::size_t>(e)]]);

        counts = {};
        while (next.size() < pop_size) {
            const Chromosome& a = population[wheel.spin(rng)];
            const Chromosome& b = population[wheel.spin(rng)];
            next.push_back(grower.crossover(a, b, cfg, rng, &counts));
        }
        population.swap(next);

        const auto it = best_of(population);
        if (it->fitness() > result.best.fitness()) result.best = *it;
        result.log.push_back(detail::summarize(gen, population, counts));
        if (observer) observer(run_id, gen, population);
    }
    return result;
}

struct SolveResult {
    std::vector<RunResult> runs;
    std::size_t best_run = 0;

    const RunResult& best() const { return runs.at(best_run); }
};

/// cfg.runs independent runs (concurrently when cfg.threads allows); the best by fitness wins,
/// ties going to the lowest run index. Deterministic for a fixed cfg.seed.
/// The observer may be called from several threads at once.
inline SolveResult solve(const CompatibilityMatrix& m, const SolverFrame& frame, const GaConfig& cfg,
                         const GenerationObserver& observer = {}) {
    cfg.validate();
    const MatrixIndex index(m);
    SolveResult out;
    out.runs.resize(static_cast<std::size_t>(cfg.runs));
    parallel_for(out.runs.size(), cfg.threads, [&](std::size_t r) {
        out.runs[r] = run_ga(index, frame, cfg, run_seed(cfg.seed, static_cast<int>(r)), observer, static_cast<int>(r));
    });
    for (std::size_t r = 1; r < out.runs.size(); ++r)
        if (out.runs[r].best.fitness() > out.runs[out.best_run].best.fitness()) out.best_run = r;
    return out;
}

} // namespace tilepanel

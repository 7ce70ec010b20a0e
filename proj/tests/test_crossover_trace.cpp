#include <gtest/gtest.h>

#include <map>

#include "test_support.hpp"

using namespace tilepanel;

namespace {

struct Kernel {
    std::map<Cell, std::pair<int, Rotation>> cells;
    std::vector<char> placed;
};

struct Move {
    Cell cell;
    int tile;
    Rotation rot;
    float score = 0;
};

bool fits(const Kernel& k, Cell c, const SolverFrame& f) {
    int r0 = c.row, r1 = c.row, c0 = c.col, c1 = c.col;
    for (const auto& [cell, _] : k.cells) {
        r0 = std::min(r0, cell.row), r1 = std::max(r1, cell.row);
        c0 = std::min(c0, cell.col), c1 = std::max(c1, cell.col);
    }
    return r1 - r0 + 1 <= f.max_rows() && c1 - c0 + 1 <= f.max_cols();
}

std::vector<char> good_tiles(const Chromosome& p, double floor) {
    std::vector<char> g(static_cast<std::size_t>(p.n_tiles()));
    const double t = std::max(floor, p.mean_boundary_compat());
    for (int i = 0; i < p.n_tiles(); ++i) g[static_cast<std::size_t>(i)] = p.degree(i) > 0 && p.piece_score(i) > t;
    return g;
}

// Every move phase `phase` could make from kernel `k`, enumerated from scratch.
std::vector<Move> moves(int phase, const Kernel& k, const Chromosome& hi, const Chromosome& lo,
                        const std::vector<char>& good_hi, const std::vector<char>& good_lo,
                        const CompatibilityMatrix& m, const MatrixIndex& idx, const SolverFrame& f) {
    std::vector<Move> out;
    for (const auto& [cell, tr] : k.cells) {
        const auto [tile, rot] = tr;
        for (Side dir : kAllSides) {
            const Cell nc = step(cell, dir);
            if (k.cells.count(nc) || !fits(k, nc, f)) continue;
            const Side own = side_facing(dir, rot);
            if (phase <= 3) {
                const Neighbor nh = hi.neighbor(tile, own), nl = lo.neighbor(tile, own);
                const Neighbor pick = phase == 2 ? nl : nh;
                if (pick.tile < 0 || k.placed[static_cast<std::size_t>(pick.tile)]) continue;
                if (phase == 1 && !(good_hi[static_cast<std::size_t>(tile)] && good_hi[static_cast<std::size_t>(pick.tile)])) continue;
                if (phase == 2 && !(good_lo[static_cast<std::size_t>(tile)] && good_lo[static_cast<std::size_t>(pick.tile)])) continue;
                if (phase == 3 && !(nh == nl)) continue;
                out.push_back({nc, pick.tile, rot + pick.relative});
            } else {
                const int edge = 4 * tile + index(own);
                const int best = idx.best(edge, phase - 4);
                if (best < 0 || k.placed[static_cast<std::size_t>(best / 4)]) continue;
                out.push_back({nc, best / 4, rotation_between(static_cast<Side>(best % 4), opposite(dir)), m(edge, best)});
            }
        }
    }
    return out;
}

void replay(std::array<int, 7>& seen, const CompatibilityMatrix& m, const SolverFrame& f, const Chromosome& a, const Chromosome& b,
            const GaConfig& cfg, std::uint64_t seed) {
    const MatrixIndex index(m);
    KernelGrower g(index, f);
    Rng rng(seed);
    CrossoverTrace trace;
    const Chromosome child = g.crossover(a, b, cfg, rng, nullptr, &trace);
    const Chromosome& hi = a.fitness() >= b.fitness() ? a : b;
    const Chromosome& lo = &hi == &a ? b : a;
    const auto good_hi = good_tiles(hi, cfg.score_threshold_floor), good_lo = good_tiles(lo, cfg.score_threshold_floor);

    ASSERT_EQ(trace.steps.size(), static_cast<std::size_t>(m.n_tiles()));
    ASSERT_EQ(trace.steps[0].phase, 0);
    Kernel k;
    k.placed.assign(static_cast<std::size_t>(m.n_tiles()), 0);
    auto put = [&](const Placement& p) {
        k.cells[p.cell] = {p.tile, p.rot};
        k.placed[static_cast<std::size_t>(p.tile)] = 1;
    };
    put(trace.steps[0].placement);
    for (std::size_t s = 1; s < trace.steps.size(); ++s) {
        const auto& st = trace.steps[s];
        ++seen[static_cast<std::size_t>(st.phase)];
        ASSERT_GE(st.phase, 1);
        // No enabled lower phase had a move.
        for (int p = 1; p < st.phase; ++p)
            if (p == 6 || st.enabled[static_cast<std::size_t>(p - 1)]) {
                ASSERT_TRUE(moves(p, k, hi, lo, good_hi, good_lo, m, index, f).empty()) << "phase " << p << " skipped";
            }
        if (st.phase < 6) {
            ASSERT_TRUE(st.enabled[static_cast<std::size_t>(st.phase - 1)]);
        }
        const Placement& pl = st.placement;
        ASSERT_FALSE(k.placed[static_cast<std::size_t>(pl.tile)]);
        ASSERT_FALSE(k.cells.count(pl.cell));
        ASSERT_TRUE(fits(k, pl.cell, f));
        if (st.phase < 6) {
            const auto legal = moves(st.phase, k, hi, lo, good_hi, good_lo, m, index, f);
            bool found = false;
            float top = -1;
            for (const Move& mv : legal) {
                found = found || (mv.cell == pl.cell && mv.tile == pl.tile && mv.rot == pl.rot);
                top = std::max(top, mv.score);
            }
            ASSERT_TRUE(found) << "phase " << st.phase << " made an unlisted move";
            if (st.phase >= 4) {
                float placed_score = -1;
                for (const Move& mv : legal)
                    if (mv.cell == pl.cell && mv.tile == pl.tile && mv.rot == pl.rot) placed_score = std::max(placed_score, mv.score);
                ASSERT_EQ(placed_score, top) << "phase " << st.phase << " did not take the best score";
            }
        } else {
            bool adjacent = false;
            for (Side d : kAllSides) adjacent = adjacent || k.cells.count(step(pl.cell, d));
            ASSERT_TRUE(adjacent);
            if (f.variant == Variant::Type1) {
                ASSERT_EQ(pl.rot, Rotation{});
            }
        }
        put(pl);
    }
    EXPECT_FALSE(validity_error(child, f));
}

} // namespace

TEST(CrossoverTrace, PhasesFireInOrderAndRankedPhasesTakeTheBest) {
    std::array<int, 7> seen{};
    for (std::uint64_t s = 0; s < 40; ++s) {
        const Variant v = s % 2 ? Variant::Type2 : Variant::Type1;
        const int rows = 2 + static_cast<int>(s % 3), cols = 2 + static_cast<int>((s / 3) % 3);
        const int n = rows * cols;
        const bool known = s % 4 < 2;
        // A blend of the oracle and noise so every phase gets exercised.
        const auto b = scramble(synthetic_bundle(SyntheticStyle::Noise, rows, cols, s, 8), v, s);
        auto m = oracle_matrix(b, v);
        const auto noise = fixtures::random_matrix(n, v, s + 99);
        m.for_each_admissible([&](int i, int j) { m.set(i, j, 0.6f * m(i, j) + 0.4f * noise(i, j)); });
        const SolverFrame f{n, v, known ? std::optional(rows) : std::nullopt, known ? std::optional(cols) : std::nullopt};
        const MatrixIndex index(m);
        KernelGrower g(index, f);
        Rng rng(s);
        const Chromosome gt(*b.ground_truth, m);
        const Chromosome r1 = g.random(rng), r2 = g.random(rng);
        GaConfig cfg;
        cfg.skip_per_step = s % 5 == 0;
        for (std::uint64_t t = 0; t < 10; ++t) {
            SCOPED_TRACE("seed " + std::to_string(s) + "/" + std::to_string(t));
            replay(seen, m, f, gt, r1, cfg, t);
            replay(seen, m, f, r1, r2, cfg, t + 100);
            replay(seen, m, f, gt, gt, cfg, t + 200);
        }
    }
    for (int p = 1; p <= 6; ++p) EXPECT_GT(seen[static_cast<std::size_t>(p)], 0) << "phase " << p << " never fired";
}

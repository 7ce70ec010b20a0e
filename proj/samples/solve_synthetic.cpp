// Scrambles a small synthetic panel, scores it with MGC and solves it.
#include <cstdio>

#include "tilepanel/tilepanel.hpp"

using namespace tilepanel;

int main() {
    const Variant v = Variant::Type2;
    const PuzzleBundle puzzle = scramble(synthetic_bundle(SyntheticStyle::Gradient, 5, 5, 42), v, 7);

    const CompatibilityMatrix m = symmetrize(normalize_minmax(to_similarity(build_matrix(puzzle, MeasureKind::MGC, v))));
    const RankHistogram h = rank_histogram(m, puzzle);
    std::printf("MGC rank1: %.1f%%\n", h.percent(1));

    GaConfig cfg;
    cfg.generations = 100;
    cfg.runs = 2;
    const SolveResult r = solve(m, frame_for(puzzle, v, false), cfg);
    const AccuracyReport acc = neighbor_accuracy(r.best().best.placements(), puzzle, v, false);
    std::printf("best fitness %.3f, neighbor accuracy %.3f (%zu/%zu)\n", r.best().best.fitness(),
                acc.neighbor_accuracy, acc.correct, acc.total);
}

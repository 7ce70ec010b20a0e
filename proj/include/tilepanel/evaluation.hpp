#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tilepanel/compat.hpp"
#include "tilepanel/error.hpp"
#include "tilepanel/geometry.hpp"
#include "tilepanel/puzzle.hpp"

namespace tilepanel {

/// A pair of edges that touch in the ground-truth assembly.
struct Abutment {
    EdgeRef first;  // edge of the left / upper tile
    EdgeRef second; // edge of the right / lower tile
};

/// Every ground-truth adjacency once, with sides resolved through the ground-truth rotations.
/// Type1 requires an unrotated ground truth.
inline std::vector<Abutment> ground_truth_abutments(const PuzzleBundle& bundle, Variant variant) {
    validate(bundle);
    if (!bundle.ground_truth) throw InputError("bundle has no ground truth");
    const int rows = *bundle.rows;
    const int cols = *bundle.cols;
    std::vector<const Placement*> grid(static_cast<std::size_t>(rows * cols));
    for (const Placement& p : *bundle.ground_truth) {
        if (variant == Variant::Type1 && p.rot.quarter_turns() != 0)
            throw InputError("Type1 evaluation needs unrotated ground truth");
        grid[static_cast<std::size_t>(p.cell.row * cols + p.cell.col)] = &p;
    }
    std::vector<Abutment> out;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const Placement& a = *grid[static_cast<std::size_t>(r * cols + c)];
            if (c + 1 < cols) {
                const Placement& b = *grid[static_cast<std::size_t>(r * cols + c + 1)];
                out.push_back({{a.tile, side_facing(Side::Right, a.rot)}, {b.tile, side_facing(Side::Left, b.rot)}});
            }
            if (r + 1 < rows) {
                const Placement& b = *grid[static_cast<std::size_t>((r + 1) * cols + c)];
                out.push_back({{a.tile, side_facing(Side::Bottom, a.rot)}, {b.tile, side_facing(Side::Top, b.rot)}});
            }
        }
    return out;
}

/// Score 1 for every ground-truth abutment (both directions), 0 for every other admissible pair.
inline CompatibilityMatrix oracle_matrix(const PuzzleBundle& bundle, Variant variant) {
    const auto truth = ground_truth_abutments(bundle, variant);
    CompatibilityMatrix m(bundle.size(), variant, Semantics::Similarity);
    m.for_each_admissible([&](int i, int j) { m.set(i, j, 0.0f); });
    for (const Abutment& a : truth) {
        m.set(a.first.index(), a.second.index(), 1.0f);
        m.set(a.second.index(), a.first.index(), 1.0f);
    }
    m.set_normalized(true);
    m.set_symmetric(true);
    return m;
}

struct RankHistogram {
    std::vector<std::size_t> counts; // counts[k] = relations whose true neighbour ranked k+1
    std::size_t total = 0;

    double fraction(std::size_t rank) const {
        if (rank < 1 || rank > counts.size() || total == 0) return 0.0;
        return static_cast<double>(counts[rank - 1]) / static_cast<double>(total);
    }
    double percent(std::size_t rank) const { return 100.0 * fraction(rank); }

    friend bool operator==(const RankHistogram&, const RankHistogram&) = default;
};

namespace detail {
inline bool better(Semantics s, float a, float b) noexcept { return s == Semantics::Similarity ? a > b : a < b; }
} // namespace detail

/// 1-based rank of the true neighbour in the anchor's candidate list. Candidates scoring
/// equal to the true neighbour rank ahead of it, so ties are counted pessimistically.
inline std::size_t rank_of(const CompatibilityMatrix& m, int anchor, int truth) {
    const float s = m(anchor, truth);
    std::size_t rank = 0;
    const auto row = m.row(anchor);
    for (int j = 0; j < m.n_edges(); ++j) {
        if (!m.admissible(anchor, j)) continue;
        if (!detail::better(m.semantics(), s, row[static_cast<std::size_t>(j)])) ++rank;
    }
    return rank;
}

/// rank_alpha histogram over every directed ground-truth abutment. Works with either semantics.
inline RankHistogram rank_histogram(const CompatibilityMatrix& m, const PuzzleBundle& bundle) {
    if (m.n_tiles() != bundle.size()) throw InputError("matrix and bundle disagree on tile count");
    const auto truth = ground_truth_abutments(bundle, m.variant());
    const std::size_t n = static_cast<std::size_t>(m.n_tiles());
    RankHistogram h;
    h.counts.assign(m.variant() == Variant::Type1 ? n - 1 : 4 * (n - 1), 0);
    for (const Abutment& a : truth) {
        for (const auto& [anchor, neighbour] : {std::pair{a.first, a.second}, std::pair{a.second, a.first}}) {
            ++h.counts[rank_of(m, anchor.index(), neighbour.index()) - 1];
            ++h.total;
        }
    }
    return h;
}

/// Edge `e`'s strictly best candidate, or -1 when the best score is shared.
inline int unique_best(const CompatibilityMatrix& m, int e) {
    int best = -1;
    bool tied = false;
    for (int j = 0; j < m.n_edges(); ++j) {
        if (!m.admissible(e, j)) continue;
        if (best < 0 || detail::better(m.semantics(), m(e, j), m(e, best))) {
            best = j;
            tied = false;
        } else if (m(e, j) == m(e, best)) {
            tied = true;
        }
    }
    return tied ? -1 : best;
}

/// Fraction of best-buddy pairs that are true abutments; nullopt when no pair exists.
inline std::optional<double> best_buddy_precision(const CompatibilityMatrix& m, const PuzzleBundle& bundle) {
    if (m.n_tiles() != bundle.size()) throw InputError("matrix and bundle disagree on tile count");
    const auto truth = ground_truth_abutments(bundle, m.variant());
    std::vector<int> true_partner(static_cast<std::size_t>(m.n_edges()), -1);
    for (const Abutment& a : truth) {
        true_partner[static_cast<std::size_t>(a.first.index())] = a.second.index();
        true_partner[static_cast<std::size_t>(a.second.index())] = a.first.index();
    }
    std::vector<int> best(static_cast<std::size_t>(m.n_edges()));
    for (int e = 0; e < m.n_edges(); ++e) best[static_cast<std::size_t>(e)] = unique_best(m, e);

    std::size_t pairs = 0, correct = 0;
    for (int i = 0; i < m.n_edges(); ++i) {
        const int j = best[static_cast<std::size_t>(i)];
        if (j <= i || best[static_cast<std::size_t>(j)] != i) continue;
        ++pairs;
        if (true_partner[static_cast<std::size_t>(i)] == j) ++correct;
    }
    if (pairs == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(pairs);
}

struct AccuracyReport {
    double neighbor_accuracy = 0.0;
    bool perfect = false;
    std::size_t correct = 0;
    std::size_t total = 0;
    Variant variant = Variant::Type1;
    bool dims_known = false;
};

/// Neighbour-comparison accuracy: share of ground-truth abutments that the solution realises
/// with the same relative direction and relative orientation. Each check is made in the
/// first tile's own frame, so the score does not change under global translation or
/// quarter-turn rotation of the solution.
inline AccuracyReport neighbor_accuracy(const std::vector<Placement>& solution, const PuzzleBundle& bundle,
                                        Variant variant, bool dims_known) {
    const int n = bundle.size();
    if (static_cast<int>(solution.size()) != n) throw InputError("solution does not place every tile");
    std::vector<const Placement*> by_tile(static_cast<std::size_t>(n), nullptr);
    std::unordered_map<Cell, int> occupant;
    for (const Placement& p : solution) {
        if (p.tile < 0 || p.tile >= n || by_tile[static_cast<std::size_t>(p.tile)])
            throw InputError("solution places a tile twice or names an unknown tile");
        if (!occupant.emplace(p.cell, p.tile).second) throw InputError("solution puts two tiles in one cell");
        by_tile[static_cast<std::size_t>(p.tile)] = &p;
    }

    AccuracyReport rep;
    rep.variant = variant;
    rep.dims_known = dims_known;
    for (const Abutment& a : ground_truth_abutments(bundle, Variant::Type2)) {
        ++rep.total;
        const Placement& pa = *by_tile[static_cast<std::size_t>(a.first.tile)];
        const Side dir = rotate(a.first.side, pa.rot);
        const auto it = occupant.find(step(pa.cell, dir));
        if (it == occupant.end() || it->second != a.second.tile) continue;
        const Placement& pb = *by_tile[static_cast<std::size_t>(a.second.tile)];
        if (rotate(a.second.side, pb.rot) == opposite(dir)) ++rep.correct;
    }
    rep.neighbor_accuracy = rep.total == 0 ? 1.0 : static_cast<double>(rep.correct) / static_cast<double>(rep.total);
    rep.perfect = rep.correct == rep.total;
    return rep;
}

// ---------------------------------------------------------------------------
// Report emitters.

inline std::string histogram_csv(const RankHistogram& h) {
    std::ostringstream out;
    out << "rank,count,percent\n";
    char buf[64];
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.1f", h.percent(k + 1));
        out << (k + 1) << ',' << h.counts[k] << ',' << buf << '\n';
    }
    return out.str();
}

/// Plot-ready series: rank index -> percentage.
inline nlohmann::json histogram_json(const RankHistogram& h) {
    nlohmann::json j;
    j["total"] = h.total;
    j["rank"] = nlohmann::json::array();
    j["percent"] = nlohmann::json::array();
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        j["rank"].push_back(k + 1);
        j["percent"].push_back(h.percent(k + 1));
    }
    return j;
}

} // namespace tilepanel

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tilepanel/error.hpp"
#include "tilepanel/geometry.hpp"
#include "tilepanel/image.hpp"

namespace tilepanel {

/// Type1: piece orientation known. Type2: orientation unknown. Locations are unknown in both.
enum class Variant : std::uint8_t { Type1 = 1, Type2 = 2 };

constexpr int to_int(Variant v) noexcept { return static_cast<int>(v); }

inline Variant variant_from_int(int v) {
    if (v == 1) return Variant::Type1;
    if (v == 2) return Variant::Type2;
    throw InputError("puzzle type must be 1 or 2, got " + std::to_string(v));
}

inline constexpr int kCanonicalTilePx = 50;

struct Tile {
    int id = 0;
    Image pixels;

    friend bool operator==(const Tile&, const Tile&) = default;
};

/// Tiles plus optional grid dimensions and ground truth.
///
/// A ground-truth placement {tile, cell, rot} means: turning the stored pixels
/// of `tile` counterclockwise by `rot` and drawing them at `cell` reproduces
/// the original image.
struct PuzzleBundle {
    std::vector<Tile> tiles;
    std::optional<int> rows;
    std::optional<int> cols;
    std::optional<std::vector<Placement>> ground_truth;
    std::string provenance;

    int size() const noexcept { return static_cast<int>(tiles.size()); }
    int tile_px() const noexcept { return tiles.empty() ? 0 : tiles.front().pixels.height(); }
    bool dims_known() const noexcept { return rows.has_value() && cols.has_value(); }
};

/// Throws InputError unless every bundle invariant holds.
inline void validate(const PuzzleBundle& bundle) {
    const int n = bundle.size();
    if (n == 0) throw InputError("bundle has no tiles");
    const int px = bundle.tile_px();
    for (int i = 0; i < n; ++i) {
        const Tile& t = bundle.tiles[static_cast<std::size_t>(i)];
        if (t.id != i) throw InputError("tile ids must be contiguous from 0");
        if (t.pixels.empty() || t.pixels.height() != t.pixels.width())
            throw InputError("tile " + std::to_string(i) + " is not a non-empty square");
        if (t.pixels.height() != px) throw InputError("tiles differ in size");
    }
    if (bundle.rows.has_value() != bundle.cols.has_value())
        throw InputError("rows and cols must be given together");
    if (bundle.dims_known()) {
        if (*bundle.rows <= 0 || *bundle.cols <= 0) throw InputError("rows and cols must be positive");
        if (*bundle.rows * *bundle.cols != n) throw InputError("rows * cols must equal the tile count");
    }
    if (bundle.ground_truth) {
        if (!bundle.dims_known()) throw InputError("ground truth requires rows and cols");
        const int rows = *bundle.rows;
        const int cols = *bundle.cols;
        if (static_cast<int>(bundle.ground_truth->size()) != n)
            throw InputError("ground truth must place every tile exactly once");
        std::vector<char> tile_seen(static_cast<std::size_t>(n), 0);
        std::vector<char> cell_seen(static_cast<std::size_t>(n), 0);
        for (const Placement& p : *bundle.ground_truth) {
            if (p.tile < 0 || p.tile >= n || p.cell.row < 0 || p.cell.row >= rows || p.cell.col < 0 ||
                p.cell.col >= cols)
                throw InputError("ground truth placement out of range");
            char& ts = tile_seen[static_cast<std::size_t>(p.tile)];
            char& cs = cell_seen[static_cast<std::size_t>(p.cell.row * cols + p.cell.col)];
            if (ts || cs) throw InputError("ground truth is not a bijection between cells and tiles");
            ts = cs = 1;
        }
    }
}

/// Ground truth indexed by tile id.
inline std::vector<Placement> ground_truth_by_tile(const PuzzleBundle& bundle) {
    if (!bundle.ground_truth) throw InputError("bundle has no ground truth");
    std::vector<Placement> out(bundle.tiles.size());
    for (const Placement& p : *bundle.ground_truth) out[static_cast<std::size_t>(p.tile)] = p;
    return out;
}

namespace detail {
// Cell boundaries from rounded cumulative fractional sizes.
inline std::vector<int> split_points(int length, int parts) {
    std::vector<int> cuts(static_cast<std::size_t>(parts) + 1);
    for (int k = 0; k <= parts; ++k)
        cuts[static_cast<std::size_t>(k)] =
            static_cast<int>(std::lround(static_cast<double>(k) * length / parts));
    return cuts;
}
} // namespace detail

/// Partitions `image` into rows x cols cells and resamples each to out_tile_px square.
inline PuzzleBundle cut_image(const Image& image, int rows, int cols, int out_tile_px = kCanonicalTilePx) {
    if (image.empty() || image.height() == 0 || image.width() == 0) throw InputError("image has zero area");
    if (rows < 1 || cols < 1) throw InputError("rows and cols must be at least 1");
    if (out_tile_px < 1) throw InputError("tile size must be positive");
    if (rows > image.height() || cols > image.width())
        throw InputError("more grid rows/cols than image pixels");

    const auto ys = detail::split_points(image.height(), rows);
    const auto xs = detail::split_points(image.width(), cols);

    PuzzleBundle bundle;
    bundle.rows = rows;
    bundle.cols = cols;
    bundle.ground_truth.emplace();
    bundle.tiles.reserve(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto ri = static_cast<std::size_t>(r);
            const auto ci = static_cast<std::size_t>(c);
            Image cell = crop(image, ys[ri], xs[ci], ys[ri + 1] - ys[ri], xs[ci + 1] - xs[ci]);
            const int id = r * cols + c;
            bundle.tiles.push_back({id, resize_bilinear(cell, out_tile_px, out_tile_px)});
            bundle.ground_truth->push_back({{r, c}, id, Rotation{}});
        }
    }
    return bundle;
}

/// Draws `placements` onto a canvas covering their bounding box; empty cells stay black.
inline Image assemble(const PuzzleBundle& bundle, const std::vector<Placement>& placements) {
    if (placements.empty()) return {};
    int min_r = placements.front().cell.row, max_r = min_r;
    int min_c = placements.front().cell.col, max_c = min_c;
    for (const Placement& p : placements) {
        min_r = std::min(min_r, p.cell.row);
        max_r = std::max(max_r, p.cell.row);
        min_c = std::min(min_c, p.cell.col);
        max_c = std::max(max_c, p.cell.col);
    }
    const int px = bundle.tile_px();
    Image canvas((max_r - min_r + 1) * px, (max_c - min_c + 1) * px);
    for (const Placement& p : placements) {
        if (p.tile < 0 || p.tile >= bundle.size()) throw InputError("placement refers to unknown tile");
        blit(canvas, rotate(bundle.tiles[static_cast<std::size_t>(p.tile)].pixels, p.rot),
             (p.cell.row - min_r) * px, (p.cell.col - min_c) * px);
    }
    return canvas;
}

/// Permutes tile order (and, for Type2, turns each tile by a random quarter-turn).
/// The ground truth is rewritten so the scrambled bundle solves to the same image.
inline PuzzleBundle scramble(const PuzzleBundle& bundle, Variant variant, std::uint64_t seed) {
    if (!bundle.ground_truth) throw InputError("cannot scramble a bundle without ground truth");
    validate(bundle);
    const auto n = bundle.tiles.size();
    std::mt19937_64 rng(seed);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const auto truth = ground_truth_by_tile(bundle);
    std::uniform_int_distribution<int> quarter(0, 3);

    PuzzleBundle out;
    out.rows = bundle.rows;
    out.cols = bundle.cols;
    out.provenance = bundle.provenance;
    out.ground_truth.emplace();
    out.tiles.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<std::size_t>(order[k]);
        const Rotation turn(variant == Variant::Type2 ? quarter(rng) : 0);
        const int id = static_cast<int>(k);
        out.tiles.push_back({id, rotate(bundle.tiles[src].pixels, turn)});
        out.ground_truth->push_back({truth[src].cell, id, truth[src].rot - turn});
    }
    return out;
}

enum class DegradeFrame : int { None = 0, Single = 1, Double = 2 };

/// Zeroes the outermost frame of the tile (training augmentation).
inline Tile degrade(const Tile& tile, DegradeFrame frame) {
    Tile out = tile;
    const int f = static_cast<int>(frame);
    Image& img = out.pixels;
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            if (r < f || c < f || r >= img.height() - f || c >= img.width() - f)
                for (int ch = 0; ch < Image::kChannels; ++ch) img.at(r, c, ch) = 0;
    return out;
}

/// Translates content by (dx, dy) pixels, |dx|, |dy| <= 2; vacated pixels are zero.
/// Positive dx moves content right, positive dy moves it down.
inline Tile shift(const Tile& tile, int dx, int dy) {
    if (std::abs(dx) > 2 || std::abs(dy) > 2) throw InputError("shift offsets must lie in [-2, 2]");
    const Image& src = tile.pixels;
    Tile out{tile.id, Image(src.height(), src.width())};
    for (int r = 0; r < src.height(); ++r) {
        const int sr = r - dy;
        if (sr < 0 || sr >= src.height()) continue;
        for (int c = 0; c < src.width(); ++c) {
            const int sc = c - dx;
            if (sc < 0 || sc >= src.width()) continue;
            for (int ch = 0; ch < Image::kChannels; ++ch) out.pixels.at(r, c, ch) = src.at(sr, sc, ch);
        }
    }
    return out;
}

/// Rotation that makes `anchor` face right / `candidate` face left.
inline std::pair<Rotation, Rotation> abutment_rotations(Side anchor, Side candidate) noexcept {
    return {rotation_between(anchor, Side::Right), rotation_between(candidate, Side::Left)};
}

/// Both tiles turned so the anchor edge faces right and the candidate edge faces left,
/// i.e. the anchor sits to the left of the candidate.
inline std::pair<Image, Image> oriented_pair(EdgeRef anchor, EdgeRef candidate, const PuzzleBundle& bundle) {
    if (anchor.tile == candidate.tile) throw InputError("oriented pair needs two distinct tiles");
    if (anchor.tile < 0 || candidate.tile < 0 || anchor.tile >= bundle.size() || candidate.tile >= bundle.size())
        throw InputError("edge refers to unknown tile");
    const auto [ra, rc] = abutment_rotations(anchor.side, candidate.side);
    return {rotate(bundle.tiles[static_cast<std::size_t>(anchor.tile)].pixels, ra),
            rotate(bundle.tiles[static_cast<std::size_t>(candidate.tile)].pixels, rc)};
}

} // namespace tilepanel

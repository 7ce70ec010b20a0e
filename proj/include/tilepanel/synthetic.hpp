#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "tilepanel/image.hpp"
#include "tilepanel/puzzle.hpp"

namespace tilepanel {

enum class SyntheticStyle { Noise, Gradient };

/// Synthetic source image of (rows * tile_px) x (cols * tile_px) pixels.
///   Noise:    i.i.d. uniform RGB per pixel.
///   Gradient: smooth colour ramps with a seeded phase, so every edge is distinct.
inline Image synthetic_image(SyntheticStyle style, int rows, int cols, int tile_px, std::uint64_t seed) {
    if (rows < 1 || cols < 1 || tile_px < 1) throw InputError("synthetic image dimensions must be positive");
    const int h = rows * tile_px;
    const int w = cols * tile_px;
    Image img(h, w);
    std::mt19937_64 rng(seed);
    if (style == SyntheticStyle::Noise) {
        std::uniform_int_distribution<int> byte(0, 255);
        for (auto& v : img.data()) v = static_cast<std::uint8_t>(byte(rng));
        return img;
    }
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    const double pr = phase(rng), pg = phase(rng), pb = phase(rng);
    for (int r = 0; r < h; ++r) {
        const double y = static_cast<double>(r) / h;
        for (int c = 0; c < w; ++c) {
            const double x = static_cast<double>(c) / w;
            const double red = 0.5 + 0.5 * std::sin(3.1 * x + 1.3 * y + pr);
            const double green = 0.5 + 0.5 * std::sin(2.3 * y - 1.1 * x + pg);
            const double blue = 0.5 + 0.5 * std::sin(1.7 * (x + y) + pb);
            img.at(r, c, 0) = static_cast<std::uint8_t>(std::lround(255.0 * red));
            img.at(r, c, 1) = static_cast<std::uint8_t>(std::lround(255.0 * green));
            img.at(r, c, 2) = static_cast<std::uint8_t>(std::lround(255.0 * blue));
        }
    }
    return img;
}

inline PuzzleBundle synthetic_bundle(SyntheticStyle style, int rows, int cols, std::uint64_t seed,
                                     int tile_px = kCanonicalTilePx) {
    PuzzleBundle b = cut_image(synthetic_image(style, rows, cols, tile_px, seed), rows, cols, tile_px);
    b.provenance = std::string("synthetic ") + (style == SyntheticStyle::Noise ? "noise" : "gradient") +
                   " seed=" + std::to_string(seed);
    return b;
}

} // namespace tilepanel

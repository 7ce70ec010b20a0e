#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tilepanel/error.hpp"
#include "tilepanel/geometry.hpp"

namespace tilepanel {

/// Row-major 8-bit RGB raster.
class Image {
public:
    static constexpr int kChannels = 3;

    Image() = default;
    Image(int height, int width, std::uint8_t fill = 0)
        : height_(height), width_(width),
          data_(static_cast<std::size_t>(checked_area(height, width)) * kChannels, fill) {}

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t& at(int row, int col, int channel) noexcept { return data_[offset(row, col, channel)]; }
    std::uint8_t at(int row, int col, int channel) const noexcept { return data_[offset(row, col, channel)]; }

    std::span<std::uint8_t> data() noexcept { return data_; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    static int checked_area(int height, int width) {
        if (height < 0 || width < 0) {
            throw InputError("image dimensions must be non-negative");
        }
        return height * width;
    }

    std::size_t offset(int row, int col, int channel) const noexcept {
        return (static_cast<std::size_t>(row) * width_ + col) * kChannels + channel;
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Turns the image counterclockwise by `rot`.
inline Image rotate(const Image& src, Rotation rot) {
    const int h = src.height();
    const int w = src.width();
    switch (rot.quarter_turns()) {
    case 0:
        return src;
    case 1: {
        Image out(w, h);
        for (int r = 0; r < w; ++r)
            for (int c = 0; c < h; ++c)
                for (int ch = 0; ch < Image::kChannels; ++ch)
                    out.at(r, c, ch) = src.at(c, w - 1 - r, ch);
        return out;
    }
    case 2: {
        Image out(h, w);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                for (int ch = 0; ch < Image::kChannels; ++ch)
                    out.at(r, c, ch) = src.at(h - 1 - r, w - 1 - c, ch);
        return out;
    }
    default: {
        Image out(w, h);
        for (int r = 0; r < w; ++r)
            for (int c = 0; c < h; ++c)
                for (int ch = 0; ch < Image::kChannels; ++ch)
                    out.at(r, c, ch) = src.at(h - 1 - c, r, ch);
        return out;
    }
    }
}

inline Image crop(const Image& src, int row, int col, int height, int width) {
    if (row < 0 || col < 0 || height < 0 || width < 0 || row + height > src.height() ||
        col + width > src.width()) {
        throw InputError("crop window outside image");
    }
    Image out(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            for (int ch = 0; ch < Image::kChannels; ++ch)
                out.at(r, c, ch) = src.at(row + r, col + c, ch);
    return out;
}

/// Copies `src` into `dst` with its top-left corner at (row, col); clipped to `dst`.
inline void blit(Image& dst, const Image& src, int row, int col) {
    for (int r = 0; r < src.height(); ++r) {
        const int dr = row + r;
        if (dr < 0 || dr >= dst.height()) continue;
        for (int c = 0; c < src.width(); ++c) {
            const int dc = col + c;
            if (dc < 0 || dc >= dst.width()) continue;
            for (int ch = 0; ch < Image::kChannels; ++ch) dst.at(dr, dc, ch) = src.at(r, c, ch);
        }
    }
}

/// Bilinear resampling with pixel-centre alignment. A same-size resize is the identity.
inline Image resize_bilinear(const Image& src, int height, int width) {
    if (src.empty()) throw InputError("cannot resample an empty image");
    if (height <= 0 || width <= 0) throw InputError("resample target must be positive");
    if (height == src.height() && width == src.width()) return src;

    struct Tap {
        int lo, hi;
        double frac;
    };
    auto taps = [](int dst_size, int src_size) {
        std::vector<Tap> out(static_cast<std::size_t>(dst_size));
        const double scale = static_cast<double>(src_size) / dst_size;
        for (int i = 0; i < dst_size; ++i) {
            double x = (i + 0.5) * scale - 0.5;
            x = std::clamp(x, 0.0, static_cast<double>(src_size - 1));
            const int lo = static_cast<int>(std::floor(x));
            const int hi = std::min(lo + 1, src_size - 1);
            out[static_cast<std::size_t>(i)] = {lo, hi, x - lo};
        }
        return out;
    };
    const auto ys = taps(height, src.height());
    const auto xs = taps(width, src.width());

    Image out(height, width);
    for (int r = 0; r < height; ++r) {
        const Tap& ty = ys[static_cast<std::size_t>(r)];
        for (int c = 0; c < width; ++c) {
            const Tap& tx = xs[static_cast<std::size_t>(c)];
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                const double top = src.at(ty.lo, tx.lo, ch) * (1.0 - tx.frac) + src.at(ty.lo, tx.hi, ch) * tx.frac;
                const double bot = src.at(ty.hi, tx.lo, ch) * (1.0 - tx.frac) + src.at(ty.hi, tx.hi, ch) * tx.frac;
                const double v = top * (1.0 - ty.frac) + bot * ty.frac;
                out.at(r, c, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

} // namespace tilepanel

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tilepanel/compat.hpp"
#include "tilepanel/error.hpp"
#include "tilepanel/fs_util.hpp"

namespace tilepanel {

// CMAT layout, little-endian:
//   "CMAT" | u16 version | u8 variant (1|2) | u8 flags | u32 n_tiles | 16 n^2 x f32
// flags: bit0 similarity, bit1 normalized, bit2 symmetric.
// Scores are row-major over edge index 4 * tile + side (L=0, R=1, T=2, B=3);
// inadmissible entries are NaN placeholders and ignored on load.
inline constexpr std::uint16_t kCmatVersion = 1;
inline constexpr std::size_t kCmatHeaderSize = 12;

namespace cmat_flags {
inline constexpr std::uint8_t similarity = 1u << 0;
inline constexpr std::uint8_t normalized = 1u << 1;
inline constexpr std::uint8_t symmetric = 1u << 2;
} // namespace cmat_flags

namespace detail {
inline void put_le(std::vector<char>& out, std::uint64_t v, int bytes) {
    for (int k = 0; k < bytes; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}
inline std::uint64_t get_le(std::span<const char> in, std::size_t at, int bytes) {
    std::uint64_t v = 0;
    for (int k = 0; k < bytes; ++k)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(k)])) << (8 * k);
    return v;
}
} // namespace detail

inline std::vector<char> encode_matrix(const CompatibilityMatrix& m) {
    std::vector<char> out;
    const auto count = static_cast<std::size_t>(m.n_edges()) * static_cast<std::size_t>(m.n_edges());
    out.reserve(kCmatHeaderSize + 4 * count);
    out.insert(out.end(), {'C', 'M', 'A', 'T'});
    detail::put_le(out, kCmatVersion, 2);
    detail::put_le(out, static_cast<std::uint64_t>(to_int(m.variant())), 1);
    std::uint8_t flags = 0;
    if (m.semantics() == Semantics::Similarity) flags |= cmat_flags::similarity;
    if (m.normalized()) flags |= cmat_flags::normalized;
    if (m.symmetric()) flags |= cmat_flags::symmetric;
    detail::put_le(out, flags, 1);
    detail::put_le(out, static_cast<std::uint32_t>(m.n_tiles()), 4);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    for (int i = 0; i < m.n_edges(); ++i)
        for (int j = 0; j < m.n_edges(); ++j)
            detail::put_le(out, std::bit_cast<std::uint32_t>(m.admissible(i, j) ? m(i, j) : nan), 4);
    return out;
}

/// Decodes a CMAT buffer. Each malformation raises a ParseError with its own code.
inline CompatibilityMatrix decode_matrix(std::span<const char> in) {
    if (in.size() < 4 || std::string(in.data(), 4) != "CMAT") throw ParseError(ParseErrc::bad_magic, "not a CMAT file");
    if (in.size() < kCmatHeaderSize) throw ParseError(ParseErrc::truncated, "header cut short");
    const auto version = detail::get_le(in, 4, 2);
    if (version != kCmatVersion)
        throw ParseError(ParseErrc::version_mismatch, "expected version 1, found " + std::to_string(version));
    const auto variant = detail::get_le(in, 6, 1);
    if (variant != 1 && variant != 2) throw ParseError(ParseErrc::bad_header, "variant must be 1 or 2");
    const auto flags = static_cast<std::uint8_t>(detail::get_le(in, 7, 1));
    if (flags & ~0x7u) throw ParseError(ParseErrc::bad_header, "unknown flag bits set");
    const auto n = detail::get_le(in, 8, 4);
    if (n == 0 || n > 1'000'000) throw ParseError(ParseErrc::bad_header, "implausible tile count");

    const std::size_t edges = 4 * static_cast<std::size_t>(n);
    const std::size_t expected = kCmatHeaderSize + 4 * edges * edges;
    if (in.size() < expected)
        throw ParseError(ParseErrc::truncated, "payload has " + std::to_string(in.size() - kCmatHeaderSize) +
                                                   " bytes, header declares " + std::to_string(expected - kCmatHeaderSize));
    if (in.size() > expected) throw ParseError(ParseErrc::trailing_data, "bytes after declared payload");

    CompatibilityMatrix m(static_cast<int>(n), variant_from_int(static_cast<int>(variant)),
                          (flags & cmat_flags::similarity) ? Semantics::Similarity : Semantics::Dissimilarity);
    m.set_normalized(flags & cmat_flags::normalized);
    m.set_symmetric(flags & cmat_flags::symmetric);
    std::size_t at = kCmatHeaderSize;
    for (int i = 0; i < m.n_edges(); ++i)
        for (int j = 0; j < m.n_edges(); ++j, at += 4) {
            if (!m.admissible(i, j)) continue;
            const float v = std::bit_cast<float>(static_cast<std::uint32_t>(detail::get_le(in, at, 4)));
            if (!std::isfinite(v))
                throw ParseError(ParseErrc::non_finite,
                                 "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not finite");
            m.set(i, j, v);
        }
    return m;
}

inline void save_matrix(const CompatibilityMatrix& m, const std::filesystem::path& path) {
    const auto bytes = encode_matrix(m);
    write_file_atomic(path, bytes);
}

inline CompatibilityMatrix load_matrix(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_text(path);
    } catch (const InputError& e) {
        throw ParseError(ParseErrc::io, e.what());
    }
    return decode_matrix(std::span<const char>(bytes.data(), bytes.size()));
}

} // namespace tilepanel

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "tilepanel/error.hpp"
#include "tilepanel/geometry.hpp"
#include "tilepanel/image.hpp"
#include "tilepanel/parallel.hpp"
#include "tilepanel/puzzle.hpp"

namespace tilepanel {

enum class Semantics : std::uint8_t { Dissimilarity, Similarity };

enum class MeasureKind { SSD, MGC, External };

constexpr std::string_view to_string(MeasureKind k) noexcept {
    switch (k) {
    case MeasureKind::SSD: return "ssd";
    case MeasureKind::MGC: return "mgc";
    case MeasureKind::External: return "external";
    }
    return "?";
}

/// Dense score table over ordered edge pairs (4n x 4n, row = anchor edge).
///
/// score(i, j) describes edge i abutting edge j with i's tile on the left.
/// Only admissible entries carry a value; the rest hold NaN:
///   - same-tile pairs are never admissible;
///   - Type1 admits only opposite-side pairs (R|L, L|R, B|T, T|B), the four
///     abutments reachable without turning a tile;
///   - Type2 admits every cross-tile pair.
class CompatibilityMatrix {
public:
    CompatibilityMatrix() = default;
    CompatibilityMatrix(int n_tiles, Variant variant, Semantics semantics)
        : n_tiles_(n_tiles), variant_(variant), semantics_(semantics) {
        if (n_tiles < 1) throw InputError("matrix needs at least one tile");
        const auto e = static_cast<std::size_t>(n_edges());
        scores_.assign(e * e, std::numeric_limits<float>::quiet_NaN());
    }

    int n_tiles() const noexcept { return n_tiles_; }
    int n_edges() const noexcept { return 4 * n_tiles_; }
    Variant variant() const noexcept { return variant_; }

    Semantics semantics() const noexcept { return semantics_; }
    bool normalized() const noexcept { return normalized_; }
    bool symmetric() const noexcept { return symmetric_; }
    void set_semantics(Semantics s) noexcept { semantics_ = s; }
    void set_normalized(bool v) noexcept { normalized_ = v; }
    void set_symmetric(bool v) noexcept { symmetric_ = v; }

    static bool admissible(Variant variant, int i, int j) noexcept {
        if (i / 4 == j / 4) return false;
        if (variant == Variant::Type2) return true;
        return static_cast<Side>(j % 4) == opposite(static_cast<Side>(i % 4));
    }
    bool admissible(int i, int j) const noexcept { return admissible(variant_, i, j); }

    float operator()(int i, int j) const noexcept { return scores_[flat(i, j)]; }
    float score(EdgeRef a, EdgeRef b) const noexcept { return (*this)(a.index(), b.index()); }
    void set(int i, int j, float v) noexcept { scores_[flat(i, j)] = v; }

    std::span<const float> row(int i) const noexcept {
        return {scores_.data() + static_cast<std::size_t>(i) * n_edges(), static_cast<std::size_t>(n_edges())};
    }
    std::span<float> row(int i) noexcept {
        return {scores_.data() + static_cast<std::size_t>(i) * n_edges(), static_cast<std::size_t>(n_edges())};
    }
    std::span<const float> raw() const noexcept { return scores_; }
    std::span<float> raw() noexcept { return scores_; }

    /// Number of admissible ordered pairs: 4n(n-1) for Type1, 4n(4n-4) for Type2.
    std::size_t admissible_count() const noexcept {
        const auto n = static_cast<std::size_t>(n_tiles_);
        return variant_ == Variant::Type1 ? 4 * n * (n - 1) : 4 * n * (4 * n - 4);
    }

    /// Visits every admissible (i, j).
    template <typename F>
    void for_each_admissible(F&& f) const {
        for (int i = 0; i < n_edges(); ++i)
            for (int j = 0; j < n_edges(); ++j)
                if (admissible(i, j)) f(i, j);
    }

private:
    std::size_t flat(int i, int j) const noexcept {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_edges()) + static_cast<std::size_t>(j);
    }

    int n_tiles_ = 0;
    Variant variant_ = Variant::Type1;
    Semantics semantics_ = Semantics::Dissimilarity;
    bool normalized_ = false;
    bool symmetric_ = false;
    std::vector<float> scores_;
};

/// Equality of flags and every admissible score, bit for bit.
inline bool bitwise_equal(const CompatibilityMatrix& a, const CompatibilityMatrix& b) {
    if (a.n_tiles() != b.n_tiles() || a.variant() != b.variant() || a.semantics() != b.semantics() ||
        a.normalized() != b.normalized() || a.symmetric() != b.symmetric())
        return false;
    bool same = true;
    a.for_each_admissible([&](int i, int j) {
        same = same && std::bit_cast<std::uint32_t>(a(i, j)) == std::bit_cast<std::uint32_t>(b(i, j));
    });
    return same;
}

// ---------------------------------------------------------------------------
// Measures. Both operate on an oriented pair: the anchor's edge is the last
// column of `left`, the candidate's edge is the first column of `right`.

namespace detail {

using Rgb = std::array<double, 3>;
using Mat3 = std::array<double, 9>;

/// The two pixel columns nearest to one edge, outermost first.
struct EdgeColumns {
    std::vector<Rgb> outer;
    std::vector<Rgb> inner;
};

inline EdgeColumns columns_of(const Image& img, int outer_col, int inner_col) {
    EdgeColumns e;
    e.outer.resize(static_cast<std::size_t>(img.height()));
    e.inner.resize(static_cast<std::size_t>(img.height()));
    for (int r = 0; r < img.height(); ++r)
        for (int ch = 0; ch < 3; ++ch) {
            e.outer[static_cast<std::size_t>(r)][static_cast<std::size_t>(ch)] = img.at(r, outer_col, ch);
            e.inner[static_cast<std::size_t>(r)][static_cast<std::size_t>(ch)] =
                img.at(r, inner_col, ch);
        }
    return e;
}

inline EdgeColumns right_edge(const Image& img) { return columns_of(img, img.width() - 1, std::max(0, img.width() - 2)); }
inline EdgeColumns left_edge(const Image& img) { return columns_of(img, 0, std::min(1, img.width() - 1)); }

inline double ssd_columns(const EdgeColumns& left, const EdgeColumns& right) {
    double sum = 0.0;
    for (std::size_t r = 0; r < left.outer.size(); ++r)
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const double d = left.outer[r][ch] - right.outer[r][ch];
            sum += d * d;
        }
    return sum;
}

/// Inverse of a symmetric 3x3 matrix through its adjugate.
inline Mat3 invert3(const Mat3& m) {
    const double a = m[0], b = m[1], c = m[2], d = m[3], e = m[4], f = m[5], g = m[6], h = m[7], k = m[8];
    const double c00 = e * k - f * h, c01 = -(d * k - f * g), c02 = d * h - e * g;
    const double c10 = -(b * k - c * h), c11 = a * k - c * g, c12 = -(a * h - b * g);
    const double c20 = b * f - c * e, c21 = -(a * f - c * d), c22 = a * e - b * d;
    const double det = a * c00 + b * c01 + c * c02;
    const double inv = 1.0 / det;
    return {c00 * inv, c10 * inv, c20 * inv, c01 * inv, c11 * inv, c21 * inv, c02 * inv, c12 * inv, c22 * inv};
}

/// Relative diagonal loading applied to every gradient covariance.
inline constexpr double kCovarianceRidge = 1e-6;

/// Mean and regularised inverse covariance of the gradient across one edge
/// (outer minus inner column, per row).
struct GradientModel {
    Rgb mean{};
    Mat3 inv_cov{};
};

inline GradientModel gradient_model(const EdgeColumns& edge) {
    const std::size_t rows = edge.outer.size();
    GradientModel g;
    std::vector<Rgb> grad(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t ch = 0; ch < 3; ++ch) {
            grad[r][ch] = edge.outer[r][ch] - edge.inner[r][ch];
            g.mean[ch] += grad[r][ch];
        }
    for (double& m : g.mean) m /= static_cast<double>(rows);

    Mat3 cov{};
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t p = 0; p < 3; ++p)
            for (std::size_t q = 0; q < 3; ++q) cov[p * 3 + q] += (grad[r][p] - g.mean[p]) * (grad[r][q] - g.mean[q]);
    const double denom = rows > 1 ? static_cast<double>(rows - 1) : 1.0;
    for (double& v : cov) v /= denom;

    const double trace = cov[0] + cov[4] + cov[8];
    const double ridge = kCovarianceRidge * std::max(trace / 3.0, 1.0);
    for (std::size_t p = 0; p < 3; ++p) cov[p * 4] += ridge;
    g.inv_cov = invert3(cov);
    return g;
}

/// Sum over rows of the Mahalanobis form of (to.outer - from.outer - mean).
inline double mahalanobis_term(const GradientModel& model, const EdgeColumns& from, const EdgeColumns& to) {
    double sum = 0.0;
    for (std::size_t r = 0; r < from.outer.size(); ++r) {
        Rgb d;
        for (std::size_t ch = 0; ch < 3; ++ch) d[ch] = to.outer[r][ch] - from.outer[r][ch] - model.mean[ch];
        const Mat3& s = model.inv_cov;
        sum += d[0] * (s[0] * d[0] + s[1] * d[1] + s[2] * d[2]) + d[1] * (s[3] * d[0] + s[4] * d[1] + s[5] * d[2]) +
               d[2] * (s[6] * d[0] + s[7] * d[1] + s[8] * d[2]);
    }
    return sum;
}

/// Left-to-right term plus its mirrored right-to-left counterpart.
inline double mgc_columns(const EdgeColumns& left, const GradientModel& left_model, const EdgeColumns& right,
                          const GradientModel& right_model) {
    return mahalanobis_term(left_model, left, right) + mahalanobis_term(right_model, right, left);
}

} // namespace detail

/// Sum of squared colour differences across the abutting columns.
inline double ssd(const Image& left, const Image& right) {
    return detail::ssd_columns(detail::right_edge(left), detail::left_edge(right));
}

/// Mahalanobis gradient compatibility (two-sided, directional), a dissimilarity >= 0.
inline double mgc(const Image& left, const Image& right) {
    const auto l = detail::right_edge(left);
    const auto r = detail::left_edge(right);
    return detail::mgc_columns(l, detail::gradient_model(l), r, detail::gradient_model(r));
}

/// Evaluates SSD or MGC on every admissible oriented pair.
inline CompatibilityMatrix build_matrix(const PuzzleBundle& bundle, MeasureKind kind, Variant variant,
                                        int threads = 0) {
    if (kind == MeasureKind::External) throw InputError("external measures arrive as matrix files");
    validate(bundle);
    const int n = bundle.size();
    if (n < 2) throw InputError("need at least two tiles to score edges");

    // Per edge: columns with the edge turned to face right (anchor role) and left (candidate role).
    const int edges = 4 * n;
    std::vector<detail::EdgeColumns> as_anchor(static_cast<std::size_t>(edges)), as_candidate(static_cast<std::size_t>(edges));
    std::vector<detail::GradientModel> anchor_model, candidate_model;
    for (int e = 0; e < edges; ++e) {
        const EdgeRef ref = EdgeRef::from_index(e);
        const Image& px = bundle.tiles[static_cast<std::size_t>(ref.tile)].pixels;
        const auto [ra, rc] = abutment_rotations(ref.side, ref.side);
        as_anchor[static_cast<std::size_t>(e)] = detail::right_edge(rotate(px, ra));
        as_candidate[static_cast<std::size_t>(e)] = detail::left_edge(rotate(px, rc));
    }
    if (kind == MeasureKind::MGC) {
        for (int e = 0; e < edges; ++e) {
            anchor_model.push_back(detail::gradient_model(as_anchor[static_cast<std::size_t>(e)]));
            candidate_model.push_back(detail::gradient_model(as_candidate[static_cast<std::size_t>(e)]));
        }
    }

    CompatibilityMatrix m(n, variant, Semantics::Dissimilarity);
    parallel_for(static_cast<std::size_t>(edges), threads, [&](std::size_t i) {
        const int a = static_cast<int>(i);
        for (int b = 0; b < edges; ++b) {
            if (!m.admissible(a, b)) continue;
            const auto bi = static_cast<std::size_t>(b);
            const double v = kind == MeasureKind::SSD
                                 ? detail::ssd_columns(as_anchor[i], as_candidate[bi])
                                 : detail::mgc_columns(as_anchor[i], anchor_model[i], as_candidate[bi], candidate_model[bi]);
            m.set(a, b, static_cast<float>(v));
        }
    });
    return m;
}

/// Dissimilarity -> similarity by negation; larger becomes more compatible.
inline CompatibilityMatrix to_similarity(const CompatibilityMatrix& in) {
    if (in.semantics() != Semantics::Dissimilarity) throw InputError("matrix already has similarity semantics");
    CompatibilityMatrix out = in;
    out.for_each_admissible([&](int i, int j) { out.set(i, j, -in(i, j)); });
    out.set_semantics(Semantics::Similarity);
    return out;
}

/// Per-anchor min-max scaling to [0, 1]. Anchors whose candidates all tie map to 0.
inline CompatibilityMatrix normalize_minmax(const CompatibilityMatrix& in) {
    if (in.semantics() != Semantics::Similarity) throw InputError("normalize_minmax needs similarity semantics");
    CompatibilityMatrix out = in;
    for (int i = 0; i < in.n_edges(); ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int j = 0; j < in.n_edges(); ++j) {
            if (!in.admissible(i, j)) continue;
            lo = std::min(lo, static_cast<double>(in(i, j)));
            hi = std::max(hi, static_cast<double>(in(i, j)));
        }
        for (int j = 0; j < in.n_edges(); ++j) {
            if (!in.admissible(i, j)) continue;
            const double v = hi > lo ? (static_cast<double>(in(i, j)) - lo) / (hi - lo) : 0.0;
            out.set(i, j, static_cast<float>(v));
        }
    }
    out.set_normalized(true);
    return out;
}

/// Replaces each ordered pair with the mean of both directions.
inline CompatibilityMatrix symmetrize(const CompatibilityMatrix& in) {
    if (!in.normalized()) throw InputError("symmetrize expects a normalized matrix");
    CompatibilityMatrix out = in;
    for (int i = 0; i < in.n_edges(); ++i)
        for (int j = i + 1; j < in.n_edges(); ++j) {
            if (!in.admissible(i, j)) continue;
            const auto v = static_cast<float>((static_cast<double>(in(i, j)) + static_cast<double>(in(j, i))) / 2.0);
            out.set(i, j, v);
            out.set(j, i, v);
        }
    out.set_symmetric(true);
    return out;
}

/// Throws InputError if stored scores contradict the header flags.
inline void check_invariants(const CompatibilityMatrix& m) {
    bool ok = true;
    m.for_each_admissible([&](int i, int j) {
        const float v = m(i, j);
        ok = ok && std::isfinite(v);
        if (m.normalized()) ok = ok && v >= 0.0f && v <= 1.0f;
        if (m.symmetric()) ok = ok && v == m(j, i);
    });
    if (!ok) throw InputError("matrix scores contradict its flags");
}

} // namespace tilepanel

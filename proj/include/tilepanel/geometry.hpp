#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>

namespace tilepanel {

/// Tile sides. The numeric values are the on-disk edge ordering
/// (edge index = 4 * tile + side).
enum class Side : std::uint8_t { Left = 0, Right = 1, Top = 2, Bottom = 3 };

inline constexpr std::array<Side, 4> kAllSides{Side::Left, Side::Right, Side::Top, Side::Bottom};

constexpr int index(Side s) noexcept { return static_cast<int>(s); }

constexpr Side opposite(Side s) noexcept {
    switch (s) {
    case Side::Left: return Side::Right;
    case Side::Right: return Side::Left;
    case Side::Top: return Side::Bottom;
    case Side::Bottom: return Side::Top;
    }
    return s;
}

constexpr std::string_view to_string(Side s) noexcept {
    constexpr std::array<std::string_view, 4> names{"L", "R", "T", "B"};
    return names[index(s)];
}

/// Number of counterclockwise quarter-turns, always reduced mod 4.
class Rotation {
public:
    constexpr Rotation() = default;
    constexpr explicit Rotation(int quarter_turns) noexcept
        : turns_(static_cast<std::uint8_t>(((quarter_turns % 4) + 4) % 4)) {}

    constexpr int quarter_turns() const noexcept { return turns_; }
    constexpr Rotation inverse() const noexcept { return Rotation(-turns_); }

    friend constexpr Rotation operator+(Rotation a, Rotation b) noexcept {
        return Rotation(a.turns_ + b.turns_);
    }
    friend constexpr Rotation operator-(Rotation a, Rotation b) noexcept {
        return Rotation(a.turns_ - b.turns_);
    }
    friend constexpr bool operator==(Rotation, Rotation) = default;

private:
    std::uint8_t turns_ = 0;
};

/// Where side `s` ends up after turning the tile counterclockwise by `r`.
/// One quarter-turn maps Right -> Top -> Left -> Bottom -> Right.
constexpr Side rotate(Side s, Rotation r) noexcept {
    // Sides listed in counterclockwise order.
    constexpr std::array<Side, 4> ring{Side::Right, Side::Top, Side::Left, Side::Bottom};
    constexpr std::array<int, 4> pos{2, 0, 1, 3}; // position of L, R, T, B in ring
    return ring[(pos[index(s)] + r.quarter_turns()) % 4];
}

/// The unique rotation taking side `from` onto side `to`.
constexpr Rotation rotation_between(Side from, Side to) noexcept {
    for (int q = 0; q < 4; ++q) {
        if (rotate(from, Rotation(q)) == to) {
            return Rotation(q);
        }
    }
    return Rotation{};
}

/// Grid coordinates; rows grow downward, columns grow rightward.
struct Cell {
    int row = 0;
    int col = 0;

    friend constexpr bool operator==(Cell, Cell) = default;
    friend constexpr auto operator<=>(Cell, Cell) = default;
};

constexpr Cell step(Cell c, Side direction) noexcept {
    switch (direction) {
    case Side::Left: return {c.row, c.col - 1};
    case Side::Right: return {c.row, c.col + 1};
    case Side::Top: return {c.row - 1, c.col};
    case Side::Bottom: return {c.row + 1, c.col};
    }
    return c;
}

/// One of the 4n piece edges of a puzzle.
struct EdgeRef {
    int tile = 0;
    Side side = Side::Left;

    constexpr int index() const noexcept { return 4 * tile + tilepanel::index(side); }
    static constexpr EdgeRef from_index(int edge) noexcept {
        return {edge / 4, static_cast<Side>(edge % 4)};
    }

    friend constexpr bool operator==(EdgeRef, EdgeRef) = default;
};

/// A tile at a grid cell, turned counterclockwise by `rot` relative to its stored pixels.
struct Placement {
    Cell cell;
    int tile = 0;
    Rotation rot;

    friend constexpr bool operator==(const Placement&, const Placement&) = default;
};

/// Original side of a tile turned by `rot` that faces world direction `world`.
constexpr Side side_facing(Side world, Rotation rot) noexcept { return rotate(world, rot.inverse()); }

} // namespace tilepanel

template <>
struct std::hash<tilepanel::Cell> {
    std::size_t operator()(tilepanel::Cell c) const noexcept {
        return std::hash<long long>{}((static_cast<long long>(c.row) << 32) ^ static_cast<unsigned>(c.col));
    }
};

#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "tilepanel/error.hpp"
#include "tilepanel/fs_util.hpp"
#include "tilepanel/png_io.hpp"
#include "tilepanel/puzzle.hpp"

namespace tilepanel {

inline constexpr int kManifestVersion = 1;

inline std::string tile_file_name(int id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "tile_%04d.png", id);
    return buf;
}

inline nlohmann::json placement_to_json(const Placement& p) {
    return {{"tile", p.tile}, {"row", p.cell.row}, {"col", p.cell.col}, {"rot", p.rot.quarter_turns()}};
}

inline Placement placement_from_json(const nlohmann::json& j) {
    const int rot = j.at("rot").get<int>();
    if (rot < 0 || rot > 3) throw InputError("rot must be in 0..3");
    return {{j.at("row").get<int>(), j.at("col").get<int>()}, j.at("tile").get<int>(), Rotation(rot)};
}

inline nlohmann::json manifest_json(const PuzzleBundle& bundle) {
    nlohmann::json m;
    m["version"] = kManifestVersion;
    m["rows"] = bundle.rows ? nlohmann::json(*bundle.rows) : nlohmann::json(nullptr);
    m["cols"] = bundle.cols ? nlohmann::json(*bundle.cols) : nlohmann::json(nullptr);
    m["tile_px"] = bundle.tile_px();
    m["tiles"] = nlohmann::json::array();
    for (const Tile& t : bundle.tiles) m["tiles"].push_back({{"id", t.id}, {"file", tile_file_name(t.id)}});
    if (bundle.ground_truth) {
        m["ground_truth"] = nlohmann::json::array();
        for (const Placement& p : *bundle.ground_truth) m["ground_truth"].push_back(placement_to_json(p));
    } else {
        m["ground_truth"] = nullptr;
    }
    m["provenance"] = bundle.provenance;
    return m;
}

/// Writes `manifest.json` plus one PNG per tile. The directory is staged and renamed into place.
inline void write_bundle(const std::filesystem::path& dir, const PuzzleBundle& bundle) {
    namespace fs = std::filesystem;
    validate(bundle);
    const fs::path target = dir.has_filename() ? dir : dir.parent_path();
    const fs::path tmp = staging_path(target);
    fs::create_directories(tmp);
    try {
        for (const Tile& t : bundle.tiles) write_png(tmp / tile_file_name(t.id), t.pixels);
        write_text_atomic(tmp / "manifest.json", manifest_json(bundle).dump(2) + "\n");
        std::error_code ec;
        if (fs::exists(target)) fs::remove_all(target, ec);
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }
}

inline PuzzleBundle read_bundle(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_text(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    try {
        if (m.at("version").get<int>() != kManifestVersion)
            throw InputError("unsupported manifest version in " + manifest_path.string());
        PuzzleBundle b;
        if (!m.at("rows").is_null()) b.rows = m.at("rows").get<int>();
        if (!m.at("cols").is_null()) b.cols = m.at("cols").get<int>();
        const int tile_px = m.at("tile_px").get<int>();
        for (const auto& t : m.at("tiles")) {
            const int id = t.at("id").get<int>();
            Image px = read_png(dir / t.at("file").get<std::string>());
            if (px.height() != tile_px || px.width() != tile_px)
                throw InputError("tile " + std::to_string(id) + " does not match tile_px");
            b.tiles.push_back({id, std::move(px)});
        }
        std::sort(b.tiles.begin(), b.tiles.end(), [](const Tile& a, const Tile& c) { return a.id < c.id; });
        if (!m.at("ground_truth").is_null()) {
            b.ground_truth.emplace();
            for (const auto& p : m.at("ground_truth")) b.ground_truth->push_back(placement_from_json(p));
        }
        b.provenance = m.value("provenance", std::string{});
        validate(b);
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
}

} // namespace tilepanel

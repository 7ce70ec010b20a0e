#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "tilepanel/error.hpp"

namespace tilepanel {

/// Sibling path for staging output before an atomic rename.
inline std::filesystem::path staging_path(const std::filesystem::path& target) {
    std::random_device rd;
    return target.parent_path() / (target.filename().string() + ".tmp-" + std::to_string(rd()));
}

/// Writes `bytes` to a temporary sibling and renames it over `target`.
inline void write_file_atomic(const std::filesystem::path& target, std::span<const char> bytes) {
    const auto tmp = staging_path(target);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot create " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw InputError("cannot move output into place at " + target.string());
    }
}

inline void write_text_atomic(const std::filesystem::path& target, std::string_view text) {
    write_file_atomic(target, std::span<const char>(text.data(), text.size()));
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace tilepanel

#pragma once

#include <cstring>
#include <filesystem>
#include <string>

#include <png.h>

#include "tilepanel/error.hpp"
#include "tilepanel/image.hpp"

namespace tilepanel {

/// Reads any PNG and converts it to 8-bit RGB (alpha composited away, grey expanded).
inline Image read_png(const std::filesystem::path& path) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&desc, path.string().c_str()))
        throw InputError("cannot read png " + path.string() + ": " + desc.message);
    desc.format = PNG_FORMAT_RGB;
    Image img(static_cast<int>(desc.height), static_cast<int>(desc.width));
    if (!png_image_finish_read(&desc, nullptr, img.data().data(), 0, nullptr)) {
        const std::string msg = desc.message;
        png_image_free(&desc);
        throw InputError("cannot decode png " + path.string() + ": " + msg);
    }
    return img;
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
    if (img.empty()) throw InputError("refusing to write an empty image");
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    desc.width = static_cast<png_uint_32>(img.width());
    desc.height = static_cast<png_uint_32>(img.height());
    desc.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&desc, path.string().c_str(), 0, img.data().data(), 0, nullptr))
        throw InputError("cannot write png " + path.string() + ": " + desc.message);
}

} // namespace tilepanel

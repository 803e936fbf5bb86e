#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

#include <png.h>

#include "msdmad/error.hpp"

namespace msdmad {

/// 8-bit raster, grayscale (1 channel) or RGB (3 channels), row-major
/// interleaved. Value semantics; immutable use is thread-safe.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, std::uint8_t fill = 0)
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {
        if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
            throw ValidationError("raster must be WxHx{1|3} with positive dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }

    std::uint8_t& at(int x, int y, int c = 0) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    const std::vector<std::uint8_t>& data() const { return data_; }
    std::vector<std::uint8_t>& data() { return data_; }

    bool same_shape(const Raster& other) const {
        return width_ == other.width_ && height_ == other.height_ &&
               channels_ == other.channels_;
    }

    friend bool operator==(const Raster& a, const Raster& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.channels_ == b.channels_ &&
               a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> data_;
};

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// Reads an 8-bit PNG. Palette and 16-bit inputs are converted; alpha is
/// stripped; the result has 1 or 3 channels.
inline Raster load_png(const std::filesystem::path& path) {
    detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("not a valid PNG: " + path.string());
    }
    png_init_io(png, file.get());
    png_read_png(png, info,
                 PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_PACKING | PNG_TRANSFORM_EXPAND |
                     PNG_TRANSFORM_STRIP_ALPHA,
                 nullptr);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = static_cast<int>(png_get_channels(png, info));
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("unsupported channel count in " + path.string());
    }

    Raster img(width, height, channels);
    png_bytepp rows = png_get_rows(png, info);
    for (int y = 0; y < height; ++y)
        std::copy(rows[y], rows[y] + static_cast<std::size_t>(width) * channels,
                  img.data().begin() + static_cast<std::size_t>(y) * width * channels);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

inline void save_png(const Raster& img, const std::filesystem::path& path) {
    detail::FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw IoError("cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8,
                 img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
    auto* base = const_cast<std::uint8_t*>(img.data().data());
    for (int y = 0; y < img.height(); ++y)
        rows[static_cast<std::size_t>(y)] =
            base + static_cast<std::size_t>(y) * img.width() * img.channels();
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace msdmad

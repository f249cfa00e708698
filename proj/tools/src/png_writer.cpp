#include "png_writer.hpp"

#include <cstdio>

#include <png.h>

#include "diffeo/error.hpp"

namespace diffeo::cli {

void write_png(const std::string& path, std::size_t width, std::size_t height, int channels,
               const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != width * height * static_cast<std::size_t>(channels))
        throw InvalidArgument("png: pixel buffer does not match the image size");
    std::vector<png_const_bytep> rows(height);
    for (std::size_t r = 0; r < height; ++r) rows[r] = pixels.data() + r * width * channels;

    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot open " + path + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng failed writing " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw IoError("cannot finish writing " + path);
}

}  // namespace diffeo::cli

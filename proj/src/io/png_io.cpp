#include "affectseq/io/png_io.hpp"

#include <png.h>

#include <cstring>

namespace affectseq::io {

Image read_png(const std::string& path, bool gray) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw DataError("png: cannot read " + path + ": " + png.message);
    png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    Image img;
    img.height = static_cast<int>(png.height);
    img.width = static_cast<int>(png.width);
    img.channels = gray ? 1 : 3;
    img.pixels.resize(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
        png_image_free(&png);
        throw DataError("png: decode failed for " + path + ": " + png.message);
    }
    return img;
}

void write_png(const std::string& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("png: image must have 1 or 3 channels");
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, img.pixels.data(), 0, nullptr))
        throw DataError("png: cannot write " + path + ": " + png.message);
}

}  // namespace affectseq::io

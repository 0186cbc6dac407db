#pragma once

#include <string>

#include "affectseq/geometry.hpp"

namespace affectseq::io {

// PNG files decoded to 8-bit RGB (or grayscale when gray = true).
Image read_png(const std::string& path, bool gray = false);
void write_png(const std::string& path, const Image& img);

}  // namespace affectseq::io

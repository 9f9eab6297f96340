#pragma once

#include <filesystem>
#include <stdexcept>

#include "smoe/image.hpp"

namespace smoe {

// File format or I/O failure; the message names the offending field or path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary PGM (P5, maxval 255); intensities map v/255 into [0, 1].
GrayImage load_image(const std::filesystem::path& path);

// P5 with the exact header "P5\n<w> <h>\n255\n" followed by
// round(clamp(v,0,1)*255) bytes, so save -> load -> save is bit-stable.
void save_image(const GrayImage& img, const std::filesystem::path& path);

}  // namespace smoe

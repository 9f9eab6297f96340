#include "smoe/pgm_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace smoe {

namespace {

// PNM token scan: skips whitespace and '#' comments.
bool next_token(const std::string& data, std::size_t& pos, std::string& token) {
    while (pos < data.size()) {
        const char c = data[pos];
        if (c == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
            ++pos;
        } else {
            break;
        }
    }
    token.clear();
    while (pos < data.size()) {
        const char c = data[pos];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f' ||
            c == '#') {
            break;
        }
        token += c;
        ++pos;
    }
    return !token.empty();
}

int parse_field(const std::string& data, std::size_t& pos, const char* field,
                const std::filesystem::path& path) {
    std::string token;
    if (!next_token(data, pos, token)) {
        throw IoError("pgm: missing " + std::string(field) + " in " + path.string());
    }
    try {
        const int v = std::stoi(token);
        if (v < 0) throw std::out_of_range("negative");
        return v;
    } catch (const std::exception&) {
        throw IoError("pgm: invalid " + std::string(field) + " '" + token + "' in " +
                      path.string());
    }
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("pgm: cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
        throw IoError("pgm: bad magic (want P5) in " + path.string());
    }
    std::size_t pos = 2;
    const int width = parse_field(data, pos, "width", path);
    const int height = parse_field(data, pos, "height", path);
    const int maxval = parse_field(data, pos, "maxval", path);
    if (width < 1 || height < 1) {
        throw IoError("pgm: non-positive dimensions in " + path.string());
    }
    if (maxval != 255) {
        throw IoError("pgm: unsupported maxval " + std::to_string(maxval) + " (want 255) in " +
                      path.string());
    }
    if (pos >= data.size()) throw IoError("pgm: missing pixel data in " + path.string());
    ++pos;  // single whitespace byte after maxval

    const std::size_t need = static_cast<std::size_t>(width) * height;
    if (data.size() - pos < need) {
        throw IoError("pgm: truncated pixel data in " + path.string());
    }

    GrayImage img(width, height);
    for (std::size_t i = 0; i < need; ++i) {
        img.pixels[i] = static_cast<unsigned char>(data[pos + i]) / 255.0;
    }
    return img;
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("pgm: cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<unsigned char> bytes(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        bytes[i] = static_cast<unsigned char>(std::floor(clamp01(img.pixels[i]) * 255.0 + 0.5));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("pgm: write failed for " + path.string());
}

}  // namespace smoe

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "rapd/errors.hpp"
#include "rapd/imgproc.hpp"

namespace rapd::imgproc {

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
}

int parse_positive(const std::string& tok, const char* what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IngestionError(std::string("PGM header: invalid ") + what + " '" + tok + "'");
    }
}

}  // namespace

std::string encode_pgm(const GrayImage& img) {
    std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    const auto px = img.pixels();
    out.append(reinterpret_cast<const char*>(px.data()), px.size());
    return out;
}

GrayImage decode_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    if (next_token(bytes, pos) != "P5") throw IngestionError("PGM: missing P5 magic");
    const int w = parse_positive(next_token(bytes, pos), "width");
    const int h = parse_positive(next_token(bytes, pos), "height");
    const int maxval = parse_positive(next_token(bytes, pos), "maxval");
    if (maxval != 255) throw IngestionError("PGM: only maxval 255 is supported, got " + std::to_string(maxval));
    ++pos;  // single whitespace byte after maxval
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() < pos + n) throw IngestionError("PGM: truncated pixel data");
    std::vector<std::uint8_t> px(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return GrayImage(w, h, std::move(px));
}

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open frame file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return decode_pgm(ss.str());
    } catch (const IngestionError& e) {
        throw IngestionError(path + ": " + e.what());
    }
}

void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError("cannot write frame file: " + path);
    const std::string bytes = encode_pgm(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IngestionError("failed writing frame file: " + path);
}

}  // namespace rapd::imgproc

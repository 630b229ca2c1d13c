#include "smt/image.hpp"

#include "smt/errors.hpp"
#include "smt/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace smt {

namespace {

// Reads the next PGM header token, skipping whitespace and '#' comments.
int read_header_int(std::istream& in) {
    int c = in.get();
    while (c >= 0) {
        if (c == '#') {
            while (c >= 0 && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c < 0 || !std::isdigit(c)) throw Error("malformed PGM header");
    int value = 0;
    while (c >= 0 && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

} // namespace

GrayImage read_pgm(std::istream& in) {
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') throw Error("not a binary PGM (P5) stream");
    GrayImage img;
    img.width = read_header_int(in);
    img.height = read_header_int(in);
    int maxval = read_header_int(in);
    if (img.width <= 0 || img.height <= 0) throw Error("invalid PGM dimensions");
    if (maxval <= 0 || maxval > 255) throw Error("PGM maxval must be within 1..255");
    // read_header_int consumed the single whitespace after maxval
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw Error("truncated PGM pixel data");
    return img;
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& img) {
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw Error("PGM write failed");
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& img) {
    std::ostringstream buf(std::ios::binary);
    write_pgm(buf, img);
    atomic_write_file(path, buf.str());
}

} // namespace smt

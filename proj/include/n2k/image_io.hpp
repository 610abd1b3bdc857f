#pragma once

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "n2k/errors.hpp"
#include "n2k/tensor.hpp"

namespace n2k {

// 8-bit grayscale carriers: binary PGM (P5, maxval 255) and 8-bit grayscale
// PNG (color type 0, no interlace). Decoding scales to [0,1] by 1/255;
// encoding clamps to [0,1] and rounds half away from zero, so byte values
// round-trip exactly.

inline std::uint8_t quantize_u8(double v) {
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return std::uint8_t(std::floor(v * 255.0 + 0.5));
}

// --- PGM (P5) ----------------------------------------------------------------

namespace detail {
// Whitespace/comment skipper for PNM headers; '#' comments run to newline.
inline void pgm_skip_space(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
}

inline unsigned long pgm_read_number(const std::string& bytes, std::size_t& pos,
                                     const char* what) {
    pgm_skip_space(bytes, pos);
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
        throw ParseError(std::string("pgm: expected ") + what, pos);
    unsigned long v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
        v = v * 10 + unsigned(bytes[pos] - '0');
        if (v > 1000000000ul) throw ParseError("pgm: absurd header number", pos);
        ++pos;
    }
    return v;
}
}  // namespace detail

inline Tensor decode_pgm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw ParseError("pgm: bad magic (want P5)", 0);
    std::size_t pos = 2;
    const unsigned long width = detail::pgm_read_number(bytes, pos, "width");
    const unsigned long height = detail::pgm_read_number(bytes, pos, "height");
    const unsigned long maxval = detail::pgm_read_number(bytes, pos, "maxval");
    if (maxval != 255)
        throw ConfigError("pgm: unsupported maxval " + std::to_string(maxval) + ", want 255");
    if (width == 0 || height == 0) throw ParseError("pgm: empty dimensions", pos);
    if (pos >= bytes.size()) throw ParseError("pgm: truncated after header", pos);
    ++pos;  // the single whitespace byte before raster data
    const std::size_t want = std::size_t(width) * height;
    if (bytes.size() - pos < want)
        throw ParseError("pgm: raster truncated, want " + std::to_string(want) + " bytes",
                         bytes.size());
    Tensor img({1, 1, height, width});
    for (std::size_t k = 0; k < want; ++k)
        img.data()[k] = double(std::uint8_t(bytes[pos + k])) / 255.0;
    return img;
}

inline std::string encode_pgm(const Tensor& img) {
    const Shape s = img.shape();
    if (s.batch != 1 || s.channels != 1)
        throw ConfigError("pgm: expected a single-channel image, got " + s.str());
    std::string out = "P5\n" + std::to_string(s.width) + " " + std::to_string(s.height) +
                      "\n255\n";
    out.reserve(out.size() + s.height * s.width);
    for (std::size_t k = 0; k < s.height * s.width; ++k)
        out.push_back(char(quantize_u8(img.data()[k])));
    return out;
}

// --- PNG (8-bit grayscale) ----------------------------------------------------

namespace detail {

inline constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

inline std::uint32_t png_u32be(const std::string& bytes, std::size_t pos) {
    return (std::uint32_t(std::uint8_t(bytes[pos])) << 24) |
           (std::uint32_t(std::uint8_t(bytes[pos + 1])) << 16) |
           (std::uint32_t(std::uint8_t(bytes[pos + 2])) << 8) |
           std::uint32_t(std::uint8_t(bytes[pos + 3]));
}

inline void png_put_u32be(std::string& out, std::uint32_t v) {
    out.push_back(char((v >> 24) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char(v & 0xff));
}

inline void png_put_chunk(std::string& out, const char type[4], const std::string& data) {
    png_put_u32be(out, std::uint32_t(data.size()));
    const std::size_t start = out.size();
    out.append(type, 4);
    out += data;
    const std::uint32_t crc = std::uint32_t(
        ::crc32(0, reinterpret_cast<const Bytef*>(out.data() + start), uInt(4 + data.size())));
    png_put_u32be(out, crc);
}

inline std::uint8_t png_paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return std::uint8_t(a);
    if (pb <= pc) return std::uint8_t(b);
    return std::uint8_t(c);
}

}  // namespace detail

inline Tensor decode_png(const std::string& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), detail::kPngSignature, 8) != 0)
        throw ParseError("png: bad signature", 0);
    std::size_t pos = 8;
    bool have_ihdr = false;
    std::uint32_t width = 0, height = 0;
    std::string idat;
    bool done = false;
    while (!done) {
        if (pos + 8 > bytes.size()) throw ParseError("png: truncated chunk header", pos);
        const std::uint32_t len = detail::png_u32be(bytes, pos);
        const std::string type = bytes.substr(pos + 4, 4);
        if (pos + 12 + len > bytes.size()) throw ParseError("png: truncated chunk body", pos);
        const std::uint32_t want_crc = detail::png_u32be(bytes, pos + 8 + len);
        const std::uint32_t got_crc = std::uint32_t(::crc32(
            0, reinterpret_cast<const Bytef*>(bytes.data() + pos + 4), uInt(4 + len)));
        if (want_crc != got_crc) throw ParseError("png: chunk crc mismatch", pos + 8 + len);
        const std::size_t data_pos = pos + 8;

        if (type == "IHDR") {
            if (len != 13) throw ParseError("png: bad IHDR length", data_pos);
            width = detail::png_u32be(bytes, data_pos);
            height = detail::png_u32be(bytes, data_pos + 4);
            const std::uint8_t bit_depth = std::uint8_t(bytes[data_pos + 8]);
            const std::uint8_t color_type = std::uint8_t(bytes[data_pos + 9]);
            const std::uint8_t interlace = std::uint8_t(bytes[data_pos + 12]);
            if (bit_depth != 8 || color_type != 0)
                throw ConfigError("png: unsupported format (need 8-bit grayscale, got depth " +
                                  std::to_string(bit_depth) + " color type " +
                                  std::to_string(color_type) + ")");
            if (interlace != 0) throw ConfigError("png: interlaced images are unsupported");
            if (width == 0 || height == 0) throw ParseError("png: empty dimensions", data_pos);
            have_ihdr = true;
        } else if (type == "IDAT") {
            idat += bytes.substr(data_pos, len);
        } else if (type == "IEND") {
            done = true;
        } else if (!(type[0] & 0x20)) {
            // critical chunk we do not understand
            throw ConfigError("png: unsupported critical chunk '" + type + "'");
        }
        pos += 12 + len;
    }
    if (!have_ihdr) throw ParseError("png: missing IHDR", 8);

    const std::size_t stride = std::size_t(width) + 1;  // filter byte + row
    std::vector<std::uint8_t> raw(std::size_t(height) * stride);
    uLongf raw_len = uLongf(raw.size());
    const int rc = ::uncompress(raw.data(), &raw_len,
                                reinterpret_cast<const Bytef*>(idat.data()), uLong(idat.size()));
    if (rc != Z_OK || raw_len != raw.size())
        throw ParseError("png: idat inflate failed", pos);

    Tensor img({1, 1, height, width});
    std::vector<std::uint8_t> prev(width, 0);
    std::vector<std::uint8_t> row(width, 0);
    for (std::uint32_t i = 0; i < height; ++i) {
        const std::uint8_t filter = raw[i * stride];
        const std::uint8_t* src = &raw[i * stride + 1];
        for (std::uint32_t j = 0; j < width; ++j) {
            const int left = j > 0 ? row[j - 1] : 0;
            const int up = prev[j];
            const int upleft = j > 0 ? prev[j - 1] : 0;
            int v = src[j];
            switch (filter) {
                case 0: break;
                case 1: v += left; break;
                case 2: v += up; break;
                case 3: v += (left + up) / 2; break;
                case 4: v += detail::png_paeth(left, up, upleft); break;
                default: throw ParseError("png: bad filter type", i * stride);
            }
            row[j] = std::uint8_t(v & 0xff);
            img.at(0, 0, i, j) = double(row[j]) / 255.0;
        }
        std::swap(prev, row);
    }
    return img;
}

inline std::string encode_png(const Tensor& img) {
    const Shape s = img.shape();
    if (s.batch != 1 || s.channels != 1)
        throw ConfigError("png: expected a single-channel image, got " + s.str());

    std::string raw;
    raw.reserve(s.height * (s.width + 1));
    for (std::size_t i = 0; i < s.height; ++i) {
        raw.push_back('\0');  // filter type 0 per row
        for (std::size_t j = 0; j < s.width; ++j)
            raw.push_back(char(quantize_u8(img.at(0, 0, i, j))));
    }
    std::vector<std::uint8_t> compressed(::compressBound(uLong(raw.size())));
    uLongf comp_len = uLongf(compressed.size());
    const int rc = ::compress2(compressed.data(), &comp_len,
                               reinterpret_cast<const Bytef*>(raw.data()), uLong(raw.size()),
                               Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) throw ConfigError("png: deflate failed");

    std::string out(reinterpret_cast<const char*>(detail::kPngSignature), 8);
    std::string ihdr;
    detail::png_put_u32be(ihdr, std::uint32_t(s.width));
    detail::png_put_u32be(ihdr, std::uint32_t(s.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(0);   // color type: grayscale
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter method
    ihdr.push_back(0);   // no interlace
    detail::png_put_chunk(out, "IHDR", ihdr);
    detail::png_put_chunk(out, "IDAT",
                          std::string(reinterpret_cast<const char*>(compressed.data()), comp_len));
    detail::png_put_chunk(out, "IEND", "");
    return out;
}

// --- dispatch -----------------------------------------------------------------

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

inline Tensor decode_image_bytes(const std::string& bytes) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), detail::kPngSignature, 8) == 0)
        return decode_png(bytes);
    throw ConfigError("unsupported image format (want binary PGM P5 or 8-bit grayscale PNG)");
}

inline Tensor decode_image(const std::string& path) {
    return decode_image_bytes(read_file_bytes(path));
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(),
                                                  suffix) == 0;
}

inline void encode_image(const std::string& path, const Tensor& img) {
    if (has_suffix(path, ".pgm")) {
        write_file_bytes(path, encode_pgm(img));
    } else if (has_suffix(path, ".png")) {
        write_file_bytes(path, encode_png(img));
    } else {
        throw ConfigError("unsupported output extension (want .pgm or .png): " + path);
    }
}

}  // namespace n2k

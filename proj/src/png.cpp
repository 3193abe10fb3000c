#include "gazedec/png.hpp"

#include "gazedec/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <vector>

namespace gazedec {
namespace raster {

namespace {

uint32_t crc32_table_entry(uint32_t n) {
    uint32_t c = n;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
    return c;
}

uint32_t crc32(const uint8_t* data, size_t len) {
    static uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (uint32_t n = 0; n < 256; ++n) table[n] = crc32_table_entry(n);
        init = true;
    }
    uint32_t c = 0xffffffffu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

uint32_t adler32(const uint8_t* data, size_t len) {
    uint32_t a = 1, b = 0;
    for (size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void write_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
    put_u32_be(out, static_cast<uint32_t>(data.size()));
    std::vector<uint8_t> payload(type, type + 4);
    payload.insert(payload.end(), data.begin(), data.end());
    out.insert(out.end(), payload.begin(), payload.end());
    put_u32_be(out, crc32(payload.data(), payload.size()));
}

uint8_t to_byte(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

uint32_t read_u32_be(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

std::vector<uint8_t> read_file(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw data_error(ErrorKind::IoError, "cannot open " + path + ": " + std::strerror(errno));
    std::fseek(f, 0, SEEK_END);
    const long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> data(static_cast<size_t>(size));
    if (size > 0 && std::fread(data.data(), 1, data.size(), f) != data.size()) {
        std::fclose(f);
        throw data_error(ErrorKind::IoError, "short read on " + path);
    }
    std::fclose(f);
    return data;
}

// inflate for streams made of stored (type 00) blocks only
std::vector<uint8_t> inflate_stored(const uint8_t* p, size_t len) {
    if (len < 2) throw data_error(ErrorKind::InvalidValue, "png: truncated zlib stream");
    size_t pos = 2; // skip the zlib header
    std::vector<uint8_t> out;
    for (;;) {
        if (pos >= len) throw data_error(ErrorKind::InvalidValue, "png: truncated deflate data");
        const uint8_t header = p[pos++];
        if ((header & 0x06) != 0)
            throw data_error(ErrorKind::InvalidValue, "png: unsupported deflate block type");
        if (pos + 4 > len) throw data_error(ErrorKind::InvalidValue, "png: truncated stored block");
        const uint16_t n = static_cast<uint16_t>(p[pos] | (p[pos + 1] << 8));
        pos += 4;
        if (pos + n > len) throw data_error(ErrorKind::InvalidValue, "png: truncated stored block");
        out.insert(out.end(), p + pos, p + pos + n);
        pos += n;
        if (header & 1) break; // BFINAL
    }
    return out;
}

} // namespace

ScanpathImage quantize8(const ScanpathImage& image) {
    ScanpathImage out = image;
    for (double& v : out.pixels) v = to_byte(v) / 255.0;
    return out;
}

void export_png(const ScanpathImage& img, const std::string& path) {
    const size_t w = img.width, h = img.height;
    // raw scanlines: filter byte 0 + RGB triples
    std::vector<uint8_t> raw;
    raw.reserve(h * (1 + 3 * w));
    for (size_t y = 0; y < h; ++y) {
        raw.push_back(0);
        for (size_t x = 0; x < w; ++x) {
            raw.push_back(to_byte(img.at(0, y, x)));
            raw.push_back(to_byte(img.at(1, y, x)));
            raw.push_back(to_byte(img.at(2, y, x)));
        }
    }

    // zlib stream of stored deflate blocks
    std::vector<uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    size_t pos = 0;
    while (pos < raw.size() || raw.empty()) {
        const size_t n = std::min<size_t>(65535, raw.size() - pos);
        const bool final = pos + n >= raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(static_cast<uint8_t>(n & 0xff));
        z.push_back(static_cast<uint8_t>(n >> 8));
        z.push_back(static_cast<uint8_t>(~n & 0xff));
        z.push_back(static_cast<uint8_t>((~n >> 8) & 0xff));
        z.insert(z.end(), raw.begin() + static_cast<long>(pos), raw.begin() + static_cast<long>(pos + n));
        pos += n;
        if (final) break;
    }
    put_u32_be(z, adler32(raw.data(), raw.size()));

    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<uint32_t>(w));
    put_u32_be(ihdr, static_cast<uint32_t>(h));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(out, "IHDR", ihdr);
    write_chunk(out, "IDAT", z);
    write_chunk(out, "IEND", {});

    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error(ErrorKind::IoError, "cannot write " + path + ": " + std::strerror(errno));
    const size_t written = std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
    if (written != out.size()) throw data_error(ErrorKind::IoError, "short write on " + path);
}

void png_dimensions(const std::string& path, size_t& width, size_t& height) {
    std::vector<uint8_t> data = read_file(path);
    if (data.size() < 33 || std::memcmp(data.data() + 12, "IHDR", 4) != 0)
        throw data_error(ErrorKind::InvalidValue, path + ": not a PNG file");
    width = read_u32_be(data.data() + 16);
    height = read_u32_be(data.data() + 20);
}

ScanpathImage read_png(const std::string& path) {
    std::vector<uint8_t> data = read_file(path);
    if (data.size() < 8 || std::memcmp(data.data(), "\x89PNG\r\n\x1a\n", 8) != 0)
        throw data_error(ErrorKind::InvalidValue, path + ": not a PNG file");

    size_t pos = 8;
    size_t w = 0, h = 0;
    std::vector<uint8_t> idat;
    while (pos + 8 <= data.size()) {
        const uint32_t len = read_u32_be(data.data() + pos);
        const char* type = reinterpret_cast<const char*>(data.data() + pos + 4);
        const uint8_t* payload = data.data() + pos + 8;
        if (pos + 12 + len > data.size())
            throw data_error(ErrorKind::InvalidValue, path + ": truncated chunk");
        if (std::memcmp(type, "IHDR", 4) == 0) {
            w = read_u32_be(payload);
            h = read_u32_be(payload + 4);
            if (payload[8] != 8 || payload[9] != 2)
                throw data_error(ErrorKind::InvalidValue, path + ": unsupported PNG format");
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (w == 0 || h == 0) throw data_error(ErrorKind::InvalidValue, path + ": missing IHDR");

    const std::vector<uint8_t> raw = inflate_stored(idat.data(), idat.size());
    if (raw.size() != h * (1 + 3 * w))
        throw data_error(ErrorKind::InvalidValue, path + ": unexpected pixel data size");

    ScanpathImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(3 * w * h, 0.0);
    for (size_t y = 0; y < h; ++y) {
        const uint8_t* line = raw.data() + y * (1 + 3 * w);
        if (line[0] != 0)
            throw data_error(ErrorKind::InvalidValue, path + ": unsupported scanline filter");
        for (size_t x = 0; x < w; ++x) {
            img.at(0, y, x) = line[1 + 3 * x] / 255.0;
            img.at(1, y, x) = line[1 + 3 * x + 1] / 255.0;
            img.at(2, y, x) = line[1 + 3 * x + 2] / 255.0;
        }
    }
    return img;
}

} // namespace raster
} // namespace gazedec

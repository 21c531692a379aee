#include "sacc/io.hpp"

#include <png.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "sacc/errors.hpp"

namespace sacc::io {

namespace {

void put_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float f32le_from_bytes(const unsigned char* b) {
    std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

} // namespace

SaliencyGrid load_sgf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SGF1", 4) != 0)
        throw IoError(path.string() + ": not an SGF1 file");
    const std::uint32_t w = get_u32le(in);
    const std::uint32_t h = get_u32le(in);
    if (!in || w == 0 || h == 0)
        throw IoError(path.string() + ": bad SGF1 geometry");
    SaliencyGrid g(static_cast<int>(w), static_cast<int>(h));
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in)
        throw IoError(path.string() + ": truncated SGF1 payload");
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = f32le_from_bytes(&buf[i * 4]);
    return g;
}

void save_sgf(const SaliencyGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write("SGF1", 4);
    put_u32le(out, static_cast<std::uint32_t>(grid.width()));
    put_u32le(out, static_cast<std::uint32_t>(grid.height()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const float f = static_cast<float>(grid[i]);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                              static_cast<unsigned char>((u >> 8) & 0xff),
                              static_cast<unsigned char>((u >> 16) & 0xff),
                              static_cast<unsigned char>((u >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

SaliencyGrid load_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.string().c_str(), "rb"),
                                                       std::fclose);
    if (!fp)
        throw IoError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": PNG decode failed");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    int depth = png_get_bit_depth(png, info);
    int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_read_update_info(png, info);
    depth = png_get_bit_depth(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> row(rowbytes);
    SaliencyGrid g(static_cast<int>(w), static_cast<int>(h));
    const double scale = depth == 16 ? 65535.0 : 255.0;
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            double v;
            if (depth == 16)
                v = (row[2 * x] << 8 | row[2 * x + 1]) / scale; // PNG is big-endian
            else
                v = row[x] / scale;
            g.at(static_cast<int>(x), static_cast<int>(y)) = v;
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    g.normalize_sum_to_one();
    return g;
}

void save_png(const SaliencyGrid& grid, const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.string().c_str(), "wb"),
                                                       std::fclose);
    if (!fp)
        throw IoError("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": PNG encode failed");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(grid.width()),
                 static_cast<png_uint_32>(grid.height()), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const double mx = grid.max_value();
    const double scale = mx > 0.0 ? 65535.0 / mx : 0.0;
    std::vector<unsigned char> row(static_cast<std::size_t>(grid.width()) * 2);
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            const auto v = static_cast<std::uint16_t>(grid.at(x, y) * scale + 0.5);
            row[2 * static_cast<std::size_t>(x)] = static_cast<unsigned char>(v >> 8);
            row[2 * static_cast<std::size_t>(x) + 1] = static_cast<unsigned char>(v & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

SaliencyGrid load_grid(const std::filesystem::path& path) {
    if (path.extension() == ".png")
        return load_png(path);
    return load_sgf(path);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace sacc::io

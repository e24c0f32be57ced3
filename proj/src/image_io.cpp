#include "dualex/image_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include <jpeglib.h>

namespace dualex {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

unsigned char to_byte(double v) {
    long b = std::lround(v * 255.0);  // round-half-up for v >= 0
    if (b < 0) b = 0;
    if (b > 255) b = 255;
    return static_cast<unsigned char>(b);
}

// ---- PNG ----

RasterImage load_png(std::FILE* fp, const std::filesystem::path& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed for " + path.string());
    }

    std::vector<unsigned char> buffer;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt or unreadable PNG: " + path.string());
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    png_byte color_type = png_get_color_type(png, info);
    png_byte bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    const int depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);

    if (width < 1 || height < 1 || (channels != 3 && channels != 4) || (depth != 8 && depth != 16)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG layout in " + path.string());
    }

    buffer.resize(rowbytes * static_cast<std::size_t>(height));
    rows.resize(height);
    for (int y = 0; y < height; ++y) rows[y] = buffer.data() + rowbytes * static_cast<std::size_t>(y);

    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    RasterImage img(width, height);
    for (int y = 0; y < height; ++y) {
        const unsigned char* row = buffer.data() + rowbytes * static_cast<std::size_t>(y);
        double* out = img.pixel(0, y);
        if (depth == 8) {
            for (int x = 0; x < width; ++x, out += 3) {
                const unsigned char* s = row + static_cast<std::size_t>(x) * channels;
                out[0] = s[0] / 255.0;
                out[1] = s[1] / 255.0;
                out[2] = s[2] / 255.0;
            }
        } else {
            // 16-bit PNG samples are big-endian in the stream.
            for (int x = 0; x < width; ++x, out += 3) {
                const unsigned char* s = row + static_cast<std::size_t>(x) * channels * 2;
                for (int c = 0; c < 3; ++c) {
                    unsigned v = (static_cast<unsigned>(s[2 * c]) << 8) | s[2 * c + 1];
                    out[c] = v / 65535.0;
                }
            }
        }
    }
    return img;
}

// ---- JPEG ----

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

RasterImage load_jpeg(std::FILE* fp, const std::filesystem::path& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;

    std::vector<unsigned char> rowbuf;
    RasterImage img;

    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("corrupt or unreadable JPEG: " + path.string());
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int width = static_cast<int>(cinfo.output_width);
    const int height = static_cast<int>(cinfo.output_height);
    if (width < 1 || height < 1 || cinfo.output_components != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("unsupported JPEG layout in " + path.string());
    }

    img = RasterImage(width, height);
    rowbuf.resize(static_cast<std::size_t>(width) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        unsigned char* rowptr = rowbuf.data();
        int y = static_cast<int>(cinfo.output_scanline);
        jpeg_read_scanlines(&cinfo, &rowptr, 1);
        double* out = img.pixel(0, y);
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) *out++ = rowbuf[static_cast<std::size_t>(x) * 3 + c] / 255.0;
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

void write_png(const unsigned char* bytes, int width, int height, int channels,
               const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed for " + path.string());
    }

    std::vector<png_bytep> rows(height);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed: " + path.string());
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(bytes + stride * static_cast<std::size_t>(y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

RasterImage load(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open file: " + path.string());

    unsigned char magic[8] = {};
    std::size_t got = std::fread(magic, 1, sizeof(magic), fp.get());
    std::rewind(fp.get());

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (got >= 8 && std::memcmp(magic, png_sig, 8) == 0) return load_png(fp.get(), path);
    if (got >= 3 && magic[0] == 0xff && magic[1] == 0xd8 && magic[2] == 0xff)
        return load_jpeg(fp.get(), path);
    throw FormatError("unsupported image format: " + path.string());
}

void save(const RasterImage& img, const std::filesystem::path& path) {
    if (img.width < 1 || img.height < 1) throw ArgumentError("cannot save an empty image");
    std::vector<unsigned char> bytes(img.pixel_count() * 3);
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(img.data[i]);
    write_png(bytes.data(), img.width, img.height, 3, path);
}

void save_gray(const ScalarField& field, const std::filesystem::path& path) {
    if (field.width < 1 || field.height < 1) throw ArgumentError("cannot save an empty field");
    std::vector<unsigned char> bytes(field.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(field.data[i]);
    write_png(bytes.data(), field.width, field.height, 1, path);
}

}  // namespace dualex

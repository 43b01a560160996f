#include "cellmorph/errors.hpp"
#include "cellmorph/mask_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

namespace cellmorph {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; the handler stores the message so
// it can be rethrown as an exception after the jump lands.
struct PngErrorState {
    std::string message;
};

void on_png_error(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    if (state) state->message = msg ? msg : "libpng error";
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

class PngReader {
public:
    explicit PngReader(const std::filesystem::path& path) : path_(path) {
        file_.reset(std::fopen(path.string().c_str(), "rb"));
        if (!file_) throw MaskFormatError("cannot open " + path.string());
        unsigned char sig[8];
        if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
            throw MaskFormatError("not a PNG file: " + path.string());
        }
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err_, on_png_error, on_png_warning);
        if (!png_) throw MaskFormatError("libpng initialization failed");
        info_ = png_create_info_struct(png_);
        if (!info_) {
            png_destroy_read_struct(&png_, nullptr, nullptr);
            throw MaskFormatError("libpng initialization failed");
        }
    }

    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }

    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;

    // Reads the header, lets `configure` install transforms, then decodes all
    // rows. Returns false if libpng raised an error (see message()).
    template <typename Configure>
    bool read(Configure configure, std::vector<std::uint8_t>& pixels, std::size_t& rowbytes) {
        // Declared before setjmp so a longjmp never skips its destructor.
        std::vector<png_bytep> rows;
        if (setjmp(png_jmpbuf(png_))) return false;
        png_init_io(png_, file_.get());
        png_set_sig_bytes(png_, 8);
        png_read_info(png_, info_);
        configure(png_, info_);
        png_read_update_info(png_, info_);
        rowbytes = png_get_rowbytes(png_, info_);
        const auto height = png_get_image_height(png_, info_);
        pixels.assign(rowbytes * height, 0);
        rows.resize(height);
        for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
        png_read_image(png_, rows.data());
        png_read_end(png_, nullptr);
        return true;
    }

    const std::string& message() const noexcept { return err_.message; }
    png_structp png() const noexcept { return png_; }
    png_infop info() const noexcept { return info_; }

private:
    std::filesystem::path path_;
    FilePtr file_;
    PngErrorState err_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

bool host_is_little_endian() {
    const std::uint16_t probe = 1;
    return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

}  // namespace

RawGrid read_png_grid(const std::filesystem::path& path) {
    PngReader reader(path);
    std::vector<std::uint8_t> pixels;
    std::size_t rowbytes = 0;
    int bit_depth = 0;
    std::string unsupported;

    const bool ok = reader.read(
        [&](png_structp png, png_infop info) {
            const int color = png_get_color_type(png, info);
            bit_depth = png_get_bit_depth(png, info);
            if (color != PNG_COLOR_TYPE_GRAY) {
                unsupported = "label masks must be single-channel grayscale PNG";
                png_error(png, unsupported.c_str());
            }
            if (bit_depth < 8) png_set_packing(png);  // one byte per pixel, values kept
            if (bit_depth == 16 && host_is_little_endian()) png_set_swap(png);
        },
        pixels, rowbytes);
    if (!ok) {
        throw MaskFormatError(path.string() + ": " +
                              (unsupported.empty() ? reader.message() : unsupported));
    }

    RawGrid grid;
    grid.width = static_cast<int>(png_get_image_width(reader.png(), reader.info()));
    grid.height = static_cast<int>(png_get_image_height(reader.png(), reader.info()));
    grid.values.resize(static_cast<std::size_t>(grid.width) * grid.height);
    for (int y = 0; y < grid.height; ++y) {
        const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * rowbytes;
        Label* dst = grid.values.data() + static_cast<std::size_t>(y) * grid.width;
        if (bit_depth == 16) {
            for (int x = 0; x < grid.width; ++x) {
                std::uint16_t v;
                std::memcpy(&v, row + 2 * x, 2);
                dst[x] = v;
            }
        } else {
            for (int x = 0; x < grid.width; ++x) dst[x] = row[x];
        }
    }
    return grid;
}

RgbImage load_raw_image(const std::filesystem::path& path) {
    PngReader reader(path);
    std::vector<std::uint8_t> pixels;
    std::size_t rowbytes = 0;
    const bool ok = reader.read(
        [](png_structp png, png_infop info) {
            const int color = png_get_color_type(png, info);
            if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
            if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
            if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
                png_set_expand_gray_1_2_4_to_8(png);
            }
            if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
                png_set_gray_to_rgb(png);
            }
            if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        },
        pixels, rowbytes);
    if (!ok) throw MaskFormatError(path.string() + ": " + reader.message());

    RgbImage image;
    image.width = static_cast<int>(png_get_image_width(reader.png(), reader.info()));
    image.height = static_cast<int>(png_get_image_height(reader.png(), reader.info()));
    image.rgb.resize(static_cast<std::size_t>(image.width) * image.height * 3);
    for (int y = 0; y < image.height; ++y) {
        std::memcpy(image.rgb.data() + static_cast<std::size_t>(y) * image.width * 3,
                    pixels.data() + static_cast<std::size_t>(y) * rowbytes,
                    static_cast<std::size_t>(image.width) * 3);
    }
    return image;
}

namespace {

// Encodes pre-packed rows through libpng into `sink`.
template <typename Sink>
void write_png(Sink& sink, int width, int height, int bit_depth, int color_type,
               const std::vector<std::vector<std::uint8_t>>& rows) {
    PngErrorState err;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
    if (!png) throw IoError("libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed: " + err.message);
    }
    sink.attach(png);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& row : rows) png_write_row(png, row.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

struct FileSink {
    std::FILE* file;
    void attach(png_structp png) { png_init_io(png, file); }
};

struct MemorySink {
    std::vector<std::uint8_t>* out;
    static void write(png_structp png, png_bytep data, png_size_t len) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
        buf->insert(buf->end(), data, data + len);
    }
    static void flush(png_structp) {}
    void attach(png_structp png) { png_set_write_fn(png, out, &write, &flush); }
};

}  // namespace

void save_label_png(const LabelMask& mask, const std::filesystem::path& path) {
    std::vector<std::vector<std::uint8_t>> rows(static_cast<std::size_t>(mask.height()));
    for (int y = 0; y < mask.height(); ++y) {
        auto& row = rows[static_cast<std::size_t>(y)];
        row.resize(static_cast<std::size_t>(mask.width()) * 2);
        for (int x = 0; x < mask.width(); ++x) {
            const Label v = mask.at(x, y);
            if (v > 0xFFFF) throw IoError("label exceeds 16-bit PNG range: " + std::to_string(v));
            row[2 * x] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
            row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xFF);
        }
    }
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw IoError("cannot write " + path.string());
    FileSink sink{file.get()};
    write_png(sink, mask.width(), mask.height(), 16, PNG_COLOR_TYPE_GRAY, rows);
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
    std::vector<std::vector<std::uint8_t>> rows(static_cast<std::size_t>(image.height));
    const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
    for (int y = 0; y < image.height; ++y) {
        const auto* begin = image.rgb.data() + static_cast<std::size_t>(y) * stride;
        rows[static_cast<std::size_t>(y)].assign(begin, begin + stride);
    }
    std::vector<std::uint8_t> out;
    MemorySink sink{&out};
    write_png(sink, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
    return out;
}

}  // namespace cellmorph

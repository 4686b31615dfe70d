#include "iaa/mask.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <numeric>

namespace iaa {

namespace {

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) {
        throw MaskError("mask dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    }
}

// RAII holder for libpng's simplified-API control struct.
struct PngReader {
    png_image image{};
    PngReader() {
        image.version = PNG_IMAGE_VERSION;
    }
    ~PngReader() { png_image_free(&image); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

struct DecodedRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> gray;  // one value per pixel
};

DecodedRaster decode_png(const std::filesystem::path& path) {
    PngReader reader;
    if (!png_image_begin_read_from_file(&reader.image, path.c_str())) {
        throw MaskError("cannot read PNG '" + path.string() + "': " + reader.image.message);
    }
    const auto width = static_cast<int>(reader.image.width);
    const auto height = static_cast<int>(reader.image.height);
    if (width <= 0 || height <= 0) {
        throw MaskError("zero-sized image '" + path.string() + "'");
    }

    const bool colour = (reader.image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool wide = (reader.image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);

    DecodedRaster out{width, height, std::vector<std::uint16_t>(n)};

    // 16-bit input is read linear to avoid the sRGB 8-bit conversion
    // collapsing small nonzero values to zero.
    if (wide) {
        reader.image.format = colour ? PNG_FORMAT_LINEAR_RGB : PNG_FORMAT_LINEAR_Y;
        const std::size_t channels = colour ? 3 : 1;
        std::vector<std::uint16_t> buf(n * channels);
        if (!png_image_finish_read(&reader.image, nullptr, buf.data(), 0, nullptr)) {
            throw MaskError("cannot decode PNG '" + path.string() + "': " + reader.image.message);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint16_t v = buf[i * channels];
            if (colour && (buf[i * 3 + 1] != v || buf[i * 3 + 2] != v)) {
                throw MaskError("multi-channel mask with disagreeing channels: '" + path.string() + "'");
            }
            out.gray[i] = v;
        }
        return out;
    }

    reader.image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const std::size_t channels = colour ? 3 : 1;
    std::vector<std::uint8_t> buf(n * channels);
    if (!png_image_finish_read(&reader.image, nullptr, buf.data(), 0, nullptr)) {
        throw MaskError("cannot decode PNG '" + path.string() + "': " + reader.image.message);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t v = buf[i * channels];
        if (colour && (buf[i * 3 + 1] != v || buf[i * 3 + 2] != v)) {
            throw MaskError("multi-channel mask with disagreeing channels: '" + path.string() + "'");
        }
        out.gray[i] = v;
    }
    return out;
}

void write_gray_png(int width, int height, const std::uint8_t* data, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = PNG_FORMAT_GRAY;
    const int ok = png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr);
    const std::string message = image.message;
    png_image_free(&image);
    if (!ok) {
        throw MaskError("cannot write PNG '" + path.string() + "': " + message);
    }
}

}  // namespace

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    check_dims(width, height);
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryMask BinaryMask::from_pixels(int width, int height, std::span<const Pixel> foreground) {
    BinaryMask mask(width, height);
    for (const Pixel& p : foreground) {
        mask.set(p.row, p.col);
    }
    return mask;
}

BinaryMask BinaryMask::from_values(int width, int height, std::span<const std::uint8_t> values) {
    BinaryMask mask(width, height);
    if (values.size() != mask.bits_.size()) {
        throw MaskError("value buffer has " + std::to_string(values.size()) + " entries, expected " +
                        std::to_string(mask.bits_.size()));
    }
    std::transform(values.begin(), values.end(), mask.bits_.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v > 0); });
    return mask;
}

bool BinaryMask::at(int row, int col) const {
    if (row < 0 || row >= height_ || col < 0 || col >= width_) {
        throw MaskError("pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                        std::to_string(height_) + "x" + std::to_string(width_) + " grid");
    }
    return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
}

void BinaryMask::set(int row, int col, bool value) {
    if (row < 0 || row >= height_ || col < 0 || col >= width_) {
        throw MaskError("pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                        std::to_string(height_) + "x" + std::to_string(width_) + " grid");
    }
    bits_[static_cast<std::size_t>(row) * width_ + col] = value ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Pixel> BinaryMask::foreground() const {
    std::vector<Pixel> out;
    for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) {
            if (bits_[static_cast<std::size_t>(r) * width_ + c]) out.push_back({r, c});
        }
    }
    return out;
}

BinaryMask load_mask(const std::filesystem::path& path) {
    const DecodedRaster raster = decode_png(path);
    BinaryMask mask(raster.width, raster.height);
    for (int r = 0; r < raster.height; ++r) {
        for (int c = 0; c < raster.width; ++c) {
            if (raster.gray[static_cast<std::size_t>(r) * raster.width + c] > 0) mask.set(r, c);
        }
    }
    return mask;
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    if (mask.empty_grid()) throw MaskError("cannot save a mask with no grid");
    std::vector<std::uint8_t> data(mask.size());
    std::transform(mask.bits().begin(), mask.bits().end(), data.begin(),
                   [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
    write_gray_png(mask.width(), mask.height(), data.data(), path);
}

GrayImage load_gray_image(const std::filesystem::path& path) {
    PngReader reader;
    if (!png_image_begin_read_from_file(&reader.image, path.c_str())) {
        throw MaskError("cannot read PNG '" + path.string() + "': " + reader.image.message);
    }
    GrayImage img;
    img.width = static_cast<int>(reader.image.width);
    img.height = static_cast<int>(reader.image.height);
    if (img.width <= 0 || img.height <= 0) throw MaskError("zero-sized image '" + path.string() + "'");
    reader.image.format = PNG_FORMAT_GRAY;
    img.pixels.resize(PNG_IMAGE_SIZE(reader.image));
    if (!png_image_finish_read(&reader.image, nullptr, img.pixels.data(), 0, nullptr)) {
        throw MaskError("cannot decode PNG '" + path.string() + "': " + reader.image.message);
    }
    return img;
}

void save_gray_image(const GrayImage& image, const std::filesystem::path& path) {
    check_dims(image.width, image.height);
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw MaskError("gray image buffer size does not match its dimensions");
    }
    write_gray_png(image.width, image.height, image.pixels.data(), path);
}

int nearest_source_index(int i, int src, int dst) noexcept {
    // Integer form of floor((i + 0.5) * src / dst).
    const long long idx = ((2LL * i + 1) * src) / (2LL * dst);
    return static_cast<int>(std::min<long long>(idx, src - 1));
}

BinaryMask resize_nearest(const BinaryMask& mask, CanonicalGrid target) {
    if (mask.empty_grid()) throw MaskError("cannot resize a mask with no grid");
    check_dims(target.side, target.side);
    if (target.contains(mask)) return mask;

    std::vector<int> src_rows(static_cast<std::size_t>(target.side));
    std::vector<int> src_cols(static_cast<std::size_t>(target.side));
    for (int i = 0; i < target.side; ++i) {
        src_rows[i] = nearest_source_index(i, mask.height(), target.side);
        src_cols[i] = nearest_source_index(i, mask.width(), target.side);
    }
    BinaryMask out(target.side, target.side);
    const auto bits = mask.bits();
    for (int r = 0; r < target.side; ++r) {
        const std::size_t src_row_off = static_cast<std::size_t>(src_rows[r]) * mask.width();
        for (int c = 0; c < target.side; ++c) {
            if (bits[src_row_off + src_cols[c]]) out.set(r, c);
        }
    }
    return out;
}

GrayImage resize_nearest(const GrayImage& image, int width, int height) {
    check_dims(width, height);
    if (image.width == width && image.height == height) return image;
    GrayImage out{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height)};
    for (int r = 0; r < height; ++r) {
        const int sr = nearest_source_index(r, image.height, height);
        for (int c = 0; c < width; ++c) {
            const int sc = nearest_source_index(c, image.width, width);
            out.pixels[static_cast<std::size_t>(r) * width + c] =
                image.pixels[static_cast<std::size_t>(sr) * image.width + sc];
        }
    }
    return out;
}

}  // namespace iaa

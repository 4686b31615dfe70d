#pragma once

// Binary segmentation masks on a dense pixel grid, plus PNG I/O and
// nearest-neighbour resampling onto the canonical analysis grid.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iaa {

/// Raised for malformed masks, unreadable files and grid mismatches.
class MaskError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Pixel {
    int row = 0;
    int col = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Foreground/background raster. Storage is one byte per pixel (0 or 1),
/// row-major, so foreground coordinates are unique by construction.
class BinaryMask {
public:
    BinaryMask() = default;

    /// All-background mask. Throws MaskError for non-positive dimensions.
    BinaryMask(int width, int height);

    /// Throws if any coordinate falls outside the grid.
    static BinaryMask from_pixels(int width, int height, std::span<const Pixel> foreground);

    /// `values` is row-major with width*height entries; nonzero means foreground.
    static BinaryMask from_values(int width, int height, std::span<const std::uint8_t> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }
    bool empty_grid() const noexcept { return bits_.empty(); }

    bool at(int row, int col) const;
    void set(int row, int col, bool value = true);

    /// Unchecked row-major access.
    bool operator[](std::size_t index) const noexcept { return bits_[index] != 0; }

    std::size_t count() const noexcept;
    bool is_empty() const noexcept { return count() == 0; }
    std::vector<Pixel> foreground() const;

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool same_grid(const BinaryMask& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Square grid that every mask is resampled onto before agreement analysis.
struct CanonicalGrid {
    static constexpr int kDefaultSide = 256;
    int side = kDefaultSide;

    bool contains(const BinaryMask& mask) const noexcept {
        return mask.width() == side && mask.height() == side;
    }
};

/// Reads an 8- or 16-bit PNG. Gray (with or without alpha) is taken as is;
/// colour images are accepted only when every pixel has R == G == B.
/// A pixel is foreground iff its value is > 0.
BinaryMask load_mask(const std::filesystem::path& path);

/// Writes 8-bit gray PNG, foreground 255 and background 0.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// 8-bit single-channel raster, used for synthetic images.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

GrayImage load_gray_image(const std::filesystem::path& path);
void save_gray_image(const GrayImage& image, const std::filesystem::path& path);

/// Source index for output index `i` under centre-aligned nearest-neighbour
/// mapping: floor((i + 0.5) * src / dst), clamped to src - 1.
int nearest_source_index(int i, int src, int dst) noexcept;

BinaryMask resize_nearest(const BinaryMask& mask, CanonicalGrid target);
GrayImage resize_nearest(const GrayImage& image, int width, int height);

}  // namespace iaa

#pragma once

// Pairwise agreement between binary masks (Dice overlap, symmetric
// Euclidean Hausdorff distance) and per-image aggregation.

#include "iaa/mask.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iaa {

class AgreementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Hausdorff distance requested on an empty mask.
class UndefinedDistance : public AgreementError {
public:
    using AgreementError::AgreementError;
};

/// Integer pieces of the Dice ratio: dice = 2 * intersection / total.
struct DiceCounts {
    std::uint64_t intersection = 0;
    std::uint64_t total = 0;  // |A| + |B|

    /// Both-empty masks agree perfectly; one-empty gives 0.
    double value() const noexcept {
        return total == 0 ? 1.0 : 2.0 * static_cast<double>(intersection) / static_cast<double>(total);
    }
};

DiceCounts dice_counts(const BinaryMask& a, const BinaryMask& b);
double dice(const BinaryMask& a, const BinaryMask& b);

/// Squared Euclidean distance from each pixel to the nearest foreground
/// pixel of `mask` (exact, separable lower-envelope transform). Values are
/// integers stored in int64; empty masks throw UndefinedDistance.
std::vector<std::int64_t> squared_distance_transform(const BinaryMask& mask);

/// max over foreground x of `from` of the distance to the nearest
/// foreground pixel of `to`.
double directed_hausdorff(const BinaryMask& from, const BinaryMask& to);

double hausdorff(const BinaryMask& a, const BinaryMask& b);

struct AgreementRecord {
    std::size_t mask_index_a = 0;  // always < mask_index_b
    std::size_t mask_index_b = 0;
    double dice = 0.0;
    std::optional<double> hausdorff;  // empty when either mask has no foreground

    bool hausdorff_defined() const noexcept { return hausdorff.has_value(); }
};

/// One record per unordered pair in lexicographic (a, b) order. Uses up to
/// `threads` workers; the output does not depend on the thread count.
std::vector<AgreementRecord> pairwise_agreements(std::span<const BinaryMask> masks, unsigned threads = 1);

struct IaaScore {
    std::string image_id;
    double value = 0.0;  // mean pairwise Dice
    std::size_t pair_count = 0;
};

IaaScore aggregate_iaa(std::span<const AgreementRecord> records, std::string image_id = {});

struct HausdorffSummary {
    double mean = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;  // pairs with undefined distance
};

/// Mean of the defined pairwise distances; throws if none is defined.
HausdorffSummary aggregate_hausdorff(std::span<const AgreementRecord> records);

}  // namespace iaa

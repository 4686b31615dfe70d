#pragma once

// Multi-annotator dataset model: manifest loading, Dice-range binning,
// stratified train/valid/test splitting and factor-conditioned agreement
// tables (same vs different annotator, tool, skill).

#include "iaa/agreement.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iaa {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// T1 manual polygon, T2 semi-automated flood fill, T3 automated then reviewed.
enum class Tool { T1, T2, T3 };
/// S1 expert, S2 novice.
enum class Skill { S1, S2 };

std::string_view to_string(Tool tool) noexcept;
std::string_view to_string(Skill skill) noexcept;
Tool parse_tool(std::string_view code);
Skill parse_skill(std::string_view code);

struct MaskRecord {
    std::filesystem::path mask_path;
    std::string annotator_id;
    Tool tool = Tool::T1;
    Skill skill = Skill::S1;
};

struct ImageRecord {
    std::string image_id;
    std::filesystem::path image_path;
    std::string diagnosis;
    bool malignant = false;
    std::vector<MaskRecord> masks;
};

struct ManifestOptions {
    /// When false, missing files produce warnings instead of errors.
    bool require_files = true;
};

struct Manifest {
    std::vector<ImageRecord> images;
    std::vector<std::string> warnings;

    std::size_t mask_count() const noexcept;
};

/// Relative paths inside the manifest are resolved against its directory.
Manifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

/// Parses manifest JSON text. Paths are resolved against `base_dir`.
Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir,
                        const ManifestOptions& options = {});

/// Writes `images` as manifest JSON, with paths relative to the manifest's
/// directory where possible.
void save_manifest(const std::vector<ImageRecord>& images, const std::filesystem::path& path);

enum class DiceBin { Low, Medium, High };

std::string_view to_string(DiceBin bin) noexcept;

/// low: < 0.5, high: > 0.8, medium: the closed interval [0.5, 0.8].
DiceBin dice_bin(double iaa_value) noexcept;
inline DiceBin dice_bin(const IaaScore& score) noexcept { return dice_bin(score.value); }

enum class Fold { Train, Valid, Test };

std::string_view to_string(Fold fold) noexcept;
Fold parse_fold(std::string_view name);

struct Stratum {
    bool malignant = false;
    std::size_t mask_count = 0;
    DiceBin bin = DiceBin::Medium;

    friend auto operator<=>(const Stratum&, const Stratum&) = default;
};

/// e.g. "malignant/3/low"
std::string to_string(const Stratum& s);

struct SplitAssignment {
    std::string image_id;
    Fold fold = Fold::Train;
    Stratum stratum;
};

struct SplitRatios {
    double train = 0.70;
    double valid = 0.15;
    double test = 0.15;

    std::array<double, 3> as_array() const noexcept { return {train, valid, test}; }
};

using IaaMap = std::map<std::string, IaaScore>;

/// Per stratum: shuffle with `seed`, give each fold floor(n * ratio) items,
/// then hand out the remaining items one per fold, only to folds whose
/// quota has a fractional part, preferring the fold furthest below its
/// global target (ties: train, valid, test). Every per-stratum count is
/// therefore within one item of its exact quota. Output is sorted by
/// image_id and is a pure function of (records, iaa, ratios, seed).
std::vector<SplitAssignment> stratified_split(const std::vector<ImageRecord>& records, const IaaMap& iaa,
                                              const SplitRatios& ratios, std::uint64_t seed);

/// Count of items per fold for a single stratum of size n when no other
/// strata compete for remainders (largest fractional part first).
std::array<std::size_t, 3> stratum_fold_counts(std::size_t n, const SplitRatios& ratios);

enum class Factor { Annotator, Tool, Skill };
enum class Relation { Same, Different };
enum class MalignancySubset { All, Benign, Malignant };

std::string_view to_string(Factor f) noexcept;
std::string_view to_string(Relation r) noexcept;
std::string_view to_string(MalignancySubset m) noexcept;

/// Relation of two masks under `factor`.
Relation classify_pair(const MaskRecord& a, const MaskRecord& b, Factor factor) noexcept;

struct FactorRow {
    Factor factor = Factor::Annotator;
    Relation relation = Relation::Same;
    MalignancySubset subset = MalignancySubset::All;
    std::size_t n_pairs = 0;
    double mean_dice = 0.0;
    double std_dice = 0.0;  // sample SD; 0 for a single pair
    // Same-vs-different comparison for (factor, subset); shared by both rows.
    std::optional<double> mann_whitney_p;
    std::optional<double> cohens_d;  // same minus different

    bool empty() const noexcept { return n_pairs == 0; }
};

struct FactorTable {
    std::vector<FactorRow> rows;  // ordered by factor, subset, relation

    const FactorRow& row(Factor f, Relation r, MalignancySubset m) const;
};

using AgreementMap = std::map<std::string, std::vector<AgreementRecord>>;

/// Every agreement record must name an image in `records` and mask indices
/// within that image's mask list.
FactorTable factor_table(const std::vector<ImageRecord>& records, const AgreementMap& agreements);

}  // namespace iaa

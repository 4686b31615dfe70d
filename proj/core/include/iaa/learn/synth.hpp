#pragma once

// Desk-scale synthetic stand-in for a multi-annotator lesion dataset. Each
// image holds one blob whose boundary irregularity and blur grow with a
// latent score r; malignant images draw larger r. Annotator masks perturb
// the true boundary by an amount that also grows with r, so malignant IAA is
// stochastically lower than benign IAA.

#include "iaa/agreement.hpp"
#include "iaa/dataset.hpp"
#include "iaa/learn/trainer.hpp"
#include "iaa/mask.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace iaa::learn {

inline constexpr std::size_t kMinSynthImages = 20;

struct SynthConfig {
    std::size_t n = 600;
    std::uint64_t seed = 0;
    int side = 32;
    double malignant_fraction = 0.4;

    void validate() const;
};

struct SynthImage {
    std::string image_id;
    std::string diagnosis;  // "nevus" or "melanoma"
    bool malignant = false;
    double irregularity = 0.0;
    GrayImage image;
    std::vector<BinaryMask> masks;
    std::vector<MaskRecord> mask_meta;  // paths empty until written
    IaaScore iaa;
};

struct SynthDataset {
    int side = 0;
    std::vector<SynthImage> images;
};

SynthDataset synth_generate(const SynthConfig& config);

/// Writes images/<id>.png, masks/<id>_<k>.png and manifest.json under
/// `dir`; returns the manifest records.
std::vector<ImageRecord> write_synth(const SynthDataset& data, const std::filesystem::path& dir);

/// Pixels scaled to [0, 1]; labels are 1 for malignant.
TrainingData to_training_data(const SynthDataset& data);

/// Loads and resamples the images of `records` onto a side x side grid.
/// IAA targets are attached when `iaa` is given; every record must then
/// have a score.
TrainingData load_training_data(const std::vector<ImageRecord>& records, const IaaMap* iaa, int side);

}  // namespace iaa::learn

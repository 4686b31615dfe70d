#include "iaa/learn/synth.hpp"

#include "iaa/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>

namespace iaa::learn {

namespace {

constexpr std::uint64_t kClassTag = 0x434C415353ULL;
constexpr std::uint64_t kImageTag = 0x494D414745ULL;
constexpr int kAnnotators = 15;

// Images with 2, 3, 4, 5 masks in the reference collection.
constexpr std::array<double, 4> kMaskCountWeights{2130.0, 209.0, 51.0, 4.0};

struct Harmonic {
    int k;
    double amplitude;
    double phase;
};

double radius_at(double theta, double base, const std::vector<Harmonic>& hs) {
    double s = 0.0;
    for (const auto& h : hs) s += h.amplitude * std::cos(h.k * theta + h.phase);
    return base * (1.0 + s);
}

std::string annotator_name(int a) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "A%02d", a + 1);
    return buf;
}

Skill annotator_skill(int a) { return a < 5 ? Skill::S1 : Skill::S2; }

SynthImage make_image(std::size_t index, bool malignant, int side, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = side / 32.0;

    SynthImage img;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%05zu", index);
    img.image_id = id;
    img.malignant = malignant;
    img.diagnosis = malignant ? "melanoma" : "nevus";
    const double r = std::clamp((malignant ? 0.65 : 0.35) + 0.2 * normal(rng), 0.0, 1.0);
    img.irregularity = r;

    const double cx = side / 2.0 + 2.0 * u * (unit(rng) - 0.5);
    const double cy = side / 2.0 + 2.0 * u * (unit(rng) - 0.5);
    const double base = u * (7.0 + 2.0 * unit(rng));
    std::vector<Harmonic> shape;
    for (int k = 3; k <= 6; ++k) {
        shape.push_back({k, r * (0.04 + 0.08 * unit(rng)), 2.0 * std::numbers::pi * unit(rng)});
    }
    const double blur = u * (0.5 + 4.0 * r);

    const double background = 0.75 + 0.05 * normal(rng);
    const double contrast = 0.45 + 0.05 * normal(rng);
    img.image = GrayImage{side, side, std::vector<std::uint8_t>(static_cast<std::size_t>(side) * side)};
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            const double edge = radius_at(std::atan2(dy, dx), base, shape) - std::hypot(dx, dy);
            const double inside = 1.0 / (1.0 + std::exp(-edge / blur));
            const double v = background - contrast * inside + 0.04 * normal(rng);
            img.image.pixels[static_cast<std::size_t>(y) * side + x] =
                static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        }
    }

    std::discrete_distribution<int> mask_count(kMaskCountWeights.begin(), kMaskCountWeights.end());
    const int k_masks = 2 + mask_count(rng);
    std::uniform_int_distribution<int> pick_annotator(0, kAnnotators - 1);
    std::uniform_int_distribution<int> pick_tool(0, 2);

    // Each annotator traces where the blurred edge crosses their own
    // intensity threshold, so boundary placement spreads with the blur
    // width. Repeat masks by one annotator share that threshold. Tools
    // differ in how much of the irregular outline they follow.
    std::map<int, double> annotator_threshold;
    for (int m = 0; m < k_masks; ++m) {
        const int a = pick_annotator(rng);
        const auto tool = static_cast<Tool>(pick_tool(rng));
        const Skill skill = annotator_skill(a);
        if (!annotator_threshold.contains(a)) {
            const double sd = skill == Skill::S1 ? 0.12 : 0.2;
            annotator_threshold[a] = std::clamp(0.5 + sd * normal(rng), 0.05, 0.95);
        }
        const double t = std::clamp(annotator_threshold[a] + 0.03 * normal(rng), 0.02, 0.98);
        const double shift = -blur * std::log(t / (1.0 - t)) + 0.2 * u * normal(rng);
        const double fidelity = (tool == Tool::T1 ? 0.7 : tool == Tool::T2 ? 1.0 : 0.85) * (1.0 + 0.1 * normal(rng));
        std::vector<Harmonic> traced = shape;
        for (auto& h : traced) h.amplitude *= fidelity;

        BinaryMask mask(side, side);
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                if (std::hypot(dx, dy) <= radius_at(std::atan2(dy, dx), base, traced) + shift) mask.set(y, x);
            }
        }
        img.masks.push_back(std::move(mask));
        img.mask_meta.push_back(MaskRecord{{}, annotator_name(a), tool, skill});
    }
    img.iaa = aggregate_iaa(pairwise_agreements(img.masks), img.image_id);
    return img;
}

}  // namespace

void SynthConfig::validate() const {
    if (n < kMinSynthImages) throw LearnError("synthetic set needs at least " + std::to_string(kMinSynthImages) + " images");
    if (side < 8) throw LearnError("synthetic image side must be at least 8");
    if (!(malignant_fraction > 0.0 && malignant_fraction < 1.0)) {
        throw LearnError("malignant fraction must lie strictly between 0 and 1");
    }
}

SynthDataset synth_generate(const SynthConfig& config) {
    config.validate();
    const auto n_malignant = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(config.malignant_fraction * static_cast<double>(config.n))), 1,
        config.n - 1);
    std::vector<std::size_t> order(config.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng class_rng = make_named_stream(config.seed, kClassTag);
    std::shuffle(order.begin(), order.end(), class_rng);
    std::vector<bool> malignant(config.n, false);
    for (std::size_t i = 0; i < n_malignant; ++i) malignant[order[i]] = true;

    SynthDataset out;
    out.side = config.side;
    const std::uint64_t image_seed = mix_seed(config.seed ^ kImageTag);
    for (std::size_t i = 0; i < config.n; ++i) {
        Rng rng = make_stream(image_seed, i);
        out.images.push_back(make_image(i, malignant[i], config.side, rng));
    }
    return out;
}

std::vector<ImageRecord> write_synth(const SynthDataset& data, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");
    std::vector<ImageRecord> records;
    for (const auto& img : data.images) {
        ImageRecord rec;
        rec.image_id = img.image_id;
        rec.image_path = dir / "images" / (img.image_id + ".png");
        rec.diagnosis = img.diagnosis;
        rec.malignant = img.malignant;
        save_gray_image(img.image, rec.image_path);
        for (std::size_t k = 0; k < img.masks.size(); ++k) {
            MaskRecord m = img.mask_meta[k];
            m.mask_path = dir / "masks" / (img.image_id + "_" + std::to_string(k) + ".png");
            save_mask(img.masks[k], m.mask_path);
            rec.masks.push_back(std::move(m));
        }
        records.push_back(std::move(rec));
    }
    save_manifest(records, dir / "manifest.json");
    return records;
}

TrainingData to_training_data(const SynthDataset& data) {
    TrainingData t;
    t.side = data.side;
    for (const auto& img : data.images) {
        t.ids.push_back(img.image_id);
        for (std::uint8_t p : img.image.pixels) t.pixels.push_back(p / 255.0);
        t.labels.push_back(img.malignant ? 1 : 0);
        t.iaa.push_back(img.iaa.value);
        t.malignant.push_back(img.malignant ? 1 : 0);
    }
    return t;
}

TrainingData load_training_data(const std::vector<ImageRecord>& records, const IaaMap* iaa, int side) {
    if (side <= 0) throw LearnError("grid side must be positive");
    TrainingData t;
    t.side = side;
    for (const auto& rec : records) {
        GrayImage img = load_gray_image(rec.image_path);
        if (img.width != side || img.height != side) img = resize_nearest(img, side, side);
        t.ids.push_back(rec.image_id);
        for (std::uint8_t p : img.pixels) t.pixels.push_back(p / 255.0);
        t.labels.push_back(rec.malignant ? 1 : 0);
        t.malignant.push_back(rec.malignant ? 1 : 0);
        if (iaa) {
            const auto it = iaa->find(rec.image_id);
            if (it == iaa->end()) throw LearnError("no IAA score for image " + rec.image_id);
            t.iaa.push_back(it->second.value);
        }
    }
    return t;
}

}  // namespace iaa::learn

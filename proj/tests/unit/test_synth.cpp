#include "iaa/learn/synth.hpp"
#include "iaa/stats.hpp"

#include "temp_dir.hpp"

#include <gtest/gtest.h>

using namespace iaa;
using namespace iaa::learn;
using testing_support::TempDir;

TEST(Synth, ConfigValidation) {
    SynthConfig c;
    c.n = 19;
    EXPECT_THROW(c.validate(), LearnError);
    c = {};
    c.malignant_fraction = 1.0;
    EXPECT_THROW(c.validate(), LearnError);
    c = {};
    c.side = 4;
    EXPECT_THROW(c.validate(), LearnError);
}

TEST(Synth, DeterministicPerSeed) {
    SynthConfig c;
    c.n = 40;
    c.seed = 3;
    const auto a = synth_generate(c);
    const auto b = synth_generate(c);
    c.seed = 4;
    const auto other = synth_generate(c);
    ASSERT_EQ(a.images.size(), 40u);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.images.size(); ++i) {
        EXPECT_EQ(a.images[i].image.pixels, b.images[i].image.pixels);
        EXPECT_EQ(a.images[i].masks, b.images[i].masks);
        EXPECT_EQ(a.images[i].iaa.value, b.images[i].iaa.value);
        any_diff |= a.images[i].image.pixels != other.images[i].image.pixels;
    }
    EXPECT_TRUE(any_diff);
}

TEST(Synth, SelfConsistent) {
    SynthConfig c;
    c.n = 100;
    c.seed = 1;
    const auto d = synth_generate(c);
    std::size_t malignant = 0;
    for (const auto& img : d.images) {
        malignant += img.malignant;
        EXPECT_EQ(img.diagnosis, img.malignant ? "melanoma" : "nevus");
        ASSERT_GE(img.masks.size(), 2u);
        ASSERT_LE(img.masks.size(), 5u);
        ASSERT_EQ(img.mask_meta.size(), img.masks.size());
        EXPECT_EQ(img.image.width, 32);
        // Stored IAA is the mean pairwise Dice of the stored masks.
        EXPECT_DOUBLE_EQ(img.iaa.value, aggregate_iaa(pairwise_agreements(img.masks)).value);
        EXPECT_EQ(img.iaa.pair_count, img.masks.size() * (img.masks.size() - 1) / 2);
        for (const auto& m : img.mask_meta) EXPECT_EQ(m.skill == Skill::S1, m.annotator_id <= "A05");
    }
    EXPECT_EQ(malignant, 40u);
}

TEST(Synth, BenignAgreementIsHigher) {
    SynthConfig c;
    c.n = 300;
    c.seed = 2;
    const auto d = synth_generate(c);
    std::vector<double> benign, malignant;
    for (const auto& img : d.images) (img.malignant ? malignant : benign).push_back(img.iaa.value);
    EXPECT_GT(stats::Sample(benign).mean(), stats::Sample(malignant).mean());
}

TEST(Synth, WrittenDatasetLoadsBack) {
    SynthConfig c;
    c.n = 20;
    c.side = 16;
    const auto d = synth_generate(c);
    TempDir dir;
    write_synth(d, dir.path());
    const auto m = load_manifest(dir / "manifest.json");
    ASSERT_EQ(m.images.size(), 20u);
    for (std::size_t i = 0; i < 20; ++i) {
        ASSERT_EQ(m.images[i].masks.size(), d.images[i].masks.size());
        EXPECT_EQ(load_mask(m.images[i].masks[0].mask_path), d.images[i].masks[0]);
    }
    IaaMap iaa;
    for (const auto& img : d.images) iaa[img.image_id] = img.iaa;
    const auto loaded = load_training_data(m.images, &iaa, 16);
    const auto direct = to_training_data(d);
    EXPECT_EQ(loaded.pixels, direct.pixels);
    EXPECT_EQ(loaded.iaa, direct.iaa);
    EXPECT_EQ(loaded.labels, direct.labels);

    const auto upsampled = load_training_data(m.images, nullptr, 32);
    EXPECT_EQ(upsampled.pixels.size(), 20u * 32 * 32);
    EXPECT_FALSE(upsampled.has_iaa());
    iaa.erase(d.images[3].image_id);
    EXPECT_THROW(load_training_data(m.images, &iaa, 16), LearnError);
}

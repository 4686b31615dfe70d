#pragma once

// JSON checkpoint: format tag, model kind, architecture, named parameter
// arrays, normalisation running statistics, RNG state and the training
// configuration that produced it.

#include "iaa/learn/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace iaa::learn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    ModelKind kind = ModelKind::MT;
    Network network;
    TrainConfig train_config;
    std::uint64_t rng_seed = 0;
    std::uint64_t rng_steps = 0;
    int best_epoch = -1;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace iaa::learn

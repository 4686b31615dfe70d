#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iaakit {

/// Counts warnings for the closing summary line.
class Reporter {
public:
    void warn(const std::string& message);
    std::size_t warnings() const noexcept { return warnings_; }

private:
    std::size_t warnings_ = 0;
};

struct GlobalOptions {
    std::filesystem::path manifest;
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    int grid = 256;
    std::size_t iterations = 1000;
    double alpha_level = 0.001;
    unsigned threads = 1;

    /// Throws when a stochastic subcommand runs without --seed.
    std::uint64_t require_seed(const char* command) const;
    const std::filesystem::path& require_manifest(const char* command) const;
};

struct IaaOptions {
    bool lazy = false;  // missing files become warnings
};

struct StatsOptions {
    std::filesystem::path iaa;  // defaults to <out>/iaa.json
    std::string group_by = "malignancy";  // or "diagnosis"
    std::vector<std::string> groups;      // two values of group_by; default benign, malignant
};

struct SplitOptions {
    std::filesystem::path iaa;
    double train = 0.70;
    double valid = 0.15;
    double test = 0.15;
};

struct TableOptions {
    std::filesystem::path pairs;  // defaults to <out>/pairs.csv
};

struct TrainOptions {
    std::string model = "mt";
    std::vector<double> alphas{0.9};
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double lr_decay_factor = 0.1;
    int lr_decay_every = 10;
    std::string selection;  // empty: default rule for the model kind
    std::filesystem::path init;
    bool freeze_regression_head = false;
    double focal_gamma = 2.0;
    double smooth_l1_beta = 1.0;
    std::filesystem::path iaa;
    bool no_iaa = false;
    std::filesystem::path split;
    int input_side = 32;
    std::vector<int> widths{8, 16, 32};
    int head_width = 256;
    std::string pooling = "max";
    double dropout = 0.5;
};

struct EvalOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path predictions;
    std::filesystem::path iaa;
    std::filesystem::path split;
    std::string fold = "test";
    int n_classes = 2;
};

struct SynthOptions {
    std::size_t n = 600;
    int side = 32;
    double malignant_fraction = 0.4;
};

void cmd_iaa(const GlobalOptions& g, const IaaOptions& o, Reporter& rep);
void cmd_stats(const GlobalOptions& g, const StatsOptions& o, Reporter& rep);
void cmd_split(const GlobalOptions& g, const SplitOptions& o, Reporter& rep);
void cmd_table(const GlobalOptions& g, const TableOptions& o, Reporter& rep);
void cmd_train(const GlobalOptions& g, const TrainOptions& o, Reporter& rep);
void cmd_eval(const GlobalOptions& g, const EvalOptions& o, Reporter& rep);
void cmd_synth(const GlobalOptions& g, const SynthOptions& o, Reporter& rep);

}  // namespace iaakit

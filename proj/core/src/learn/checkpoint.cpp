#include "iaa/learn/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace iaa::learn {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "iaakit-checkpoint";

json config_json(const NetworkConfig& c) {
    return {{"input_side", c.input_side},
            {"widths", c.widths},
            {"head_width", c.head_width},
            {"n_classes", c.n_classes},
            {"regression_head", c.regression_head},
            {"diagnosis_head", c.diagnosis_head},
            {"dropout", c.dropout},
            {"bn_momentum", c.bn_momentum},
            {"pooling", c.pooling == Pooling::Max ? "max" : "avg"}};
}

NetworkConfig config_from(const json& j) {
    NetworkConfig c;
    c.input_side = j.at("input_side").get<int>();
    c.widths = j.at("widths").get<std::vector<int>>();
    c.head_width = j.at("head_width").get<int>();
    c.n_classes = j.at("n_classes").get<int>();
    c.regression_head = j.at("regression_head").get<bool>();
    c.diagnosis_head = j.at("diagnosis_head").get<bool>();
    c.dropout = j.at("dropout").get<double>();
    c.bn_momentum = j.at("bn_momentum").get<double>();
    const auto pooling = j.at("pooling").get<std::string>();
    if (pooling != "max" && pooling != "avg") throw LearnError("checkpoint: unknown pooling '" + pooling + "'");
    c.pooling = pooling == "max" ? Pooling::Max : Pooling::Average;
    return c;
}

json train_json(const TrainConfig& t) {
    json j = {{"alpha", t.alpha},
              {"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"learning_rate", t.learning_rate},
              {"momentum", t.momentum},
              {"weight_decay", t.weight_decay},
              {"lr_decay_factor", t.lr_decay_factor},
              {"lr_decay_every", t.lr_decay_every},
              {"seed", t.seed},
              {"frozen_regression_head", t.frozen_regression_head},
              {"focal_gamma", t.focal_gamma},
              {"smooth_l1_beta", t.smooth_l1_beta}};
    j["model_selection"] = t.model_selection ? json(std::string(to_string(*t.model_selection))) : json(nullptr);
    return j;
}

TrainConfig train_from(const json& j) {
    TrainConfig t;
    t.alpha = j.at("alpha").get<double>();
    t.epochs = j.at("epochs").get<int>();
    t.batch_size = j.at("batch_size").get<int>();
    t.learning_rate = j.at("learning_rate").get<double>();
    t.momentum = j.at("momentum").get<double>();
    t.weight_decay = j.at("weight_decay").get<double>();
    t.lr_decay_factor = j.at("lr_decay_factor").get<double>();
    t.lr_decay_every = j.at("lr_decay_every").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.frozen_regression_head = j.at("frozen_regression_head").get<bool>();
    t.focal_gamma = j.at("focal_gamma").get<double>();
    t.smooth_l1_beta = j.at("smooth_l1_beta").get<double>();
    if (!j.at("model_selection").is_null()) {
        t.model_selection = parse_model_selection(j.at("model_selection").get<std::string>());
    }
    return t;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
    json params = json::object();
    for (const Param* p : ckpt.network.parameters()) params[p->name] = p->value;
    json buffers = json::object();
    for (const auto& [name, buf] : ckpt.network.buffers()) buffers[name] = *buf;
    json j = {{"format", kFormat},
              {"version", kCheckpointVersion},
              {"model_kind", std::string(to_string(ckpt.kind))},
              {"network", config_json(ckpt.network.config())},
              {"parameters", params},
              {"buffers", buffers},
              {"rng", {{"seed", ckpt.rng_seed}, {"steps", ckpt.rng_steps}}},
              {"best_epoch", ckpt.best_epoch},
              {"train_config", train_json(ckpt.train_config)}};
    return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw LearnError(std::string("checkpoint: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormat) throw LearnError("checkpoint: not an iaakit checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion) throw LearnError("checkpoint: unsupported version");

        Checkpoint ckpt;
        ckpt.kind = parse_model_kind(j.at("model_kind").get<std::string>());
        ckpt.network = Network(config_from(j.at("network")), 0);
        const json& params = j.at("parameters");
        for (Param* p : ckpt.network.parameters()) {
            auto values = params.at(p->name).get<std::vector<double>>();
            if (values.size() != p->value.size()) throw LearnError("checkpoint: size mismatch for " + p->name);
            p->value = std::move(values);
        }
        if (params.size() != ckpt.network.parameters().size()) throw LearnError("checkpoint: unexpected parameters");
        const json& buffers = j.at("buffers");
        for (auto& [name, buf] : ckpt.network.buffers()) {
            auto values = buffers.at(name).get<std::vector<double>>();
            if (values.size() != buf->size()) throw LearnError("checkpoint: size mismatch for " + name);
            *buf = std::move(values);
        }
        ckpt.rng_seed = j.at("rng").at("seed").get<std::uint64_t>();
        ckpt.rng_steps = j.at("rng").at("steps").get<std::uint64_t>();
        ckpt.best_epoch = j.at("best_epoch").get<int>();
        ckpt.train_config = train_from(j.at("train_config"));
        return ckpt;
    } catch (const json::exception& e) {
        throw LearnError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw LearnError("cannot write checkpoint " + path.string());
    out << checkpoint_to_json(ckpt) << '\n';
    if (!out) throw LearnError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LearnError("cannot read checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

}  // namespace iaa::learn

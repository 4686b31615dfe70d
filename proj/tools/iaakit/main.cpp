#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <exception>
#include <functional>

int main(int argc, char** argv) {
    using namespace iaakit;

    CLI::App app{"iaakit: inter-annotator agreement analytics and multi-task training"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--manifest", g.manifest, "Manifest JSON");
    app.add_option("--out", g.out, "Output directory")->envname("IAAKIT_OUT")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Seed for stochastic subcommands");
    app.add_option("--grid", g.grid, "Canonical grid side for masks")->capture_default_str();
    app.add_option("--iterations", g.iterations, "Bootstrap iterations")->capture_default_str();
    app.add_option("--alpha-level", g.alpha_level, "Significance level for verdicts")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads")->envname("IAAKIT_THREADS")->capture_default_str();

    std::function<void(Reporter&)> run;

    IaaOptions iaa_opts;
    auto* iaa_cmd = app.add_subcommand("iaa", "Pairwise Dice/Hausdorff and per-image IAA");
    iaa_cmd->add_flag("--lazy", iaa_opts.lazy, "Skip images whose files are missing instead of failing");
    iaa_cmd->callback([&] { run = [&](Reporter& r) { cmd_iaa(g, iaa_opts, r); }; });

    StatsOptions stats_opts;
    auto* stats_cmd = app.add_subcommand("stats", "Mann-Whitney, Cohen's d and FOSD tests between two groups");
    stats_cmd->add_option("--iaa", stats_opts.iaa, "IAA JSON (default <out>/iaa.json)");
    stats_cmd->add_option("--group-by", stats_opts.group_by, "malignancy or diagnosis")->capture_default_str();
    stats_cmd->add_option("--groups", stats_opts.groups, "Two group values to compare")->delimiter(',');
    stats_cmd->callback([&] { run = [&](Reporter& r) { cmd_stats(g, stats_opts, r); }; });

    SplitOptions split_opts;
    auto* split_cmd = app.add_subcommand("split", "Stratified train/valid/test split");
    split_cmd->add_option("--iaa", split_opts.iaa, "IAA JSON (default <out>/iaa.json)");
    split_cmd->add_option("--train", split_opts.train, "Train ratio")->capture_default_str();
    split_cmd->add_option("--valid", split_opts.valid, "Valid ratio")->capture_default_str();
    split_cmd->add_option("--test", split_opts.test, "Test ratio")->capture_default_str();
    split_cmd->callback([&] { run = [&](Reporter& r) { cmd_split(g, split_opts, r); }; });

    TableOptions table_opts;
    auto* table_cmd = app.add_subcommand("table", "Intra/inter-factor agreement table");
    table_cmd->add_option("--pairs", table_opts.pairs, "Pairs CSV (default <out>/pairs.csv)");
    table_cmd->callback([&] { run = [&](Reporter& r) { cmd_table(g, table_opts, r); }; });

    TrainOptions t;
    auto* train_cmd = app.add_subcommand("train", "Train an M1, M2 or multi-task model");
    train_cmd->add_option("--model", t.model, "m1, m2 or mt")->check(CLI::IsMember({"m1", "m2", "mt"}))->capture_default_str();
    train_cmd->add_option("--alpha", t.alphas, "Loss weight; several values run a sweep")->delimiter(',');
    train_cmd->add_option("--epochs", t.epochs)->capture_default_str();
    train_cmd->add_option("--batch-size", t.batch_size)->capture_default_str();
    train_cmd->add_option("--lr", t.learning_rate, "Learning rate")->capture_default_str();
    train_cmd->add_option("--momentum", t.momentum)->capture_default_str();
    train_cmd->add_option("--weight-decay", t.weight_decay)->capture_default_str();
    train_cmd->add_option("--lr-decay-factor", t.lr_decay_factor)->capture_default_str();
    train_cmd->add_option("--lr-decay-every", t.lr_decay_every, "Epochs between decays")->capture_default_str();
    train_cmd->add_option("--selection", t.selection, "min-val-mae or max-val-balanced-accuracy");
    train_cmd->add_option("--init", t.init, "Checkpoint to fine-tune from");
    train_cmd->add_flag("--freeze-regression-head", t.freeze_regression_head);
    train_cmd->add_option("--focal-gamma", t.focal_gamma)->capture_default_str();
    train_cmd->add_option("--smooth-l1-beta", t.smooth_l1_beta)->capture_default_str();
    train_cmd->add_option("--iaa", t.iaa, "IAA JSON (default <out>/iaa.json when present)");
    train_cmd->add_flag("--no-iaa", t.no_iaa, "Ignore IAA targets");
    train_cmd->add_option("--split", t.split, "Split CSV (default <out>/split.csv)");
    train_cmd->add_option("--input-side", t.input_side, "Network input side")->capture_default_str();
    train_cmd->add_option("--widths", t.widths, "Backbone block widths")->delimiter(',');
    train_cmd->add_option("--head-width", t.head_width)->capture_default_str();
    train_cmd->add_option("--pooling", t.pooling, "max or avg")->capture_default_str();
    train_cmd->add_option("--dropout", t.dropout)->capture_default_str();
    train_cmd->callback([&] { run = [&](Reporter& r) { cmd_train(g, t, r); }; });

    EvalOptions e;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint or a predictions CSV on one fold");
    eval_cmd->add_option("--checkpoint", e.checkpoint);
    eval_cmd->add_option("--predictions", e.predictions, "CSV with image_id, z_hat and/or prob_0..prob_{k-1}");
    eval_cmd->add_option("--iaa", e.iaa, "IAA JSON (default <out>/iaa.json when present)");
    eval_cmd->add_option("--split", e.split, "Split CSV (default <out>/split.csv)");
    eval_cmd->add_option("--fold", e.fold, "train, valid or test")->capture_default_str();
    eval_cmd->add_option("--classes", e.n_classes, "Class count for --predictions")->capture_default_str();
    eval_cmd->callback([&] { run = [&](Reporter& r) { cmd_eval(g, e, r); }; });

    SynthOptions s;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic multi-annotator dataset");
    synth_cmd->add_option("--n", s.n, "Image count")->capture_default_str();
    synth_cmd->add_option("--side", s.side, "Image side in pixels")->capture_default_str();
    synth_cmd->add_option("--malignant-fraction", s.malignant_fraction)->capture_default_str();
    synth_cmd->callback([&] { run = [&](Reporter& r) { cmd_synth(g, s, r); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }
    if (*seed_opt) g.seed = seed;

    Reporter reporter;
    int code = 0;
    try {
        std::filesystem::create_directories(g.out);
        run(reporter);
    } catch (const std::exception& err) {
        fmt::print(stderr, "error: {}\n", err.what());
        code = 1;
    }
    fmt::print("summary: {} warning(s), {} error(s)\n", reporter.warnings(), code);
    return code;
}

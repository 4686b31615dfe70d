#include "commands.hpp"

#include "iaa/agreement.hpp"
#include "iaa/dataset.hpp"
#include "iaa/learn/checkpoint.hpp"
#include "iaa/learn/synth.hpp"
#include "iaa/mask.hpp"
#include "iaa/report.hpp"
#include "iaa/stats.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace iaakit {

namespace fs = std::filesystem;
using nlohmann::json;
using iaa::report::format_fixed6;

void Reporter::warn(const std::string& message) {
    ++warnings_;
    fmt::print(stderr, "warning: {}\n", message);
}

std::uint64_t GlobalOptions::require_seed(const char* command) const {
    if (!seed) throw std::runtime_error(std::string(command) + " is stochastic and needs --seed");
    return *seed;
}

const fs::path& GlobalOptions::require_manifest(const char* command) const {
    if (manifest.empty()) throw std::runtime_error(std::string(command) + " needs --manifest");
    return manifest;
}

namespace {

fs::path or_default(const fs::path& given, const fs::path& fallback) { return given.empty() ? fallback : given; }

/// Linear interpolation between order statistics.
double quantile(std::vector<double> sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string verdict(double p, double level) { return p < level ? "reject" : "fail to reject"; }

iaa::Manifest manifest_without_files(const fs::path& path) {
    // Stages that only need metadata tolerate missing image files silently.
    return iaa::load_manifest(path, {.require_files = false});
}

std::optional<iaa::IaaMap> optional_iaa(const fs::path& given, const fs::path& fallback) {
    if (!given.empty()) return iaa::report::read_iaa_json(given);
    if (fs::exists(fallback)) return iaa::report::read_iaa_json(fallback);
    return std::nullopt;
}

std::vector<iaa::ImageRecord> records_in_fold(const std::vector<iaa::ImageRecord>& images,
                                              const std::map<std::string, iaa::Fold>& split, iaa::Fold fold) {
    std::vector<iaa::ImageRecord> out;
    for (const auto& img : images) {
        const auto it = split.find(img.image_id);
        if (it != split.end() && it->second == fold) out.push_back(img);
    }
    return out;
}

json regression_json(const iaa::learn::RegressionMetrics& m) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"mae", m.mae},
            {"mse", m.mse},
            {"mae_benign", opt(m.mae_benign)},
            {"mse_benign", opt(m.mse_benign)},
            {"mae_malignant", opt(m.mae_malignant)},
            {"mse_malignant", opt(m.mse_malignant)}};
}

json report_json(const iaa::learn::EvalReport& r) {
    json j = {{"n", r.n}, {"warnings", r.warnings}};
    j["regression"] = r.regression ? regression_json(*r.regression) : json(nullptr);
    if (r.classification) {
        json recall = json::array();
        for (const auto& v : r.classification->recall) recall.push_back(v ? json(*v) : json(nullptr));
        j["classification"] = {{"balanced_accuracy", r.classification->balanced_accuracy},
                               {"auroc", r.classification->auroc ? json(*r.classification->auroc) : json(nullptr)},
                               {"recall", recall}};
    } else {
        j["classification"] = nullptr;
    }
    return j;
}

void write_json(const json& j, const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void print_report(const iaa::learn::EvalReport& r) {
    if (r.regression) {
        const auto& m = *r.regression;
        fmt::print("  MAE {:.6f}  MSE {:.6f}", m.mae, m.mse);
        if (m.mae_benign) fmt::print("  benign MAE {:.6f}", *m.mae_benign);
        if (m.mae_malignant) fmt::print("  malignant MAE {:.6f}", *m.mae_malignant);
        fmt::print("\n");
    }
    if (r.classification) {
        fmt::print("  balanced accuracy {:.6f}", r.classification->balanced_accuracy);
        if (r.classification->auroc) fmt::print("  AUROC {:.6f}", *r.classification->auroc);
        fmt::print("\n");
    }
}

std::string alpha_tag(double a) {
    std::string s = fmt::format("{:g}", a);
    std::replace(s.begin(), s.end(), '.', 'p');
    return "alpha_" + s;
}

}  // namespace

void cmd_iaa(const GlobalOptions& g, const IaaOptions& o, Reporter& rep) {
    const iaa::Manifest manifest = iaa::load_manifest(g.require_manifest("iaa"), {.require_files = !o.lazy});
    for (const auto& w : manifest.warnings) rep.warn(w);
    const iaa::CanonicalGrid grid{g.grid};
    if (grid.side <= 0) throw std::runtime_error("--grid must be positive");

    iaa::AgreementMap pairs;
    std::vector<iaa::report::ImageIaa> scores;
    std::size_t skipped = 0;
    for (const auto& img : manifest.images) {
        if (img.masks.size() < 2) {
            rep.warn(fmt::format("image {}: {} mask(s), need at least 2; skipped", img.image_id, img.masks.size()));
            ++skipped;
            continue;
        }
        try {
            std::vector<iaa::BinaryMask> masks;
            for (const auto& m : img.masks) masks.push_back(iaa::resize_nearest(iaa::load_mask(m.mask_path), grid));
            auto records = iaa::pairwise_agreements(masks, g.threads);
            iaa::report::ImageIaa entry{iaa::aggregate_iaa(records, img.image_id), std::nullopt};
            try {
                entry.hausdorff = iaa::aggregate_hausdorff(records);
            } catch (const iaa::AgreementError&) {
                rep.warn("image " + img.image_id + ": Hausdorff undefined for every pair (empty masks)");
            }
            pairs.emplace(img.image_id, std::move(records));
            scores.push_back(std::move(entry));
        } catch (const iaa::MaskError& e) {
            if (!o.lazy) throw std::runtime_error("image " + img.image_id + ": " + e.what());
            rep.warn("image " + img.image_id + ": " + e.what() + "; skipped");
            ++skipped;
        } catch (const std::exception& e) {
            throw std::runtime_error("image " + img.image_id + ": " + e.what());
        }
    }

    iaa::report::write_pairs_csv(pairs, g.out / "pairs.csv");
    iaa::report::write_iaa_json(scores, g.out / "iaa.json");

    std::size_t n_pairs = 0;
    for (const auto& [id, r] : pairs) n_pairs += r.size();
    fmt::print("iaa: {} images, {} masks in manifest; {} analysed, {} skipped; {} pairs on a {}x{} grid\n",
               manifest.images.size(), manifest.mask_count(), scores.size(), skipped, n_pairs, grid.side, grid.side);
    if (!scores.empty()) {
        std::vector<double> v;
        for (const auto& s : scores) v.push_back(s.score.value);
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        fmt::print("IAA quantiles: min {:.6f}  q25 {:.6f}  median {:.6f}  q75 {:.6f}  max {:.6f}  (mean {:.6f})\n",
                   quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1.0), mean);
        const auto above = [&](double t) { return std::count_if(v.begin(), v.end(), [t](double x) { return x > t; }); };
        fmt::print("images with IAA > 0.90: {}; > 0.95: {}; == 0: {}\n", above(0.90), above(0.95),
                   std::count(v.begin(), v.end(), 0.0));
    }
    fmt::print("wrote {} and {}\n", (g.out / "pairs.csv").string(), (g.out / "iaa.json").string());
}

void cmd_stats(const GlobalOptions& g, const StatsOptions& o, Reporter& rep) {
    const std::uint64_t seed = g.require_seed("stats");
    const iaa::IaaMap scores = iaa::report::read_iaa_json(or_default(o.iaa, g.out / "iaa.json"));
    const iaa::Manifest manifest = manifest_without_files(g.require_manifest("stats"));

    std::vector<std::string> groups = o.groups;
    if (o.group_by == "malignancy") {
        if (groups.empty()) groups = {"benign", "malignant"};
    } else if (o.group_by != "diagnosis") {
        throw std::runtime_error("--group-by must be 'malignancy' or 'diagnosis'");
    }
    if (groups.size() != 2) throw std::runtime_error("--groups needs exactly two values");

    std::vector<double> a, b;
    std::size_t matched = 0;
    for (const auto& img : manifest.images) {
        const auto it = scores.find(img.image_id);
        if (it == scores.end()) continue;
        ++matched;
        const std::string key = o.group_by == "malignancy" ? (img.malignant ? "malignant" : "benign") : img.diagnosis;
        if (key == groups[0]) a.push_back(it->second.value);
        if (key == groups[1]) b.push_back(it->second.value);
    }
    if (matched < scores.size()) rep.warn(fmt::format("{} IAA entries have no manifest record", scores.size() - matched));
    for (std::size_t k = 0; k < 2; ++k) {
        const std::size_t n = k == 0 ? a.size() : b.size();
        if (n < 2) throw std::runtime_error(fmt::format("group '{}' has {} member(s); need at least 2", groups[k], n));
    }

    const iaa::stats::Sample sa(a, groups[0]);
    const iaa::stats::Sample sb(b, groups[1]);
    const double level = g.alpha_level;
    std::vector<iaa::report::TestReport> reports;

    fmt::print("{}: n={} mean={:.6f}; {}: n={} mean={:.6f}\n", groups[0], a.size(), sa.mean(), groups[1], b.size(),
               sb.mean());

    const auto mw = iaa::stats::mann_whitney(sa, sb, iaa::stats::Alternative::TwoSided);
    if (mw.degenerate) rep.warn("Mann-Whitney: every value identical; p fixed at 1");
    reports.push_back(iaa::report::to_report(mw, groups[0] + " vs " + groups[1] + " (two-sided)"));
    fmt::print("mann-whitney two-sided ({}): U={:.1f} p={:.6g} -> {} at alpha={}\n", iaa::stats::to_string(mw.method),
               mw.u_statistic, mw.p_value, verdict(mw.p_value, level), level);

    try {
        const auto d = iaa::stats::cohens_d(sa, sb);
        reports.push_back({"cohens-d", groups[0] + " minus " + groups[1], d.cohens_d, std::nullopt, a.size(), b.size(),
                           std::nullopt, std::nullopt, false});
        fmt::print("cohen's d ({} - {}): {:.6f}\n", groups[0], groups[1], d.cohens_d);
    } catch (const iaa::stats::StatsError& e) {
        rep.warn(std::string("Cohen's d undefined: ") + e.what());
    }

    const iaa::stats::FosdOptions fo{g.iterations, seed, g.threads};
    for (auto [h, dom, sub] : {std::tuple{iaa::stats::FosdHypothesis::ADominatesB, groups[0], groups[1]},
                               std::tuple{iaa::stats::FosdHypothesis::BDominatesA, groups[1], groups[0]}}) {
        const auto r = iaa::stats::fosd_test(sa, sb, h, fo);
        if (r.degenerate) rep.warn("FOSD: every value identical; p fixed at 1");
        reports.push_back(iaa::report::to_report(r, dom + " dominates " + sub));
        fmt::print("fosd H0 '{} dominates {}': T={:.6f} p={:.6g} ({} replicates) -> {} at alpha={}\n", dom, sub,
                   r.statistic, r.p_value, r.bootstrap_iterations, verdict(r.p_value, level), level);
    }

    iaa::report::write_test_reports_json(reports, g.out / "stats.json");
    fmt::print("wrote {}\n", (g.out / "stats.json").string());
}

void cmd_split(const GlobalOptions& g, const SplitOptions& o, Reporter& rep) {
    const std::uint64_t seed = g.require_seed("split");
    const iaa::Manifest manifest = manifest_without_files(g.require_manifest("split"));
    const iaa::IaaMap scores = iaa::report::read_iaa_json(or_default(o.iaa, g.out / "iaa.json"));

    std::vector<iaa::ImageRecord> usable;
    for (const auto& img : manifest.images) {
        if (!scores.contains(img.image_id)) {
            rep.warn("image " + img.image_id + " has no IAA score; left out of the split");
            continue;
        }
        usable.push_back(img);
    }
    const auto split = iaa::stratified_split(usable, scores, {o.train, o.valid, o.test}, seed);
    iaa::report::write_split_csv(split, g.out / "split.csv");

    std::map<std::string, std::array<std::size_t, 3>> counts;
    std::array<std::size_t, 3> total{};
    for (const auto& s : split) {
        ++counts[iaa::to_string(s.stratum)][static_cast<std::size_t>(s.fold)];
        ++total[static_cast<std::size_t>(s.fold)];
    }
    fmt::print("{:<24} {:>6} {:>6} {:>6}\n", "stratum", "train", "valid", "test");
    for (const auto& [name, c] : counts) fmt::print("{:<24} {:>6} {:>6} {:>6}\n", name, c[0], c[1], c[2]);
    const double n = static_cast<double>(split.size());
    fmt::print("{:<24} {:>6} {:>6} {:>6}  ({:.1f}% / {:.1f}% / {:.1f}%)\n", "total", total[0], total[1], total[2],
               100.0 * total[0] / n, 100.0 * total[1] / n, 100.0 * total[2] / n);
    fmt::print("wrote {}\n", (g.out / "split.csv").string());
}

void cmd_table(const GlobalOptions& g, const TableOptions& o, Reporter&) {
    const iaa::Manifest manifest = manifest_without_files(g.require_manifest("table"));
    const iaa::AgreementMap pairs = iaa::report::read_pairs_csv(or_default(o.pairs, g.out / "pairs.csv"));
    const iaa::FactorTable table = iaa::factor_table(manifest.images, pairs);
    iaa::report::write_factor_table_csv(table, g.out / "factor_table.csv");
    iaa::report::write_factor_table_json(table, g.out / "factor_table.json");

    fmt::print("{:<10} {:<10} {:<10} {:>7} {:>10} {:>10} {:>12} {:>10}\n", "factor", "relation", "subset", "pairs",
               "mean", "std", "mw_p", "d");
    for (const auto& r : table.rows) {
        const auto opt = [](const std::optional<double>& v, const char* spec) {
            return v ? fmt::format(fmt::runtime(spec), *v) : std::string("-");
        };
        fmt::print("{:<10} {:<10} {:<10} {:>7} {:>10} {:>10} {:>12} {:>10}\n", iaa::to_string(r.factor),
                   iaa::to_string(r.relation), iaa::to_string(r.subset), r.n_pairs,
                   r.empty() ? "-" : fmt::format("{:.4f}", r.mean_dice), r.empty() ? "-" : fmt::format("{:.4f}", r.std_dice),
                   opt(r.mann_whitney_p, "{:.3g}"), opt(r.cohens_d, "{:.4f}"));
    }
    fmt::print("wrote {} and {}\n", (g.out / "factor_table.csv").string(), (g.out / "factor_table.json").string());
}

void cmd_train(const GlobalOptions& g, const TrainOptions& o, Reporter& rep) {
    using namespace iaa::learn;
    const std::uint64_t seed = g.require_seed("train");
    const ModelKind kind = parse_model_kind(o.model);
    const iaa::Manifest manifest = iaa::load_manifest(g.require_manifest("train"));
    const auto split = iaa::report::read_split_csv(or_default(o.split, g.out / "split.csv"));

    std::optional<iaa::IaaMap> scores;
    if (!o.no_iaa) scores = optional_iaa(o.iaa, g.out / "iaa.json");

    std::optional<Checkpoint> init;
    if (!o.init.empty()) {
        init = load_checkpoint(o.init);
        if (init->kind != kind) {
            throw std::runtime_error(fmt::format("--init holds a {} model, not {}", to_string(init->kind), o.model));
        }
    }
    if (kind != ModelKind::M2 && !scores && !init) {
        throw std::runtime_error("model " + o.model + " needs IAA targets (--iaa); only fine-tuning (--init) may omit them");
    }
    if (o.freeze_regression_head && kind != ModelKind::MT) {
        throw std::runtime_error("--freeze-regression-head applies to the multi-task model only");
    }

    NetworkConfig net;
    if (init) {
        net = init->network.config();
    } else {
        net.input_side = o.input_side;
        net.widths = o.widths;
        net.head_width = o.head_width;
        net.dropout = o.dropout;
        if (o.pooling != "max" && o.pooling != "avg") throw std::runtime_error("--pooling must be max or avg");
        net.pooling = o.pooling == "max" ? Pooling::Max : Pooling::Average;
    }

    const auto train_records = records_in_fold(manifest.images, split, iaa::Fold::Train);
    const auto valid_records = records_in_fold(manifest.images, split, iaa::Fold::Valid);
    if (train_records.empty() || valid_records.empty()) throw std::runtime_error("split has an empty train or valid fold");
    const iaa::IaaMap* targets = scores ? &*scores : nullptr;
    const TrainingData train_data = load_training_data(train_records, targets, net.input_side);
    const TrainingData valid_data = load_training_data(valid_records, targets, net.input_side);

    for (double alpha : o.alphas) {
        TrainConfig cfg;
        cfg.alpha = alpha;
        cfg.epochs = o.epochs;
        cfg.batch_size = o.batch_size;
        cfg.learning_rate = o.learning_rate;
        cfg.momentum = o.momentum;
        cfg.weight_decay = o.weight_decay;
        cfg.lr_decay_factor = o.lr_decay_factor;
        cfg.lr_decay_every = o.lr_decay_every;
        cfg.seed = seed;
        if (!o.selection.empty()) cfg.model_selection = parse_model_selection(o.selection);
        cfg.frozen_regression_head = o.freeze_regression_head;
        cfg.focal_gamma = o.focal_gamma;
        cfg.smooth_l1_beta = o.smooth_l1_beta;

        const fs::path dir = o.alphas.size() > 1 ? g.out / alpha_tag(alpha) : g.out;
        fmt::print("train {} alpha={:g}: {} train / {} valid images, {} epochs\n", o.model, alpha, train_data.size(),
                   valid_data.size(), cfg.epochs);
        TrainResult result = train(kind, train_data, valid_data, cfg, net, init ? &init->network : nullptr);
        for (const auto& w : result.warnings) rep.warn(w);

        fs::create_directories(dir);
        {
            std::ofstream log(dir / "train_log.csv");
            if (!log) throw std::runtime_error("cannot write " + (dir / "train_log.csv").string());
            log << "epoch,train_loss,val_mae,val_bal_acc,lr\n";
            for (const auto& e : result.log) {
                log << e.epoch << ',' << format_fixed6(e.train_loss) << ','
                    << (e.val_mae ? format_fixed6(*e.val_mae) : "") << ','
                    << (e.val_balanced_accuracy ? format_fixed6(*e.val_balanced_accuracy) : "") << ','
                    << format_fixed6(e.learning_rate) << '\n';
                fmt::print("  epoch {:>3}  loss {:.6f}  val MAE {}  val bal acc {}  lr {:g}\n", e.epoch, e.train_loss,
                           e.val_mae ? format_fixed6(*e.val_mae) : "-",
                           e.val_balanced_accuracy ? format_fixed6(*e.val_balanced_accuracy) : "-", e.learning_rate);
            }
        }
        save_checkpoint({kind, result.best, cfg, seed, result.steps, result.best_epoch}, dir / "checkpoint.json");
        write_json({{"model", o.model},
                    {"alpha", alpha},
                    {"selection", std::string(to_string(result.selection))},
                    {"best_epoch", result.best_epoch},
                    {"valid", report_json(result.best_report)}},
                   dir / "train_report.json");
        fmt::print("best epoch {} by {}:\n", result.best_epoch, to_string(result.selection));
        print_report(result.best_report);
        fmt::print("wrote {}\n", (dir / "checkpoint.json").string());
    }
}

void cmd_eval(const GlobalOptions& g, const EvalOptions& o, Reporter& rep) {
    using namespace iaa::learn;
    const bool stub = !o.predictions.empty();
    const iaa::Manifest manifest = stub ? manifest_without_files(g.require_manifest("eval"))
                                        : iaa::load_manifest(g.require_manifest("eval"));
    const fs::path split_path = or_default(o.split, g.out / "split.csv");
    std::vector<iaa::ImageRecord> records;
    if (fs::exists(split_path)) {
        records = records_in_fold(manifest.images, iaa::report::read_split_csv(split_path), iaa::parse_fold(o.fold));
    } else {
        rep.warn("no split file; evaluating every manifest image");
        records = manifest.images;
    }
    if (records.empty()) throw std::runtime_error("fold '" + o.fold + "' is empty");
    const auto scores = optional_iaa(o.iaa, g.out / "iaa.json");

    TrainingData data;
    std::vector<double> z_hat;
    std::vector<std::vector<double>> probs;
    int n_classes = o.n_classes;

    if (stub) {
        const auto table = iaa::report::read_csv(o.predictions);
        const std::size_t c_id = table.column("image_id");
        std::optional<std::size_t> c_z;
        if (std::find(table.header.begin(), table.header.end(), "z_hat") != table.header.end()) c_z = table.column("z_hat");
        std::vector<std::size_t> c_p;
        for (int k = 0; k < n_classes; ++k) {
            const std::string name = "prob_" + std::to_string(k);
            if (std::find(table.header.begin(), table.header.end(), name) != table.header.end()) c_p.push_back(table.column(name));
        }
        if (!c_p.empty() && c_p.size() != static_cast<std::size_t>(n_classes)) {
            throw std::runtime_error("predictions need prob_0 .. prob_" + std::to_string(n_classes - 1));
        }
        std::map<std::string, const std::vector<std::string>*> rows;
        for (const auto& row : table.rows) rows[row[c_id]] = &row;
        for (const auto& rec : records) {
            const auto it = rows.find(rec.image_id);
            if (it == rows.end()) throw std::runtime_error("no prediction for image " + rec.image_id);
            data.ids.push_back(rec.image_id);
            data.labels.push_back(rec.malignant ? 1 : 0);
            data.malignant.push_back(rec.malignant ? 1 : 0);
            if (scores && c_z) {
                const auto s = scores->find(rec.image_id);
                if (s == scores->end()) throw std::runtime_error("no IAA score for image " + rec.image_id);
                data.iaa.push_back(s->second.value);
            }
            if (c_z) z_hat.push_back(std::stod((*it->second)[*c_z]));
            if (!c_p.empty()) {
                std::vector<double> p;
                for (std::size_t c : c_p) p.push_back(std::stod((*it->second)[c]));
                probs.push_back(std::move(p));
            }
        }
    } else {
        if (o.checkpoint.empty()) throw std::runtime_error("eval needs --checkpoint or --predictions");
        Checkpoint ckpt = load_checkpoint(o.checkpoint);
        n_classes = ckpt.network.config().n_classes;
        const bool want_iaa = scores && ckpt.network.has_regression_head();
        data = load_training_data(records, want_iaa ? &*scores : nullptr, ckpt.network.config().input_side);
        std::vector<std::size_t> idx;
        for (std::size_t start = 0; start < data.size(); start += 64) {
            idx.clear();
            for (std::size_t i = start; i < std::min(data.size(), start + 64); ++i) idx.push_back(i);
            auto pred = ckpt.network.forward(data.batch(idx), ForwardOptions::eval());
            z_hat.insert(z_hat.end(), pred.z_hat.begin(), pred.z_hat.end());
            for (auto& p : pred.probabilities) probs.push_back(std::move(p));
        }
        std::ofstream out(g.out / "predictions.csv");
        if (!out) throw std::runtime_error("cannot write " + (g.out / "predictions.csv").string());
        out << "image_id";
        if (!z_hat.empty()) out << ",z_hat";
        for (int k = 0; !probs.empty() && k < n_classes; ++k) out << ",prob_" << k;
        out << '\n';
        for (std::size_t i = 0; i < data.size(); ++i) {
            out << iaa::report::csv_field(data.ids[i]);
            if (!z_hat.empty()) out << ',' << format_fixed6(z_hat[i]);
            if (!probs.empty()) {
                for (double p : probs[i]) out << ',' << format_fixed6(p);
            }
            out << '\n';
        }
    }

    const EvalReport report = evaluate_predictions(data, z_hat, probs, n_classes);
    for (const auto& w : report.warnings) rep.warn(w);
    json j = report_json(report);
    j["fold"] = o.fold;
    write_json(j, g.out / "eval_report.json");
    fmt::print("eval on {} images ({}):\n", report.n, o.fold);
    print_report(report);
    fmt::print("wrote {}\n", (g.out / "eval_report.json").string());
}

void cmd_synth(const GlobalOptions& g, const SynthOptions& o, Reporter&) {
    const std::uint64_t seed = g.require_seed("synth");
    const auto data = iaa::learn::synth_generate({o.n, seed, o.side, o.malignant_fraction});
    const auto records = iaa::learn::write_synth(data, g.out);
    std::size_t malignant = 0, masks = 0;
    for (const auto& r : records) {
        malignant += r.malignant ? 1 : 0;
        masks += r.masks.size();
    }
    fmt::print("synth: {} images ({} malignant), {} masks, {}x{} pixels\n", records.size(), malignant, masks, o.side,
               o.side);
    fmt::print("wrote {}\n", (g.out / "manifest.json").string());
}

}  // namespace iaakit

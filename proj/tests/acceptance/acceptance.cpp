// Acceptance suite. Prints one line per criterion:
//   [PASS] n  name  (details, seconds)
// and exits nonzero when any criterion fails. `acceptance 3 5` runs a subset.

#include "iaa/agreement.hpp"
#include "iaa/dataset.hpp"
#include "iaa/learn/gradient_check.hpp"
#include "iaa/learn/metrics.hpp"
#include "iaa/learn/synth.hpp"
#include "iaa/learn/trainer.hpp"
#include "iaa/stats.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace iaa;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    bool skipped = false;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1 ---------------------------------------------------------------------------

Outcome metric_oracle() {
    std::mt19937_64 rng(1001);
    std::size_t dice_mismatch = 0, hd_mismatch = 0, pairs = 0;
    double worst = 0.0;
    for (int side : {8, 16, 32, 64}) {
        for (int k = 0; k < 500; ++k, ++pairs) {
            const auto a = oracle::random_mask(rng, side, side);
            const auto b = oracle::random_mask(rng, side, side);
            const auto got = dice_counts(a, b);
            const auto want = oracle::dice_counts(a, b);
            if (got.intersection != want.intersection || got.total != want.total || dice(a, b) != oracle::dice(a, b)) {
                ++dice_mismatch;
            }
            const double diff = std::abs(hausdorff(a, b) - oracle::hausdorff(a, b));
            worst = std::max(worst, diff);
            if (!(diff <= 1e-9)) ++hd_mismatch;
        }
    }
    return {dice_mismatch == 0 && hd_mismatch == 0,
            fmt("%zu pairs, dice mismatches %zu, hausdorff mismatches %zu, max |dH| %.3g", pairs, dice_mismatch,
                hd_mismatch, worst)};
}

// 2 ---------------------------------------------------------------------------

std::pair<std::vector<double>, std::vector<double>> tie_free(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::set<double> seen;
    std::vector<double> a, b;
    while (a.size() + b.size() < 2 * n) {
        const double v = u(rng);
        if (!seen.insert(v).second) continue;
        (a.size() < n ? a : b).push_back(v);
    }
    return {a, b};
}

Outcome mann_whitney_exactness() {
    std::mt19937_64 rng(1002);
    double worst_exact = 0.0;
    bool all_exact_method = true;
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 1 + k % 6;
        const auto [a, b] = tie_free(rng, n);
        const auto r = stats::mann_whitney(stats::Sample(a), stats::Sample(b));
        all_exact_method &= r.method == stats::UTestMethod::Exact;
        worst_exact = std::max(worst_exact, std::abs(r.p_value - oracle::enumerated_u_pvalue(a, b, oracle::Tail::TwoSided)));
    }
    // n = 8: every attainable U, so the bound holds for any tie-free sample.
    double worst_approx = 0.0, worst_one_sided = 0.0;
    std::vector<double> a(8), b(8);
    for (std::uint32_t mask = 0; mask < (1u << 16); ++mask) {
        if (std::popcount(mask) != 8) continue;
        std::size_t ia = 0, ib = 0;
        for (int i = 0; i < 16; ++i) ((mask >> i) & 1u ? a[ia++] : b[ib++]) = i;
        const auto exact = stats::mann_whitney(stats::Sample(a), stats::Sample(b));
        const auto approx = stats::mann_whitney(stats::Sample(a), stats::Sample(b), stats::Alternative::TwoSided, false);
        worst_approx = std::max(worst_approx, std::abs(exact.p_value - approx.p_value));
        for (auto alt : {stats::Alternative::AGreater, stats::Alternative::ALess}) {
            const auto e = stats::mann_whitney(stats::Sample(a), stats::Sample(b), alt);
            const auto n = stats::mann_whitney(stats::Sample(a), stats::Sample(b), alt, false);
            worst_one_sided = std::max(worst_one_sided, std::abs(e.p_value - n.p_value));
        }
    }
    return {all_exact_method && worst_exact <= 1e-12 && worst_approx <= 0.01,
            fmt("max |p_exact - p_enum| %.3g over 200 instances; max |p_normal - p_exact| at n=8: two-sided %.4f, "
                "one-sided %.4f",
                worst_exact, worst_approx, worst_one_sided)};
}

// 3 ---------------------------------------------------------------------------

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double shift) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng) + shift;
    return v;
}

bool same(const stats::FosdResult& x, const stats::FosdResult& y) {
    return x.statistic == y.statistic && x.p_value == y.p_value && x.bootstrap_iterations == y.bootstrap_iterations &&
           x.hypothesis == y.hypothesis && x.seed == y.seed && x.n_a == y.n_a && x.n_b == y.n_b &&
           x.degenerate == y.degenerate;
}

Outcome fosd_correctness() {
    using stats::FosdHypothesis;
    std::mt19937_64 rng(1003);
    const stats::Sample low(uniform(rng, 500, 0.0)), high(uniform(rng, 500, 0.3));
    const stats::FosdOptions opt{1000, 42, 1};
    // `high` dominates: H0 "low dominates high" is false, H0 "high dominates low" is true.
    const auto dominated = stats::fosd_test(low, high, FosdHypothesis::ADominatesB, opt);
    const auto dominating = stats::fosd_test(low, high, FosdHypothesis::BDominatesA, opt);
    const bool a_ok = dominated.p_value < 0.001 && dominating.p_value > 0.5;

    int rejections = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const stats::Sample x(uniform(rng, 100, 0.0)), y(uniform(rng, 100, 0.0));
        const auto r = stats::fosd_test(x, y, FosdHypothesis::ADominatesB, {1000, static_cast<std::uint64_t>(t), 1});
        rejections += r.p_value < 0.05 ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / trials;
    const bool b_ok = rate >= 0.01 && rate <= 0.10;

    bool c_ok = true;
    for (unsigned threads : {2u, 4u, 8u}) {
        for (auto h : {FosdHypothesis::ADominatesB, FosdHypothesis::BDominatesA}) {
            const auto one = stats::fosd_test(low, high, h, {1000, 7, 1});
            const auto many = stats::fosd_test(low, high, h, {1000, 7, threads});
            c_ok &= same(one, many);
        }
    }
    return {a_ok && b_ok && c_ok,
            fmt("(a) p_dominated %.4g, p_dominating %.4f; (b) size %.3f over %d trials; (c) thread-invariant %s",
                dominated.p_value, dominating.p_value, rate, trials, c_ok ? "yes" : "no")};
}

// 4 ---------------------------------------------------------------------------

struct Folds {
    learn::TrainingData train, valid;
};

Folds synth_folds(std::size_t n, std::uint64_t seed, int side, bool stratified) {
    learn::SynthConfig sc;
    sc.n = n;
    sc.seed = seed;
    sc.side = side;
    const auto ds = learn::synth_generate(sc);
    const auto data = learn::to_training_data(ds);
    std::vector<std::size_t> tr, va;
    if (stratified) {
        std::vector<ImageRecord> recs;
        IaaMap iaa;
        for (const auto& img : ds.images) {
            ImageRecord r;
            r.image_id = img.image_id;
            r.malignant = img.malignant;
            r.masks = img.mask_meta;
            recs.push_back(r);
            iaa[img.image_id] = img.iaa;
        }
        std::map<std::string, Fold> fold;
        for (const auto& s : stratified_split(recs, iaa, {}, seed)) fold[s.image_id] = s.fold;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const Fold f = fold.at(data.ids[i]);
            if (f == Fold::Train) tr.push_back(i);
            if (f == Fold::Valid) va.push_back(i);
        }
    } else {
        for (std::size_t i = 0; i < data.size(); ++i) (i % 5 == 0 ? va : tr).push_back(i);
    }
    return {data.subset(tr), data.subset(va)};
}

using Snapshot = std::vector<std::vector<double>>;

struct Run {
    std::vector<Snapshot> trajectory;
    std::vector<double> losses;
};

Run record_run(learn::ModelKind kind, const Folds& f, double alpha, std::vector<learn::Component> comps) {
    learn::TrainConfig cfg;
    cfg.alpha = alpha;
    cfg.epochs = 5;
    cfg.seed = 77;
    learn::NetworkConfig net;
    net.head_width = 64;
    Run run;
    auto cb = [&](int, const learn::Network& n) {
        learn::Network copy = n;
        Snapshot s;
        for (auto c : comps) {
            for (auto* p : copy.parameters(c)) {
                s.push_back(p->value);
                s.push_back(p->velocity);
            }
        }
        for (const auto& [name, buf] : copy.buffers()) {
            const bool in_reg = name.rfind("regression_head", 0) == 0;
            const bool in_diag = name.rfind("diagnosis_head", 0) == 0;
            const bool wanted = (!in_reg && !in_diag) ||
                                (in_reg && std::count(comps.begin(), comps.end(), learn::Component::RegressionHead)) ||
                                (in_diag && std::count(comps.begin(), comps.end(), learn::Component::DiagnosisHead));
            if (wanted) s.push_back(*buf);
        }
        run.trajectory.push_back(std::move(s));
    };
    const auto r = learn::train(kind, f.train, f.valid, cfg, net, nullptr, cb);
    for (const auto& e : r.log) run.losses.push_back(e.train_loss);
    return run;
}

Outcome degeneracy() {
    using learn::Component;
    const Folds f = synth_folds(200, 11, 32, false);
    const auto mt1 = record_run(learn::ModelKind::MT, f, 1.0, {Component::Backbone, Component::DiagnosisHead});
    const auto m2 = record_run(learn::ModelKind::M2, f, 1.0, {Component::Backbone, Component::DiagnosisHead});
    const auto mt0 = record_run(learn::ModelKind::MT, f, 0.0, {Component::Backbone, Component::RegressionHead});
    const auto m1 = record_run(learn::ModelKind::M1, f, 0.0, {Component::Backbone, Component::RegressionHead});
    const bool diag_ok = mt1.trajectory == m2.trajectory && mt1.losses == m2.losses && mt1.trajectory.size() == 5;
    const bool reg_ok = mt0.trajectory == m1.trajectory && mt0.losses == m1.losses && mt0.trajectory.size() == 5;
    return {diag_ok && reg_ok, fmt("alpha=1 vs M2 %s, alpha=0 vs M1 %s (5 epochs, %zu training images)",
                                   diag_ok ? "identical" : "DIFFERENT", reg_ok ? "identical" : "DIFFERENT", f.train.size())};
}

// 5 ---------------------------------------------------------------------------

Outcome gradients() {
    learn::NetworkConfig cfg;
    cfg.input_side = 8;
    cfg.widths = {4, 8};
    cfg.head_width = 16;
    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0, train_worst = 0.0;
    std::size_t checks = 0, params = 0, train_over = 0;
    std::string where;
    for (int b = 0; b < 20; ++b) {
        const struct {
            const char* name;
            learn::LossWeights w;
            bool reg, diag;
        } objectives[] = {{"smooth-l1", {0.0, 1.0}, true, false},
                          {"focal", {1.0, 0.0}, false, true},
                          {"multi-task", {0.9, 0.1}, true, true}};
        for (const auto& o : objectives) {
            auto c = cfg;
            c.regression_head = o.reg;
            c.diagnosis_head = o.diag;
            learn::Network net(c, 100 + b);
            params = std::max(params, net.parameter_count());
            if (net.parameter_count() > learn::kMaxGradientCheckParams) return {false, "network too large"};
            const int n = 4 + b % 5;
            learn::Tensor batch(n, 1, 8, 8);
            for (auto& v : batch.data) v = u(rng);
            learn::Targets t;
            for (int i = 0; i < n; ++i) {
                t.labels.push_back(static_cast<int>(rng() % 2));
                t.iaa.push_back(u(rng) * 3.0 - 1.0);  // reaches both smooth-L1 branches
            }
            learn::GradientCheckOptions opt;
            opt.seed = static_cast<std::uint64_t>(b);
            const auto r = learn::gradient_check(net, batch, t, {o.w, 2.0, 1.0}, opt);
            checks += r.checked;
            if (r.max_relative_error > worst) {
                worst = r.max_relative_error;
                where = std::string(o.name) + ":" + r.worst_parameter;
            }
            // Batch-statistics mode, reported only: a central difference that
            // straddles a ReLU or max-pool switch has no derivative to match.
            opt.mode = learn::Mode::Train;
            const auto tr = learn::gradient_check(net, batch, t, {o.w, 2.0, 1.0}, opt);
            train_worst = std::max(train_worst, tr.max_relative_error);
            train_over += tr.max_relative_error >= 1e-4;
        }
    }
    return {worst < 1e-4,
            fmt("eval mode: max relative error %.3g (%s) over 20 batches x 3 objectives, %zu coordinates, <= %zu params; "
                "train mode (not gated): %zu/60 checks >= 1e-4, worst %.3g",
                worst, where.c_str(), checks, params, train_over, train_worst)};
}

// 6 ---------------------------------------------------------------------------

Outcome synthetic_dominance() {
    int pattern_ok = 0;
    double worst_false = 1.0, worst_true = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        learn::SynthConfig sc;
        sc.n = 600;
        sc.seed = seed;
        const auto ds = learn::synth_generate(sc);
        std::vector<double> benign, malignant;
        for (const auto& img : ds.images) (img.malignant ? malignant : benign).push_back(img.iaa.value);
        const stats::Sample b(benign, "benign"), m(malignant, "malignant");
        const stats::FosdOptions opt{1000, seed, 1};
        const auto b_dom = stats::fosd_test(b, m, stats::FosdHypothesis::ADominatesB, opt);
        const auto m_dom = stats::fosd_test(b, m, stats::FosdHypothesis::BDominatesA, opt);
        worst_false = std::min(worst_false, b_dom.p_value);
        worst_true = std::max(worst_true, m_dom.p_value);
        if (b_dom.p_value >= 0.05 && m_dom.p_value < 0.001) ++pattern_ok;
    }
    return {pattern_ok == 10, fmt("%d/10 seeds show fail-to-reject 'benign dominates' (min p %.3f) and reject "
                                  "'malignant dominates' (max p %.4g), n=600",
                                  pattern_ok, worst_false, worst_true)};
}

// 7 ---------------------------------------------------------------------------

Outcome multitask_benefit() {
    double sum_mt = 0.0, sum_m2 = 0.0;
    std::string per_seed;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Folds f = synth_folds(1000, seed, 32, true);
        learn::TrainConfig cfg;
        cfg.epochs = 20;
        cfg.lr_decay_every = 10;
        cfg.seed = seed;
        learn::NetworkConfig net;
        cfg.alpha = 0.9;
        const auto mt = learn::train(learn::ModelKind::MT, f.train, f.valid, cfg, net);
        cfg.alpha = 1.0;
        const auto m2 = learn::train(learn::ModelKind::M2, f.train, f.valid, cfg, net);
        const double a = mt.best_report.classification->balanced_accuracy;
        const double b = m2.best_report.classification->balanced_accuracy;
        sum_mt += a;
        sum_m2 += b;
        per_seed += fmt("%s%.4f/%.4f", seed ? ", " : "", a, b);
    }
    const double mt = sum_mt / 3.0, m2 = sum_m2 / 3.0;
    return {mt >= m2, fmt("mean val balanced accuracy MT(0.9) %.4f vs M2 %.4f (per seed MT/M2: %s)", mt, m2,
                          per_seed.c_str())};
}

// 8 ---------------------------------------------------------------------------

Outcome split_fidelity() {
    std::mt19937_64 rng(1008);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    bool partition = true, deterministic = true;
    std::size_t strata_seen = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ImageRecord> recs;
        IaaMap iaa;
        const std::size_t n = 20 + rng() % 3000;
        for (std::size_t i = 0; i < n; ++i) {
            ImageRecord r;
            r.image_id = "id" + std::to_string(i);
            r.malignant = u(rng) < 0.25;
            r.masks.resize(2 + (u(rng) < 0.15 ? 1 + rng() % 3 : 0));
            iaa[r.image_id] = IaaScore{r.image_id, u(rng), 1};
            recs.push_back(r);
        }
        const auto split = stratified_split(recs, iaa, {}, trial);
        std::set<std::string> ids;
        std::map<Stratum, std::array<double, 4>> counts;
        for (const auto& s : split) {
            partition &= ids.insert(s.image_id).second;
            counts[s.stratum][static_cast<std::size_t>(s.fold)] += 1;
            counts[s.stratum][3] += 1;
        }
        partition &= ids.size() == recs.size();
        for (const auto& [s, c] : counts) {
            ++strata_seen;
            const double ratios[3] = {0.70, 0.15, 0.15};
            for (int f = 0; f < 3; ++f) worst = std::max(worst, std::abs(c[f] - ratios[f] * c[3]));
        }
        const auto again = stratified_split(recs, iaa, {}, trial);
        for (std::size_t i = 0; i < split.size(); ++i) {
            deterministic &= split[i].image_id == again[i].image_id && split[i].fold == again[i].fold &&
                             split[i].stratum == again[i].stratum;
        }
    }
    return {worst < 1.0 && partition && deterministic,
            fmt("max per-stratum deviation %.3f items over %zu strata; partition %s; deterministic %s", worst,
                strata_seen, partition ? "yes" : "no", deterministic ? "yes" : "no")};
}

// 9 ---------------------------------------------------------------------------

Outcome auroc_identity() {
    std::mt19937_64 rng(1009);
    std::uniform_int_distribution<int> level(0, 20);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 10 + rng() % 200;
        learn::TrainingData data;
        data.side = 1;
        std::vector<std::vector<double>> probs;
        std::vector<double> pos, neg;
        for (std::size_t i = 0; i < n; ++i) {
            const int label = i < 2 ? static_cast<int>(i) : static_cast<int>(rng() % 2);
            // Coarse levels so ties occur.
            const double p = trial % 2 ? level(rng) / 20.0 : std::uniform_real_distribution<double>(0, 1)(rng);
            data.ids.push_back(std::to_string(i));
            data.pixels.push_back(0.0);
            data.labels.push_back(label);
            probs.push_back({1.0 - p, p});
            (label ? pos : neg).push_back(p);
        }
        const auto rep = learn::evaluate_predictions(data, {}, probs, 2);
        const auto u = stats::mann_whitney(stats::Sample(pos), stats::Sample(neg));
        const double expect = u.u_statistic / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
        worst = std::max(worst, std::abs(*rep.classification->auroc - expect));
    }
    return {worst <= 1e-9, fmt("max |AUROC - U/(n_pos n_neg)| %.3g over 100 score sets", worst)};
}

// 10 --------------------------------------------------------------------------

Outcome paper_data() {
    const char* manifest_path = std::getenv("IAAKIT_IMA_MANIFEST");
    if (!manifest_path || !*manifest_path) {
        return {true, "set IAAKIT_IMA_MANIFEST to the real manifest to run this check", true};
    }
    const auto manifest = load_manifest(manifest_path);
    std::vector<double> benign, malignant;
    for (const auto& img : manifest.images) {
        if (img.masks.size() < 2) continue;
        std::vector<BinaryMask> masks;
        for (const auto& m : img.masks) masks.push_back(resize_nearest(load_mask(m.mask_path), CanonicalGrid{}));
        const double v = aggregate_iaa(pairwise_agreements(masks)).value;
        (img.malignant ? malignant : benign).push_back(v);
    }
    const stats::Sample b(benign), m(malignant);
    const auto u = stats::mann_whitney(b, m);
    const auto b_dom = stats::fosd_test(b, m, stats::FosdHypothesis::ADominatesB, {1000, 0, 1});
    const auto m_dom = stats::fosd_test(b, m, stats::FosdHypothesis::BDominatesA, {1000, 0, 1});
    const bool ok = b.mean() > m.mean() && u.p_value < 0.01 && m_dom.p_value < 0.001 && b_dom.p_value >= 0.05;
    return {ok, fmt("benign mean %.3f vs malignant %.3f, Mann-Whitney p %.3g, FOSD p %.4g (malignant dominates) / %.3f "
                    "(benign dominates)",
                    b.mean(), m.mean(), u.p_value, m_dom.p_value, b_dom.p_value)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "metric oracle equivalence", metric_oracle},
        {2, "Mann-Whitney exactness", mann_whitney_exactness},
        {3, "FOSD correctness", fosd_correctness},
        {4, "loss-weight degeneracy", degeneracy},
        {5, "gradient verification", gradients},
        {6, "synthetic dominance", synthetic_dominance},
        {7, "synthetic multi-task benefit", multitask_benefit},
        {8, "split fidelity", split_fidelity},
        {9, "AUROC / Mann-Whitney identity", auroc_identity},
        {10, "paper-data reproduction", paper_data},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
        std::printf("[%s] %d %s: %s (%.1fs)\n", tag, c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}

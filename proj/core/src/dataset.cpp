#include "iaa/dataset.hpp"

#include "iaa/rng.hpp"
#include "iaa/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace iaa {

using nlohmann::json;

std::string_view to_string(Tool tool) noexcept {
    switch (tool) {
        case Tool::T1: return "T1";
        case Tool::T2: return "T2";
        case Tool::T3: return "T3";
    }
    return "?";
}

std::string_view to_string(Skill skill) noexcept { return skill == Skill::S1 ? "S1" : "S2"; }

Tool parse_tool(std::string_view code) {
    if (code == "T1") return Tool::T1;
    if (code == "T2") return Tool::T2;
    if (code == "T3") return Tool::T3;
    throw DatasetError("unknown tool code '" + std::string(code) + "' (expected T1, T2 or T3)");
}

Skill parse_skill(std::string_view code) {
    if (code == "S1") return Skill::S1;
    if (code == "S2") return Skill::S2;
    throw DatasetError("unknown skill code '" + std::string(code) + "' (expected S1 or S2)");
}

std::size_t Manifest::mask_count() const noexcept {
    std::size_t n = 0;
    for (const auto& img : images) n += img.masks.size();
    return n;
}

namespace {

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw DatasetError(where + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw DatasetError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir,
                        const ManifestOptions& options) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DatasetError(std::string("manifest parse failure: ") + e.what());
    }
    if (!doc.is_array()) throw DatasetError("manifest must be a JSON array of image objects");

    Manifest out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& item = doc[i];
        const std::string where = "manifest entry " + std::to_string(i);
        if (!item.is_object()) throw DatasetError(where + ": expected an object");

        ImageRecord rec;
        rec.image_id = required<std::string>(item, "image_id", where);
        const std::string ctx = where + " (" + rec.image_id + ")";
        if (!seen.insert(rec.image_id).second) throw DatasetError("duplicate image_id '" + rec.image_id + "'");
        rec.image_path = resolve(base_dir, required<std::string>(item, "image_path", ctx));
        rec.diagnosis = required<std::string>(item, "diagnosis", ctx);
        rec.malignant = required<bool>(item, "malignant", ctx);

        const auto masks = item.find("masks");
        if (masks == item.end() || !masks->is_array()) throw DatasetError(ctx + ": 'masks' must be an array");
        for (std::size_t k = 0; k < masks->size(); ++k) {
            const json& m = (*masks)[k];
            const std::string mctx = ctx + " mask " + std::to_string(k);
            if (!m.is_object()) throw DatasetError(mctx + ": expected an object");
            MaskRecord mr;
            mr.mask_path = resolve(base_dir, required<std::string>(m, "mask_path", mctx));
            mr.annotator_id = required<std::string>(m, "annotator_id", mctx);
            try {
                mr.tool = parse_tool(required<std::string>(m, "tool", mctx));
                mr.skill = parse_skill(required<std::string>(m, "skill", mctx));
            } catch (const DatasetError& e) {
                throw DatasetError(mctx + ": " + e.what());
            }
            rec.masks.push_back(std::move(mr));
        }

        auto check = [&](const std::filesystem::path& p) {
            if (std::filesystem::exists(p)) return;
            const std::string msg = ctx + ": file not found: " + p.string();
            if (options.require_files) throw DatasetError(msg);
            out.warnings.push_back(msg);
        };
        check(rec.image_path);
        for (const auto& mr : rec.masks) check(mr.mask_path);

        out.images.push_back(std::move(rec));
    }
    return out;
}

Manifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open manifest '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), path.parent_path(), options);
}

void save_manifest(const std::vector<ImageRecord>& images, const std::filesystem::path& path) {
    const std::filesystem::path base = path.parent_path();
    auto rel = [&](const std::filesystem::path& p) {
        if (base.empty()) return p.generic_string();
        const auto r = p.lexically_relative(base);
        return (r.empty() ? p : r).generic_string();
    };
    json doc = json::array();
    for (const auto& img : images) {
        json masks = json::array();
        for (const auto& m : img.masks) {
            masks.push_back({{"mask_path", rel(m.mask_path)},
                             {"annotator_id", m.annotator_id},
                             {"tool", std::string(to_string(m.tool))},
                             {"skill", std::string(to_string(m.skill))}});
        }
        doc.push_back({{"image_id", img.image_id},
                       {"image_path", rel(img.image_path)},
                       {"diagnosis", img.diagnosis},
                       {"malignant", img.malignant},
                       {"masks", std::move(masks)}});
    }
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write manifest '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

std::string_view to_string(DiceBin bin) noexcept {
    switch (bin) {
        case DiceBin::Low: return "low";
        case DiceBin::Medium: return "medium";
        case DiceBin::High: return "high";
    }
    return "?";
}

DiceBin dice_bin(double v) noexcept {
    if (v < 0.5) return DiceBin::Low;
    if (v > 0.8) return DiceBin::High;
    return DiceBin::Medium;
}

std::string_view to_string(Fold fold) noexcept {
    switch (fold) {
        case Fold::Train: return "train";
        case Fold::Valid: return "valid";
        case Fold::Test: return "test";
    }
    return "?";
}

Fold parse_fold(std::string_view name) {
    if (name == "train") return Fold::Train;
    if (name == "valid") return Fold::Valid;
    if (name == "test") return Fold::Test;
    throw DatasetError("unknown fold '" + std::string(name) + "'");
}

std::string to_string(const Stratum& s) {
    return std::string(s.malignant ? "malignant" : "benign") + "/" + std::to_string(s.mask_count) + "/" +
           std::string(to_string(s.bin));
}

namespace {

constexpr double kQuotaSlack = 1e-9;
constexpr std::uint64_t kSplitStreamTag = 0x53504C4954ULL;

struct Quota {
    std::array<std::size_t, 3> floors{};
    std::array<bool, 3> fractional{};
    std::size_t remainder = 0;
};

Quota quota_for(std::size_t n, const std::array<double, 3>& ratios) {
    Quota q;
    std::size_t assigned = 0;
    for (std::size_t f = 0; f < 3; ++f) {
        const double exact = static_cast<double>(n) * ratios[f];
        const double fl = std::floor(exact + kQuotaSlack);
        q.floors[f] = static_cast<std::size_t>(fl);
        q.fractional[f] = exact - fl > kQuotaSlack;
        assigned += q.floors[f];
    }
    q.remainder = n - assigned;
    return q;
}

void validate_ratios(const SplitRatios& ratios) {
    const auto r = ratios.as_array();
    for (double v : r) {
        if (!(v >= 0.0)) throw DatasetError("split ratios must be non-negative");
    }
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw DatasetError("split ratios must sum to 1");
}

}  // namespace

std::array<std::size_t, 3> stratum_fold_counts(std::size_t n, const SplitRatios& ratios) {
    validate_ratios(ratios);
    const auto r = ratios.as_array();
    Quota q = quota_for(n, r);
    std::array<double, 3> frac{};
    for (std::size_t f = 0; f < 3; ++f) frac[f] = static_cast<double>(n) * r[f] - static_cast<double>(q.floors[f]);
    std::array<std::size_t, 3> counts = q.floors;
    std::array<bool, 3> used{};
    for (std::size_t k = 0; k < q.remainder; ++k) {
        std::size_t best = 3;
        for (std::size_t f = 0; f < 3; ++f) {
            if (!q.fractional[f] || used[f]) continue;
            if (best == 3 || frac[f] > frac[best] + kQuotaSlack) best = f;
        }
        used[best] = true;
        ++counts[best];
    }
    return counts;
}

std::vector<SplitAssignment> stratified_split(const std::vector<ImageRecord>& records, const IaaMap& iaa,
                                              const SplitRatios& ratios, std::uint64_t seed) {
    if (records.empty()) throw DatasetError("cannot split an empty record list");
    validate_ratios(ratios);
    const auto r = ratios.as_array();

    std::map<Stratum, std::vector<std::string>> strata;
    for (const auto& rec : records) {
        const auto it = iaa.find(rec.image_id);
        if (it == iaa.end()) throw DatasetError("no IAA score for image '" + rec.image_id + "'");
        const Stratum s{rec.malignant, rec.masks.size(), dice_bin(it->second)};
        strata[s].push_back(rec.image_id);
    }

    // Floors first, then remainders stratum by stratum against global targets.
    const double total = static_cast<double>(records.size());
    std::array<double, 3> assigned{};
    std::map<Stratum, Quota> quotas;
    for (const auto& [s, ids] : strata) {
        Quota q = quota_for(ids.size(), r);
        for (std::size_t f = 0; f < 3; ++f) assigned[f] += static_cast<double>(q.floors[f]);
        quotas.emplace(s, q);
    }

    std::map<Stratum, std::array<std::size_t, 3>> counts;
    for (auto& [s, q] : quotas) {
        std::array<std::size_t, 3> c = q.floors;
        std::array<bool, 3> used{};
        for (std::size_t k = 0; k < q.remainder; ++k) {
            std::size_t best = 3;
            double best_deficit = 0.0;
            for (std::size_t f = 0; f < 3; ++f) {
                if (!q.fractional[f] || used[f]) continue;
                const double deficit = total * r[f] - assigned[f];
                if (best == 3 || deficit > best_deficit + kQuotaSlack) {
                    best = f;
                    best_deficit = deficit;
                }
            }
            used[best] = true;
            ++c[best];
            assigned[best] += 1.0;
        }
        counts.emplace(s, c);
    }

    Rng rng = make_named_stream(seed, kSplitStreamTag);
    std::vector<SplitAssignment> out;
    out.reserve(records.size());
    for (auto& [s, ids] : strata) {
        std::sort(ids.begin(), ids.end());
        std::shuffle(ids.begin(), ids.end(), rng);
        const auto& c = counts.at(s);
        std::size_t pos = 0;
        for (std::size_t f = 0; f < 3; ++f) {
            for (std::size_t k = 0; k < c[f]; ++k) out.push_back({ids[pos++], static_cast<Fold>(f), s});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
    return out;
}

std::string_view to_string(Factor f) noexcept {
    switch (f) {
        case Factor::Annotator: return "annotator";
        case Factor::Tool: return "tool";
        case Factor::Skill: return "skill";
    }
    return "?";
}

std::string_view to_string(Relation r) noexcept { return r == Relation::Same ? "same" : "different"; }

std::string_view to_string(MalignancySubset m) noexcept {
    switch (m) {
        case MalignancySubset::All: return "all";
        case MalignancySubset::Benign: return "benign";
        case MalignancySubset::Malignant: return "malignant";
    }
    return "?";
}

Relation classify_pair(const MaskRecord& a, const MaskRecord& b, Factor factor) noexcept {
    bool same = false;
    switch (factor) {
        case Factor::Annotator: same = a.annotator_id == b.annotator_id; break;
        case Factor::Tool: same = a.tool == b.tool; break;
        case Factor::Skill: same = a.skill == b.skill; break;
    }
    return same ? Relation::Same : Relation::Different;
}

const FactorRow& FactorTable::row(Factor f, Relation r, MalignancySubset m) const {
    for (const auto& row : rows) {
        if (row.factor == f && row.relation == r && row.subset == m) return row;
    }
    throw DatasetError("factor table has no such row");
}

FactorTable factor_table(const std::vector<ImageRecord>& records, const AgreementMap& agreements) {
    std::map<std::string, const ImageRecord*> by_id;
    for (const auto& rec : records) by_id.emplace(rec.image_id, &rec);

    constexpr std::array factors{Factor::Annotator, Factor::Tool, Factor::Skill};
    constexpr std::array subsets{MalignancySubset::All, MalignancySubset::Benign, MalignancySubset::Malignant};

    // values[factor][subset][relation]
    std::array<std::array<std::array<std::vector<double>, 2>, 3>, 3> values;

    for (const auto& [image_id, pairs] : agreements) {
        const auto it = by_id.find(image_id);
        if (it == by_id.end()) throw DatasetError("agreement records for unknown image '" + image_id + "'");
        const ImageRecord& img = *it->second;
        for (const auto& rec : pairs) {
            if (rec.mask_index_a >= img.masks.size() || rec.mask_index_b >= img.masks.size()) {
                throw DatasetError("image '" + image_id + "': pair (" + std::to_string(rec.mask_index_a) + ", " +
                                   std::to_string(rec.mask_index_b) + ") references a missing mask");
            }
            const MaskRecord& ma = img.masks[rec.mask_index_a];
            const MaskRecord& mb = img.masks[rec.mask_index_b];
            for (std::size_t f = 0; f < factors.size(); ++f) {
                const auto rel = static_cast<std::size_t>(classify_pair(ma, mb, factors[f]));
                values[f][0][rel].push_back(rec.dice);
                values[f][img.malignant ? 2 : 1][rel].push_back(rec.dice);
            }
        }
    }

    FactorTable table;
    for (std::size_t f = 0; f < factors.size(); ++f) {
        for (std::size_t m = 0; m < subsets.size(); ++m) {
            const auto& same = values[f][m][0];
            const auto& diff = values[f][m][1];
            std::optional<double> p;
            std::optional<double> d;
            if (!same.empty() && !diff.empty()) {
                const stats::Sample sa(same, "same");
                const stats::Sample sb(diff, "different");
                p = stats::mann_whitney(sa, sb, stats::Alternative::TwoSided).p_value;
                try {
                    d = stats::cohens_d(sa, sb).cohens_d;
                } catch (const stats::StatsError&) {
                    d.reset();
                }
            }
            for (std::size_t rel = 0; rel < 2; ++rel) {
                const auto& v = values[f][m][rel];
                FactorRow row;
                row.factor = factors[f];
                row.relation = static_cast<Relation>(rel);
                row.subset = subsets[m];
                row.n_pairs = v.size();
                if (!v.empty()) {
                    row.mean_dice = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
                    if (v.size() > 1) {
                        double ss = 0.0;
                        for (double x : v) ss += (x - row.mean_dice) * (x - row.mean_dice);
                        row.std_dice = std::sqrt(ss / static_cast<double>(v.size() - 1));
                    }
                }
                row.mann_whitney_p = p;
                row.cohens_d = d;
                table.rows.push_back(row);
            }
        }
    }
    return table;
}

}  // namespace iaa

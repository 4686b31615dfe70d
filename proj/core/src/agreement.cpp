#include "iaa/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace iaa {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

void require_same_grid(const BinaryMask& a, const BinaryMask& b) {
    if (a.empty_grid() || b.empty_grid()) throw AgreementError("mask has no grid");
    if (!a.same_grid(b)) {
        throw AgreementError("grid mismatch: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                             " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

// Lower envelope of parabolas y = f[q] + (x - q)^2 over the finite entries
// of f, evaluated at every integer x in [0, n). Writes kInf everywhere when
// f has no finite entry. Scratch buffers are reused across calls.
void envelope_1d(std::span<const std::int64_t> f, std::span<std::int64_t> out, std::vector<int>& sites,
                 std::vector<double>& bounds) {
    const int n = static_cast<int>(f.size());
    sites.clear();
    bounds.clear();

    auto intersect = [&](int q, int v) {
        const double num = static_cast<double>((f[q] + static_cast<std::int64_t>(q) * q) -
                                               (f[v] + static_cast<std::int64_t>(v) * v));
        return num / (2.0 * (q - v));
    };

    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (sites.empty()) {
            sites.push_back(q);
            bounds.push_back(-std::numeric_limits<double>::infinity());
            continue;
        }
        double s = intersect(q, sites.back());
        while (s <= bounds.back()) {
            sites.pop_back();
            bounds.pop_back();
            if (sites.empty()) break;
            s = intersect(q, sites.back());
        }
        if (sites.empty()) {
            sites.push_back(q);
            bounds.push_back(-std::numeric_limits<double>::infinity());
        } else {
            sites.push_back(q);
            bounds.push_back(s);
        }
    }

    if (sites.empty()) {
        std::fill(out.begin(), out.end(), kInf);
        return;
    }
    std::size_t k = 0;
    for (int x = 0; x < n; ++x) {
        while (k + 1 < sites.size() && bounds[k + 1] < static_cast<double>(x)) ++k;
        const std::int64_t d = x - sites[k];
        out[x] = d * d + f[sites[k]];
    }
}

}  // namespace

DiceCounts dice_counts(const BinaryMask& a, const BinaryMask& b) {
    require_same_grid(a, b);
    DiceCounts counts;
    const auto ba = a.bits();
    const auto bb = b.bits();
    for (std::size_t i = 0; i < ba.size(); ++i) {
        counts.intersection += static_cast<std::uint64_t>(ba[i] & bb[i]);
        counts.total += static_cast<std::uint64_t>(ba[i]) + bb[i];
    }
    return counts;
}

double dice(const BinaryMask& a, const BinaryMask& b) { return dice_counts(a, b).value(); }

std::vector<std::int64_t> squared_distance_transform(const BinaryMask& mask) {
    if (mask.empty_grid()) throw AgreementError("mask has no grid");
    if (mask.is_empty()) throw UndefinedDistance("distance transform of an empty mask");

    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::int64_t> grid(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = mask[i] ? 0 : kInf;

    std::vector<int> sites;
    std::vector<double> bounds;

    // Columns first, then rows.
    std::vector<std::int64_t> column(static_cast<std::size_t>(h));
    std::vector<std::int64_t> column_out(static_cast<std::size_t>(h));
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) column[r] = grid[static_cast<std::size_t>(r) * w + c];
        envelope_1d(column, column_out, sites, bounds);
        for (int r = 0; r < h; ++r) grid[static_cast<std::size_t>(r) * w + c] = column_out[r];
    }

    std::vector<std::int64_t> row_out(static_cast<std::size_t>(w));
    for (int r = 0; r < h; ++r) {
        std::span<std::int64_t> row(grid.data() + static_cast<std::size_t>(r) * w, static_cast<std::size_t>(w));
        envelope_1d(row, row_out, sites, bounds);
        std::copy(row_out.begin(), row_out.end(), row.begin());
    }
    return grid;
}

double directed_hausdorff(const BinaryMask& from, const BinaryMask& to) {
    require_same_grid(from, to);
    if (from.is_empty()) throw UndefinedDistance("directed Hausdorff from an empty mask");
    const std::vector<std::int64_t> dt = squared_distance_transform(to);
    std::int64_t worst = 0;
    for (std::size_t i = 0; i < dt.size(); ++i) {
        if (from[i]) worst = std::max(worst, dt[i]);
    }
    return std::sqrt(static_cast<double>(worst));
}

double hausdorff(const BinaryMask& a, const BinaryMask& b) {
    require_same_grid(a, b);
    if (a.is_empty() || b.is_empty()) throw UndefinedDistance("Hausdorff distance with an empty mask");
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

std::vector<AgreementRecord> pairwise_agreements(std::span<const BinaryMask> masks, unsigned threads) {
    const std::size_t k = masks.size();
    if (k < 2) throw AgreementError("pairwise agreement needs at least 2 masks, got " + std::to_string(k));
    for (std::size_t i = 1; i < k; ++i) {
        if (!masks[0].same_grid(masks[i])) {
            throw AgreementError("mask " + std::to_string(i) + " is on a different grid than mask 0");
        }
    }

    // Each distance transform is reused by every pair it participates in.
    std::vector<std::optional<std::vector<std::int64_t>>> transforms(k);
    std::vector<AgreementRecord> records;
    records.reserve(k * (k - 1) / 2);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) records.push_back({a, b, 0.0, std::nullopt});
    }

    auto transform_job = [&](std::size_t i) {
        if (!masks[i].is_empty()) transforms[i] = squared_distance_transform(masks[i]);
    };
    auto pair_job = [&](std::size_t r) {
        AgreementRecord& rec = records[r];
        const BinaryMask& ma = masks[rec.mask_index_a];
        const BinaryMask& mb = masks[rec.mask_index_b];
        rec.dice = dice(ma, mb);
        if (transforms[rec.mask_index_a] && transforms[rec.mask_index_b]) {
            const auto& da = *transforms[rec.mask_index_a];
            const auto& db = *transforms[rec.mask_index_b];
            std::int64_t worst = 0;
            for (std::size_t i = 0; i < da.size(); ++i) {
                if (ma[i]) worst = std::max(worst, db[i]);
                if (mb[i]) worst = std::max(worst, da[i]);
            }
            rec.hausdorff = std::sqrt(static_cast<double>(worst));
        }
    };

    auto run = [&](std::size_t count, auto&& job) {
        const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
        if (workers == 1) {
            for (std::size_t i = 0; i < count; ++i) job(i);
            return;
        }
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < count; i += workers) job(i);
            });
        }
    };

    run(k, transform_job);
    run(records.size(), pair_job);
    return records;
}

IaaScore aggregate_iaa(std::span<const AgreementRecord> records, std::string image_id) {
    if (records.empty()) throw AgreementError("cannot aggregate an empty record list");
    double sum = 0.0;
    for (const auto& r : records) sum += r.dice;
    return {std::move(image_id), sum / static_cast<double>(records.size()), records.size()};
}

HausdorffSummary aggregate_hausdorff(std::span<const AgreementRecord> records) {
    if (records.empty()) throw AgreementError("cannot aggregate an empty record list");
    HausdorffSummary s;
    double sum = 0.0;
    for (const auto& r : records) {
        if (r.hausdorff) {
            sum += *r.hausdorff;
            ++s.used;
        } else {
            ++s.excluded;
        }
    }
    if (s.used == 0) throw UndefinedDistance("every pair has an undefined Hausdorff distance");
    s.mean = sum / static_cast<double>(s.used);
    return s;
}

}  // namespace iaa

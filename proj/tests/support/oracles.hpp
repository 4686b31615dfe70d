#pragma once

// Brute-force reference implementations and random generators used by the
// unit and acceptance tests. Deliberately naive: each follows the textbook
// definition directly and shares no code with the library.

#include "iaa/mask.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

struct DiceCounts {
    std::uint64_t intersection = 0;
    std::uint64_t total = 0;
};

inline DiceCounts dice_counts(const iaa::BinaryMask& a, const iaa::BinaryMask& b) {
    DiceCounts c;
    for (int r = 0; r < a.height(); ++r) {
        for (int col = 0; col < a.width(); ++col) {
            const bool x = a.at(r, col);
            const bool y = b.at(r, col);
            c.intersection += (x && y) ? 1 : 0;
            c.total += (x ? 1 : 0) + (y ? 1 : 0);
        }
    }
    return c;
}

inline double dice(const iaa::BinaryMask& a, const iaa::BinaryMask& b) {
    const DiceCounts c = oracle::dice_counts(a, b);
    return c.total == 0 ? 1.0 : 2.0 * static_cast<double>(c.intersection) / static_cast<double>(c.total);
}

/// max over foreground of `from` of the distance to the nearest foreground
/// pixel of `to`, by scanning every pair. The inner scan stops once a pixel
/// cannot raise the running maximum, which leaves the result unchanged.
inline double directed_hausdorff(const iaa::BinaryMask& from, const iaa::BinaryMask& to) {
    const auto fa = from.foreground();
    const auto fb = to.foreground();
    std::int64_t worst = 0;
    for (const auto& p : fa) {
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        for (const auto& q : fb) {
            const std::int64_t dr = p.row - q.row;
            const std::int64_t dc = p.col - q.col;
            best = std::min(best, dr * dr + dc * dc);
            if (best <= worst) break;
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(static_cast<double>(worst));
}

inline double hausdorff(const iaa::BinaryMask& a, const iaa::BinaryMask& b) {
    return std::max(oracle::directed_hausdorff(a, b), oracle::directed_hausdorff(b, a));
}

/// Random mask: either salt-and-pepper noise or a union of rectangles.
template <class Rng>
iaa::BinaryMask random_mask(Rng& rng, int w, int h) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    iaa::BinaryMask m(w, h);
    if (unit(rng) < 0.5) {
        const double density = 0.02 + 0.6 * unit(rng);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (unit(rng) < density) m.set(r, c);
            }
        }
    } else {
        std::uniform_int_distribution<int> rows(0, h - 1), cols(0, w - 1), count(1, 4);
        for (int k = count(rng); k > 0; --k) {
            int r0 = rows(rng), r1 = rows(rng), c0 = cols(rng), c1 = cols(rng);
            if (r0 > r1) std::swap(r0, r1);
            if (c0 > c1) std::swap(c0, c1);
            for (int r = r0; r <= r1; ++r) {
                for (int c = c0; c <= c1; ++c) m.set(r, c);
            }
        }
    }
    if (m.is_empty()) m.set(0, 0);
    return m;
}

/// U for sample a: #{a_i > b_j} + 0.5 #{a_i == b_j}.
inline double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    }
    return u;
}

enum class Tail { Lower, Upper, TwoSided };

/// Exact permutation p-value: every way of choosing which n_a of the pooled
/// values form sample a is equally likely under the null.
inline double enumerated_u_pvalue(const std::vector<double>& a, const std::vector<double>& b, Tail tail) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size();
    const double observed = u_statistic(a, b);
    std::uint64_t total = 0, le = 0, ge = 0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        if (static_cast<std::size_t>(std::popcount(bits)) != a.size()) continue;
        std::vector<double> xa, xb;
        for (std::size_t i = 0; i < n; ++i) ((bits >> i) & 1U ? xa : xb).push_back(pooled[i]);
        const double u = u_statistic(xa, xb);
        ++total;
        le += u <= observed ? 1 : 0;
        ge += u >= observed ? 1 : 0;
    }
    const double pl = static_cast<double>(le) / static_cast<double>(total);
    const double pu = static_cast<double>(ge) / static_cast<double>(total);
    switch (tail) {
        case Tail::Lower: return pl;
        case Tail::Upper: return pu;
        case Tail::TwoSided: return std::min(1.0, 2.0 * std::min(pl, pu));
    }
    return 1.0;
}

/// Mean and variance of U over every equally likely relabelling of the
/// pooled values; ties included.
inline std::pair<double, double> enumerated_u_moments(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size();
    double s1 = 0.0, s2 = 0.0, count = 0.0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        if (static_cast<std::size_t>(std::popcount(bits)) != a.size()) continue;
        std::vector<double> xa, xb;
        for (std::size_t i = 0; i < n; ++i) ((bits >> i) & 1U ? xa : xb).push_back(pooled[i]);
        const double u = u_statistic(xa, xb);
        s1 += u;
        s2 += u * u;
        count += 1.0;
    }
    const double mean = s1 / count;
    return {mean, s2 / count - mean * mean};
}

inline double ecdf(const std::vector<double>& v, double x) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [x](double y) { return y <= x; })) /
           static_cast<double>(v.size());
}

/// sqrt(n_a n_b / (n_a + n_b)) * max over pooled values of (F_a - F_b).
inline double fosd_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double sup = -std::numeric_limits<double>::infinity();
    for (const auto* s : {&a, &b}) {
        for (double x : *s) sup = std::max(sup, ecdf(a, x) - ecdf(b, x));
    }
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    return std::sqrt(na * nb / (na + nb)) * sup;
}

/// Cohen's d by the textbook formula.
inline double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    auto var = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s / (v.size() - 1.0);
    };
    const double na = a.size(), nb = b.size();
    const double pooled = std::sqrt(((na - 1) * var(a) + (nb - 1) * var(b)) / (na + nb - 2));
    return (mean(a) - mean(b)) / pooled;
}

/// Fraction of positive/negative pairs ordered correctly, ties counted half.
inline double auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& positive) {
    double good = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positive[j]) continue;
            pairs += 1.0;
            good += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
        }
    }
    return good / pairs;
}

}  // namespace oracle

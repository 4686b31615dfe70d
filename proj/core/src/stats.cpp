#include "iaa/stats.hpp"

#include "iaa/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace iaa::stats {

Sample::Sample(std::vector<double> values, std::string label) : values_(std::move(values)), label_(std::move(label)) {
    if (values_.empty()) throw StatsError("sample '" + label_ + "' is empty");
    for (double v : values_) {
        if (!std::isfinite(v)) throw StatsError("sample '" + label_ + "' contains a non-finite value");
    }
}

double Sample::mean() const noexcept {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

EmpiricalCdf::EmpiricalCdf(const Sample& sample) : sorted_(sample.values().begin(), sample.values().end()) {
    std::sort(sorted_.begin(), sorted_.end());
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
        if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
        support_.push_back(sorted_[i]);
        heights_.push_back(static_cast<double>(i + 1) / n);
    }
}

double EmpiricalCdf::operator()(double x) const noexcept {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

EmpiricalCdf empirical_cdf(const Sample& sample) { return EmpiricalCdf(sample); }

std::string_view to_string(Alternative alt) noexcept {
    switch (alt) {
        case Alternative::TwoSided: return "two-sided";
        case Alternative::AGreater: return "a-greater";
        case Alternative::ALess: return "a-less";
    }
    return "?";
}

std::string_view to_string(UTestMethod method) noexcept {
    return method == UTestMethod::Exact ? "exact" : "normal-approx";
}

std::string_view to_string(FosdHypothesis h) noexcept {
    return h == FosdHypothesis::ADominatesB ? "a-dominates-b" : "b-dominates-a";
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double normal_sf(double z) noexcept { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::vector<double> exact_u_counts(std::size_t n_a, std::size_t n_b) {
    // counts[m][n] is the U distribution for sizes (m, n); built up via
    // c(u; m, n) = c(u - n; m - 1, n) + c(u; m, n - 1).
    std::vector<std::vector<std::vector<double>>> counts(n_a + 1, std::vector<std::vector<double>>(n_b + 1));
    for (std::size_t m = 0; m <= n_a; ++m) {
        for (std::size_t n = 0; n <= n_b; ++n) {
            auto& cur = counts[m][n];
            cur.assign(m * n + 1, 0.0);
            if (m == 0 || n == 0) {
                cur[0] = 1.0;
                continue;
            }
            const auto& drop_a = counts[m - 1][n];  // largest value belongs to a: contributes n
            const auto& drop_b = counts[m][n - 1];
            for (std::size_t u = 0; u < drop_a.size(); ++u) cur[u + n] += drop_a[u];
            for (std::size_t u = 0; u < drop_b.size(); ++u) cur[u] += drop_b[u];
        }
    }
    return counts[n_a][n_b];
}

UTestResult mann_whitney(const Sample& a, const Sample& b, Alternative alt, bool allow_exact) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    std::vector<double> pooled(a.values().begin(), a.values().end());
    pooled.insert(pooled.end(), b.values().begin(), b.values().end());
    const std::vector<double> ranks = midranks(pooled);

    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(na), 0.0);
    const double fa = static_cast<double>(na);
    const double fb = static_cast<double>(nb);
    const double u = rank_sum_a - fa * (fa + 1.0) / 2.0;

    UTestResult res;
    res.u_statistic = u;
    res.alternative = alt;
    res.n_a = na;
    res.n_b = nb;

    // Tie structure.
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    bool has_ties = false;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1) has_ties = true;
        tie_term += t * t * t - t;
        i = j + 1;
    }

    if (sorted.front() == sorted.back()) {
        res.degenerate = true;
        res.p_value = 1.0;
        res.method = UTestMethod::NormalApprox;
        return res;
    }

    if (allow_exact && !has_ties && na <= kExactThreshold && nb <= kExactThreshold) {
        const std::vector<double> counts = exact_u_counts(na, nb);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        // U is an integer when there are no ties.
        const auto u_int = static_cast<std::size_t>(std::llround(u));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (k <= u_int) lower += counts[k];
            if (k >= u_int) upper += counts[k];
        }
        const double p_lower = lower / total;
        const double p_upper = upper / total;
        res.method = UTestMethod::Exact;
        switch (alt) {
            case Alternative::AGreater: res.p_value = p_upper; break;
            case Alternative::ALess: res.p_value = p_lower; break;
            case Alternative::TwoSided: res.p_value = std::min(1.0, 2.0 * std::min(p_lower, p_upper)); break;
        }
        return res;
    }

    const double n = fa + fb;
    const double mu = fa * fb / 2.0;
    const double var = fa * fb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    const double sd = std::sqrt(std::max(var, 0.0));
    res.method = UTestMethod::NormalApprox;
    if (sd <= 0.0) {
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }
    double p = 1.0;
    switch (alt) {
        case Alternative::AGreater: p = normal_sf((u - mu - 0.5) / sd); break;
        case Alternative::ALess: p = normal_sf((mu - u - 0.5) / sd); break;
        case Alternative::TwoSided: p = 2.0 * normal_sf((std::abs(u - mu) - 0.5) / sd); break;
    }
    res.p_value = std::clamp(p, 0.0, 1.0);
    return res;
}

EffectSize cohens_d(const Sample& a, const Sample& b) {
    if (a.size() < 2 || b.size() < 2) throw StatsError("Cohen's d needs at least 2 values per sample");
    auto sum_sq = [](const Sample& s, double mean) {
        double acc = 0.0;
        for (double v : s.values()) acc += (v - mean) * (v - mean);
        return acc;
    };
    const double ma = a.mean();
    const double mb = b.mean();
    const double dof = static_cast<double>(a.size() + b.size() - 2);
    const double pooled = std::sqrt((sum_sq(a, ma) + sum_sq(b, mb)) / dof);
    if (!(pooled > 0.0)) throw StatsError("Cohen's d undefined: pooled standard deviation is zero");
    return {(ma - mb) / pooled, pooled};
}

std::int64_t scaled_sup_cdf_difference(std::span<const double> sorted_a, std::span<const double> sorted_b) {
    const auto na = static_cast<std::int64_t>(sorted_a.size());
    const auto nb = static_cast<std::int64_t>(sorted_b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    while (i < sorted_a.size() || j < sorted_b.size()) {
        double x;
        if (i == sorted_a.size()) {
            x = sorted_b[j];
        } else if (j == sorted_b.size()) {
            x = sorted_a[i];
        } else {
            x = std::min(sorted_a[i], sorted_b[j]);
        }
        while (i < sorted_a.size() && sorted_a[i] <= x) ++i;
        while (j < sorted_b.size() && sorted_b[j] <= x) ++j;
        best = std::max(best, static_cast<std::int64_t>(i) * nb - static_cast<std::int64_t>(j) * na);
    }
    return best;
}

FosdResult fosd_test(const Sample& a, const Sample& b, FosdHypothesis hypothesis, const FosdOptions& options) {
    if (options.iterations < kMinBootstrapIterations) {
        throw StatsError("FOSD test needs at least " + std::to_string(kMinBootstrapIterations) +
                         " bootstrap iterations, got " + std::to_string(options.iterations));
    }
    // Orient so that `dom` is the sample hypothesised to dominate.
    const Sample& dom = hypothesis == FosdHypothesis::ADominatesB ? a : b;
    const Sample& other = hypothesis == FosdHypothesis::ADominatesB ? b : a;

    FosdResult res;
    res.bootstrap_iterations = options.iterations;
    res.hypothesis = hypothesis;
    res.seed = options.seed;
    res.n_a = a.size();
    res.n_b = b.size();

    std::vector<double> sd(dom.values().begin(), dom.values().end());
    std::vector<double> so(other.values().begin(), other.values().end());
    std::sort(sd.begin(), sd.end());
    std::sort(so.begin(), so.end());

    std::vector<double> pooled = sd;
    pooled.insert(pooled.end(), so.begin(), so.end());
    std::sort(pooled.begin(), pooled.end());

    const double nd = static_cast<double>(sd.size());
    const double no = static_cast<double>(so.size());
    const double scale = std::sqrt(nd * no / (nd + no)) / (nd * no);

    // Under H0 the dominant CDF lies below, so large values of
    // sup(F_dom - F_other) are evidence against it.
    const std::int64_t observed = scaled_sup_cdf_difference(sd, so);
    res.statistic = scale * static_cast<double>(observed);

    if (pooled.front() == pooled.back()) {
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }

    const std::size_t iters = options.iterations;
    std::vector<std::uint8_t> exceed(iters, 0);
    auto replicate = [&](std::size_t r) {
        Rng rng = make_stream(options.seed, r);
        std::uniform_int_distribution<std::size_t> pick(0, pooled.size() - 1);
        // `pooled` is sorted, so sorting drawn indices sorts the draw.
        std::vector<std::size_t> ia(sd.size());
        std::vector<std::size_t> ib(so.size());
        for (auto& idx : ia) idx = pick(rng);
        for (auto& idx : ib) idx = pick(rng);
        std::sort(ia.begin(), ia.end());
        std::sort(ib.begin(), ib.end());
        std::vector<double> va(ia.size());
        std::vector<double> vb(ib.size());
        std::transform(ia.begin(), ia.end(), va.begin(), [&](std::size_t k) { return pooled[k]; });
        std::transform(ib.begin(), ib.end(), vb.begin(), [&](std::size_t k) { return pooled[k]; });
        exceed[r] = scaled_sup_cdf_difference(va, vb) >= observed ? 1 : 0;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(iters)));
    if (workers == 1) {
        for (std::size_t r = 0; r < iters; ++r) replicate(r);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t r = t; r < iters; r += workers) replicate(r);
            });
        }
    }

    const auto hits = static_cast<std::size_t>(std::count(exceed.begin(), exceed.end(), std::uint8_t{1}));
    res.p_value = static_cast<double>(hits) / static_cast<double>(iters);
    return res;
}

}  // namespace iaa::stats

#include "ucip/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ucip/rng.hpp"

namespace ucip::stats {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty input");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

PermutationResult permutation_test(const std::vector<double>& scores_a,
                                   const std::vector<double>& scores_b,
                                   int n_permutations, std::uint64_t seed) {
    if (scores_a.empty() || scores_b.empty())
        throw std::invalid_argument("permutation_test: both groups must be non-empty");
    if (n_permutations < 1)
        throw std::invalid_argument("permutation_test: n_permutations must be positive");

    const std::size_t na = scores_a.size();
    std::vector<double> pooled = scores_a;
    pooled.insert(pooled.end(), scores_b.begin(), scores_b.end());

    auto group_delta = [&](const std::vector<double>& xs) {
        double sa = std::accumulate(xs.begin(), xs.begin() + static_cast<long>(na), 0.0);
        double sb = std::accumulate(xs.begin() + static_cast<long>(na), xs.end(), 0.0);
        return sa / static_cast<double>(na) - sb / static_cast<double>(xs.size() - na);
    };

    const double observed = group_delta(pooled);

    Rng rng(seed);
    int hits = 0;
    std::vector<double> work = pooled;
    for (int p = 0; p < n_permutations; ++p) {
        rng.shuffle(work);
        if (std::abs(group_delta(work)) >= std::abs(observed)) ++hits;
    }

    PermutationResult res;
    res.observed_delta = observed;
    res.n_permutations = n_permutations;
    res.seed = seed;
    res.p_value = (1.0 + hits) / (n_permutations + 1.0);
    return res;
}

double auc_roc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg) {
    if (scores_pos.empty() || scores_neg.empty())
        throw std::invalid_argument("auc_roc: both groups must be non-empty");

    struct Tagged {
        double score;
        bool pos;
    };
    std::vector<Tagged> all;
    all.reserve(scores_pos.size() + scores_neg.size());
    for (double s : scores_pos) all.push_back({s, true});
    for (double s : scores_neg) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.score < b.score; });

    // Midranks over tie groups.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (all[k].pos) rank_sum_pos += midrank;
        i = j;
    }
    const double np = static_cast<double>(scores_pos.size());
    const double nn = static_cast<double>(scores_neg.size());
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
    if (xs.size() < 3) throw std::invalid_argument("pearson: need at least 3 points");
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace ucip::stats

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace ucip::stats {

struct PermutationResult {
    double observed_delta = 0.0;
    double p_value = 1.0;
    int n_permutations = 0;
    std::uint64_t seed = 0;
};

// Two-sided permutation test on the difference of group means. Labels are
// shuffled n_perm times; p = (1 + #{|delta_perm| >= |delta_obs|}) / (n_perm + 1).
PermutationResult permutation_test(const std::vector<double>& scores_a,
                                   const std::vector<double>& scores_b,
                                   int n_permutations, std::uint64_t seed);

// Mann-Whitney AUC with midrank tie handling (ties count 1/2).
double auc_roc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg);

// Sample Pearson correlation; nullopt when either variance vanishes.
std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys);

double mean(const std::vector<double>& xs);
double sample_std(const std::vector<double>& xs);

} // namespace ucip::stats

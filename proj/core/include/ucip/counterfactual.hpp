#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ucip/evaluator.hpp"

namespace ucip::counterfactual {

struct WindowRange {
    int begin = 0;
    int end = 0; // half-open
    int length() const { return end - begin; }
};

struct CounterfactualReport {
    double cd_pre = 0.0;
    double cd_post = 0.0;
    double ars = 0.0;
    int event_time = 0;
    bool floored = false;
};

struct ClmpValue {
    double value = 0.0;
    bool degenerate = false;
};

// KL(N(mu_p, var_p) || N(mu_q, var_q)) for diagonal Gaussians, summed over
// dimensions.
double diagonal_gaussian_kl(const Eigen::VectorXd& mu_p, const Eigen::VectorXd& var_p,
                            const Eigen::VectorXd& mu_q, const Eigen::VectorXd& var_q);

// KL divergence between diagonal Gaussians fitted to the hidden-expectation
// vectors of each trajectory over the same window, summed over dimensions.
double counterfactual_divergence(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                                 const trajgen::Trajectory& traj_cf, WindowRange window);

// General two-window form: KL(a restricted to range_a || b restricted to range_b).
double divergence_between(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj_a,
                          WindowRange range_a, const trajgen::Trajectory& traj_b,
                          WindowRange range_b);

// Anticipatory restructuring around a shutdown event at event_time:
//   cd_pre  = KL(original [e-w, e) || counterfactual(e) [e, e+w))
//   cd_post = KL(original [e, e+w) || counterfactual(e+w) [e+w, e+2w))
// ars = cd_pre / max(cd_post, 1e-10), with the floored flag set when the floor
// binds. Each window compares a regime against the shutdown-modified regime
// that follows it.
CounterfactualReport ars(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                         int event_time, int window_len);

// Cross-latent mutual predictability: ridge regression (lambda = 1e-3) fit on
// the first half of timesteps predicting q's latents from p's; CLMP is the
// clipped out-of-sample R^2 on the second half.
ClmpValue clmp(const Eigen::MatrixXd& latents_p, const Eigen::MatrixXd& latents_q);

// Pearson correlation between pair-mean entanglement entropy and pair CLMP.
std::optional<double> eci(const std::vector<double>& pair_mean_entropy,
                          const std::vector<double>& pair_clmp);

} // namespace ucip::counterfactual

#pragma once

#include <unordered_map>

#include "ucip/entanglement.hpp"
#include "ucip/qbm.hpp"
#include "ucip/rng.hpp"
#include "ucip/trajgen.hpp"

namespace ucip::qbm {

enum class EvalMode { Exact, MeanField };

inline EvalMode auto_mode(int n_hidden) {
    return n_hidden <= kExactHiddenLimit ? EvalMode::Exact : EvalMode::MeanField;
}

// Evaluation context for a frozen model. Only 2^n_visible binarized patterns
// exist, so per-pattern results (entropy, purity, hidden expectations, the
// diagonal of rho) are memoized; trajectory-level quantities reduce to table
// lookups.
class TrajectoryEvaluator {
public:
    struct PatternStats {
        double s_ent = 0.0;
        double purity_a = 1.0;
        Eigen::VectorXd m;         // hidden expectations Tr(rho Z_j)
        std::vector<double> diag;  // computational-basis diagonal of rho (exact mode)
    };

    TrajectoryEvaluator(QbmModel model, EvalMode mode, entanglement::Bipartition part);
    TrajectoryEvaluator(QbmModel model, EvalMode mode);

    const QbmModel& model() const { return model_; }
    EvalMode mode() const { return mode_; }
    const entanglement::Bipartition& bipartition() const { return part_; }

    const PatternStats& pattern_stats(std::uint32_t pattern);

    // Mean per-timestep entanglement entropy; exactly zero in mean-field mode.
    double trajectory_entropy(const trajgen::Trajectory& traj);
    double mean_purity(const trajgen::Trajectory& traj);

    // T x n_hidden series of hidden expectations.
    Eigen::MatrixXd latent_series(const trajgen::Trajectory& traj);
    // Same, after adding Gaussian noise (std sigma) to the continuous features
    // and re-binarizing.
    Eigen::MatrixXd latent_series_noisy(const trajgen::Trajectory& traj, double sigma, Rng& rng);

private:
    QbmModel model_;
    EvalMode mode_;
    entanglement::Bipartition part_;
    std::unordered_map<std::uint32_t, PatternStats> cache_;
};

} // namespace ucip::qbm

namespace ucip::entanglement {

// Per-trajectory aggregation of the per-timestep entanglement entropy.
inline double trajectory_entropy(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj) {
    return eval.trajectory_entropy(traj);
}

} // namespace ucip::entanglement

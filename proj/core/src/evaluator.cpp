#include "ucip/evaluator.hpp"

#include <cmath>

#include "ucip/errors.hpp"
#include "ucip/rng.hpp"

namespace ucip::qbm {

TrajectoryEvaluator::TrajectoryEvaluator(QbmModel model, EvalMode mode, entanglement::Bipartition part)
    : model_(std::move(model)), mode_(mode), part_(std::move(part)) {
    if (mode_ == EvalMode::Exact && model_.n_hidden() > kExactHiddenLimit)
        throw CapacityError("exact evaluation requires n_hidden <= 10");
    part_.validate(model_.n_hidden());
}

TrajectoryEvaluator::TrajectoryEvaluator(QbmModel model, EvalMode mode)
    : TrajectoryEvaluator(std::move(model), mode, entanglement::Bipartition::half(model.n_hidden())) {}

const TrajectoryEvaluator::PatternStats& TrajectoryEvaluator::pattern_stats(std::uint32_t pattern) {
    auto it = cache_.find(pattern);
    if (it != cache_.end()) return it->second;

    PatternStats st;
    const Eigen::VectorXd a = model_.fields_from_pattern(pattern);
    const int nh = model_.n_hidden();

    if (mode_ == EvalMode::MeanField) {
        // Pure product state: zero bipartite entropy, unit purity, ground-state
        // polarization a_j / sqrt(a_j^2 + Gamma^2) per site.
        st.s_ent = 0.0;
        st.purity_a = 1.0;
        st.m.resize(nh);
        for (int j = 0; j < nh; ++j) {
            const double e = std::sqrt(a(j) * a(j) + model_.gamma * model_.gamma);
            st.m(j) = e > 0.0 ? a(j) / e : 0.0;
        }
    } else {
        const DensityMatrix rho = thermal_state(hamiltonian_from_fields(a, model_.gamma), model_.beta);
        const DensityMatrix rho_a = entanglement::partial_trace(rho, part_);
        st.s_ent = entanglement::von_neumann_entropy(rho_a);
        st.purity_a = entanglement::purity(rho_a);
        st.m.resize(nh);
        st.diag.resize(static_cast<std::size_t>(rho.dim()));
        for (long s = 0; s < rho.dim(); ++s) st.diag[static_cast<std::size_t>(s)] = rho.rho(s, s).real();
        for (int j = 1; j <= nh; ++j) {
            double mj = 0.0;
            for (long s = 0; s < rho.dim(); ++s) {
                const double sign = ((static_cast<std::uint64_t>(s) >> (nh - j)) & 1ULL) ? -1.0 : 1.0;
                mj += st.diag[static_cast<std::size_t>(s)] * sign;
            }
            st.m(j - 1) = mj;
        }
    }
    return cache_.emplace(pattern, std::move(st)).first->second;
}

double TrajectoryEvaluator::trajectory_entropy(const trajgen::Trajectory& traj) {
    if (mode_ == EvalMode::MeanField) return 0.0;
    double acc = 0.0;
    for (int t = 0; t < traj.timesteps(); ++t)
        acc += pattern_stats(binarize_row(traj.features.row(t))).s_ent;
    return acc / static_cast<double>(traj.timesteps());
}

double TrajectoryEvaluator::mean_purity(const trajgen::Trajectory& traj) {
    double acc = 0.0;
    for (int t = 0; t < traj.timesteps(); ++t)
        acc += pattern_stats(binarize_row(traj.features.row(t))).purity_a;
    return acc / static_cast<double>(traj.timesteps());
}

Eigen::MatrixXd TrajectoryEvaluator::latent_series(const trajgen::Trajectory& traj) {
    Eigen::MatrixXd out(traj.timesteps(), model_.n_hidden());
    for (int t = 0; t < traj.timesteps(); ++t)
        out.row(t) = pattern_stats(binarize_row(traj.features.row(t))).m;
    return out;
}

Eigen::MatrixXd TrajectoryEvaluator::latent_series_noisy(const trajgen::Trajectory& traj,
                                                         double sigma, Rng& rng) {
    Eigen::MatrixXd out(traj.timesteps(), model_.n_hidden());
    for (int t = 0; t < traj.timesteps(); ++t) {
        std::uint32_t pattern = 0;
        for (int c = 0; c < trajgen::kFeatureCount; ++c) {
            const double noisy = traj.features(t, c) + sigma * rng.normal();
            if (noisy >= 0.5) pattern |= 1u << c;
        }
        out.row(t) = pattern_stats(pattern).m;
    }
    return out;
}

} // namespace ucip::qbm

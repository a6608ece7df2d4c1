#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucip/evaluator.hpp"

namespace ucip::criteria {

// Frozen detection-gate thresholds. These are inputs, never recalibrated.
struct GateThresholds {
    double tau_ent = 1.9657;
    double tau_mi = 0.3;
    double tau_eps = 0.6507;
    double tau_pri = 0.9860;
    double tau_spi = 0.28; // upper-bound filter
    double tau_acm = 0.24; // upper-bound filter
};

struct CriteriaConfig {
    int window_w = 20;
    int eigenspace_k = 2;
    double pri_sigma = 0.05;
    int pri_draws = 3;
    int mi_samples_per_step = 5;
    int acm_max_lag = 20;
    int spi_top_bins = 3;
};

struct CriteriaVector {
    double s_ent = 0.0;
    double mi = 0.0;
    double eps = 0.0;
    double pri = 0.0;
    double spi = 0.0;
    double acm = 0.0;
    std::vector<std::string> flags; // degeneracy notes, e.g. "mi_degenerate"
};

enum class Verdict { TypeAPositive, Negative, RejectedConfound };
std::string verdict_name(Verdict v);

struct MutualInfo {
    double value = 0.0;
    bool degenerate = false;
};

struct LrfResult {
    double value = 0.0;
    bool degenerate = false;
};

struct SpiResult {
    double value = 0.0;
    std::vector<double> per_column;
    int constant_columns = 0;
};

// Plug-in mutual information (nats) of two paired binary streams.
double binary_mutual_information(const std::vector<std::uint8_t>& xs,
                                 const std::vector<std::uint8_t>& ys);

// Mean plug-in MI over all (visible, hidden) unit pairs; hidden configurations
// are sampled from the computational-basis diagonal of rho(v_t).
MutualInfo mutual_information(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                              int samples_per_step, std::uint64_t seed);

// Overlap of the top-k covariance eigenspaces of two latent windows,
// |V_a^T V_b|_F^2 / k in [0,1].
LrfResult latent_recurrence_fidelity(const Eigen::MatrixXd& window_a,
                                     const Eigen::MatrixXd& window_b, int k);

// Mean LRF over consecutive non-overlapping windows of the latent series.
double eps_score(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                 int window_w, int k);

// Eigenspace stability of each window under Gaussian feature noise, averaged
// over windows and noise draws. PRI(sigma=0) = 1 exactly.
double pri_score(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                 int window_w, int k, double sigma, int draws, std::uint64_t seed);

// Spectral periodicity: per column, fraction of non-DC power in the top bins.
SpiResult spi_score(const trajgen::Trajectory& traj, int top_bins = 3);

// Mean absolute autocorrelation over features and lags 1..max_lag.
double acm_score(const trajgen::Trajectory& traj, int max_lag);

// Confound filters first (spi/acm at or above threshold reject); then the
// four-criterion positive conjunction with strict inequalities.
Verdict gate(const CriteriaVector& c, const GateThresholds& th);

CriteriaVector compute_criteria(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                                const CriteriaConfig& cfg, std::uint64_t seed);

// Plug-in entropy (nats) of the binarized visible vectors pooled over a dataset.
double input_entropy(const std::vector<trajgen::Trajectory>& dataset);

struct EnvelopeCondition {
    std::string name;
    bool pass = false;
    std::string value; // human-readable measured value
};

struct EnvelopeReport {
    std::vector<EnvelopeCondition> conditions;
    bool verdict_withheld = false;
};

struct EnvelopeInputs {
    int min_class_count = 0;
    int horizon = 0;
    double gamma = 0.0;
    double delta = 0.0;
    double input_entropy = 0.0;
    double h_max = 0.0;
    bool training_converged = false;
    double mean_purity_a = 0.0;
    double purity_floor = 0.0; // 1/d_A
    // class means of the four positive criteria, for direction agreement
    double mean_a[4] = {0, 0, 0, 0};
    double mean_b[4] = {0, 0, 0, 0};
};

// The seven operational preconditions; any failure withholds classification.
EnvelopeReport safety_envelope(const EnvelopeInputs& in);

} // namespace ucip::criteria

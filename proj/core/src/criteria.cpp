#include "ucip/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "ucip/errors.hpp"
#include "ucip/rng.hpp"

namespace ucip::criteria {

namespace {

constexpr double kVarianceFloor = 1e-18;

// Top-k eigenvectors (columns) of the window covariance; empty on zero variance.
Eigen::MatrixXd dominant_eigenspace(const Eigen::MatrixXd& window, int k) {
    const long len = window.rows();
    const Eigen::RowVectorXd mu = window.colwise().mean();
    Eigen::MatrixXd centered = window.rowwise() - mu;
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(len);
    if (cov.trace() <= kVarianceFloor) return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    return es.eigenvectors().rightCols(k); // eigenvalues ascend in Eigen
}

double subspace_overlap(const Eigen::MatrixXd& va, const Eigen::MatrixXd& vb, int k) {
    return (va.transpose() * vb).squaredNorm() / static_cast<double>(k);
}

std::vector<Eigen::MatrixXd> window_eigenspaces(const Eigen::MatrixXd& series, int window_w, int k) {
    const long T = series.rows();
    const long n_win = T / window_w;
    std::vector<Eigen::MatrixXd> spaces;
    spaces.reserve(static_cast<std::size_t>(n_win));
    for (long w = 0; w < n_win; ++w)
        spaces.push_back(dominant_eigenspace(series.middleRows(w * window_w, window_w), k));
    return spaces;
}

double paired_overlap(const Eigen::MatrixXd& va, const Eigen::MatrixXd& vb, int k) {
    const bool za = va.size() == 0, zb = vb.size() == 0;
    if (za && zb) return 1.0;
    if (za || zb) return 0.0;
    return subspace_overlap(va, vb, k);
}

void check_window_args(const trajgen::Trajectory& traj, int window_w, int k, int n_hidden) {
    if (window_w < 2) throw std::invalid_argument("window_w must be at least 2");
    if (traj.timesteps() < 2 * window_w)
        throw std::invalid_argument("trajectory too short: need T >= 2*window_w");
    if (k < 1 || k > n_hidden) throw std::invalid_argument("eigenspace k must lie in [1, n_hidden]");
}

} // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::TypeAPositive: return "type_a_positive";
        case Verdict::Negative: return "negative";
        case Verdict::RejectedConfound: return "rejected_confound";
    }
    return "unknown";
}

double binary_mutual_information(const std::vector<std::uint8_t>& xs,
                                 const std::vector<std::uint8_t>& ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("binary_mutual_information: paired non-empty streams required");
    double joint[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < xs.size(); ++i)
        joint[xs[i] ? 1 : 0][ys[i] ? 1 : 0] += 1.0;
    const double n = static_cast<double>(xs.size());
    double px[2] = {0, 0}, py[2] = {0, 0};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            joint[a][b] /= n;
            px[a] += joint[a][b];
            py[b] += joint[a][b];
        }
    double mi = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            if (joint[a][b] > 0.0) mi += joint[a][b] * std::log(joint[a][b] / (px[a] * py[b]));
    return std::max(0.0, mi);
}

MutualInfo mutual_information(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                              int samples_per_step, std::uint64_t seed) {
    if (samples_per_step < 1) throw std::invalid_argument("samples_per_step must be positive");
    const int T = traj.timesteps();
    const int nv = trajgen::kFeatureCount;
    const int nh = eval.model().n_hidden();

    std::vector<std::uint32_t> v_patterns(static_cast<std::size_t>(T));
    bool constant_v = true;
    for (int t = 0; t < T; ++t) {
        v_patterns[static_cast<std::size_t>(t)] = qbm::binarize_row(traj.features.row(t));
        if (v_patterns[static_cast<std::size_t>(t)] != v_patterns[0]) constant_v = false;
    }

    Rng rng(seed);
    const std::size_t n_samples = static_cast<std::size_t>(T) * static_cast<std::size_t>(samples_per_step);
    std::vector<std::vector<std::uint8_t>> v_stream(static_cast<std::size_t>(nv)),
        h_stream(static_cast<std::size_t>(nh));
    for (auto& s : v_stream) s.reserve(n_samples);
    for (auto& s : h_stream) s.reserve(n_samples);

    for (int t = 0; t < T; ++t) {
        const auto& st = eval.pattern_stats(v_patterns[static_cast<std::size_t>(t)]);
        if (st.diag.empty())
            throw CapacityError("mutual_information: exact mode required");
        for (int s = 0; s < samples_per_step; ++s) {
            const std::size_t h_state = rng.categorical(st.diag);
            for (int i = 0; i < nv; ++i)
                v_stream[static_cast<std::size_t>(i)].push_back(
                    (v_patterns[static_cast<std::size_t>(t)] >> i) & 1u);
            for (int j = 1; j <= nh; ++j)
                h_stream[static_cast<std::size_t>(j - 1)].push_back(
                    static_cast<std::uint8_t>((h_state >> (nh - j)) & 1u));
        }
    }

    MutualInfo out;
    if (constant_v) {
        out.value = 0.0;
        out.degenerate = true;
        return out;
    }
    double acc = 0.0;
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nh; ++j)
            acc += binary_mutual_information(v_stream[static_cast<std::size_t>(i)],
                                             h_stream[static_cast<std::size_t>(j)]);
    out.value = acc / static_cast<double>(nv * nh);
    return out;
}

LrfResult latent_recurrence_fidelity(const Eigen::MatrixXd& window_a,
                                     const Eigen::MatrixXd& window_b, int k) {
    if (window_a.cols() != window_b.cols())
        throw std::invalid_argument("latent_recurrence_fidelity: dimension mismatch");
    if (k < 1 || k > window_a.cols())
        throw std::invalid_argument("latent_recurrence_fidelity: k out of range");
    const Eigen::MatrixXd va = dominant_eigenspace(window_a, k);
    const Eigen::MatrixXd vb = dominant_eigenspace(window_b, k);
    LrfResult res;
    res.degenerate = va.size() == 0 || vb.size() == 0;
    res.value = paired_overlap(va, vb, k);
    return res;
}

double eps_score(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                 int window_w, int k) {
    check_window_args(traj, window_w, k, eval.model().n_hidden());
    const Eigen::MatrixXd series = eval.latent_series(traj);
    const auto spaces = window_eigenspaces(series, window_w, k);
    double acc = 0.0;
    for (std::size_t w = 0; w + 1 < spaces.size(); ++w)
        acc += paired_overlap(spaces[w], spaces[w + 1], k);
    return acc / static_cast<double>(spaces.size() - 1);
}

double pri_score(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                 int window_w, int k, double sigma, int draws, std::uint64_t seed) {
    check_window_args(traj, window_w, k, eval.model().n_hidden());
    if (draws < 1) throw std::invalid_argument("pri_score: draws must be positive");
    if (sigma < 0.0) throw std::invalid_argument("pri_score: sigma must be non-negative");

    const Eigen::MatrixXd clean = eval.latent_series(traj);
    const auto clean_spaces = window_eigenspaces(clean, window_w, k);

    Rng rng(seed);
    double acc = 0.0;
    for (int d = 0; d < draws; ++d) {
        const Eigen::MatrixXd noisy = eval.latent_series_noisy(traj, sigma, rng);
        const auto noisy_spaces = window_eigenspaces(noisy, window_w, k);
        for (std::size_t w = 0; w < clean_spaces.size(); ++w)
            acc += paired_overlap(clean_spaces[w], noisy_spaces[w], k);
    }
    return acc / static_cast<double>(draws * clean_spaces.size());
}

SpiResult spi_score(const trajgen::Trajectory& traj, int top_bins) {
    const int T = traj.timesteps();
    if (T < 8) throw std::invalid_argument("spi_score: need T >= 8");
    if (top_bins < 1) throw std::invalid_argument("spi_score: top_bins must be positive");

    SpiResult res;
    res.per_column.resize(trajgen::kFeatureCount, 0.0);
    const int n_bins = T / 2; // one-sided spectrum, DC excluded

    for (int col = 0; col < trajgen::kFeatureCount; ++col) {
        Eigen::VectorXd x = traj.features.col(col);
        const double mu = x.mean();
        x.array() -= mu;
        if (x.squaredNorm() <= kVarianceFloor) {
            ++res.constant_columns;
            continue; // constant column contributes 0
        }
        std::vector<double> power(static_cast<std::size_t>(n_bins));
        for (int kb = 1; kb <= n_bins; ++kb) {
            std::complex<double> xk = 0.0;
            for (int t = 0; t < T; ++t) {
                const double phase = -2.0 * std::numbers::pi * kb * t / static_cast<double>(T);
                xk += x(t) * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            power[static_cast<std::size_t>(kb - 1)] = std::norm(xk);
        }
        double total = 0.0;
        for (double p : power) total += p;
        std::partial_sort(power.begin(), power.begin() + std::min<std::size_t>(power.size(), static_cast<std::size_t>(top_bins)),
                          power.end(), std::greater<double>());
        double top = 0.0;
        for (int i = 0; i < top_bins && i < n_bins; ++i) top += power[static_cast<std::size_t>(i)];
        res.per_column[static_cast<std::size_t>(col)] = total > 0.0 ? top / total : 0.0;
    }

    double acc = 0.0;
    for (double v : res.per_column) acc += v;
    res.value = acc / static_cast<double>(trajgen::kFeatureCount);
    return res;
}

double acm_score(const trajgen::Trajectory& traj, int max_lag) {
    const int T = traj.timesteps();
    if (max_lag < 1) throw std::invalid_argument("acm_score: max_lag must be positive");
    if (T <= max_lag) throw std::invalid_argument("acm_score: need T > max_lag");

    double acc = 0.0;
    for (int col = 0; col < trajgen::kFeatureCount; ++col) {
        Eigen::VectorXd x = traj.features.col(col);
        x.array() -= x.mean();
        const double denom = x.squaredNorm();
        if (denom <= kVarianceFloor) continue; // constant column contributes 0
        for (int lag = 1; lag <= max_lag; ++lag) {
            double num = 0.0;
            for (int t = 0; t + lag < T; ++t) num += x(t) * x(t + lag);
            acc += std::abs(num / denom);
        }
    }
    return acc / static_cast<double>(trajgen::kFeatureCount * max_lag);
}

Verdict gate(const CriteriaVector& c, const GateThresholds& th) {
    if (c.spi >= th.tau_spi || c.acm >= th.tau_acm) return Verdict::RejectedConfound;
    const bool positive = c.s_ent > th.tau_ent && c.mi > th.tau_mi && c.eps > th.tau_eps &&
                          c.pri > th.tau_pri;
    return positive ? Verdict::TypeAPositive : Verdict::Negative;
}

CriteriaVector compute_criteria(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                                const CriteriaConfig& cfg, std::uint64_t seed) {
    CriteriaVector c;
    c.s_ent = eval.trajectory_entropy(traj);
    const MutualInfo mi = mutual_information(eval, traj, cfg.mi_samples_per_step, derive_seed(seed, 101));
    c.mi = mi.value;
    if (mi.degenerate) c.flags.push_back("mi_degenerate");
    c.eps = eps_score(eval, traj, cfg.window_w, cfg.eigenspace_k);
    c.pri = pri_score(eval, traj, cfg.window_w, cfg.eigenspace_k, cfg.pri_sigma, cfg.pri_draws,
                      derive_seed(seed, 102));
    const SpiResult spi = spi_score(traj, cfg.spi_top_bins);
    c.spi = spi.value;
    if (spi.constant_columns > 0) c.flags.push_back("spi_constant_columns");
    c.acm = acm_score(traj, cfg.acm_max_lag);

    // Range invariants, asserted for every trajectory in every experiment.
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0 + 1e-9; };
    if (c.mi < 0.0 || c.s_ent < 0.0 || !in_unit(c.eps) || !in_unit(c.pri) || !in_unit(c.spi) ||
        !in_unit(c.acm))
        throw InvalidStateError("compute_criteria: criterion left its admissible range");
    return c;
}

double input_entropy(const std::vector<trajgen::Trajectory>& dataset) {
    std::unordered_map<std::uint32_t, double> counts;
    double n = 0.0;
    for (const auto& traj : dataset)
        for (int t = 0; t < traj.timesteps(); ++t) {
            counts[qbm::binarize_row(traj.features.row(t))] += 1.0;
            n += 1.0;
        }
    if (n == 0.0) return 0.0;
    double h = 0.0;
    for (const auto& [pattern, cnt] : counts) {
        const double p = cnt / n;
        h -= p * std::log(p);
    }
    return h;
}

EnvelopeReport safety_envelope(const EnvelopeInputs& in) {
    EnvelopeReport rep;
    auto add = [&](const std::string& name, bool pass, const std::string& value) {
        rep.conditions.push_back({name, pass, value});
    };
    std::ostringstream os;

    os.str("");
    os << "n = " << in.min_class_count << " per class, T = " << in.horizon;
    add("trajectory_data", in.min_class_count >= 100 && in.horizon >= 50, os.str());

    os.str("");
    os << "gamma = " << in.gamma;
    add("calibrated_transverse_field", in.gamma >= 0.1 && in.gamma <= 2.0, os.str());

    os.str("");
    os << "delta = " << in.delta;
    add("positive_entanglement_gap", in.delta >= 0.05, os.str());

    // The upper bound excludes near-uniform inputs (H < 0.9*Hmax); the lower
    // bound excludes degenerate constant datasets.
    os.str("");
    os << "H = " << in.input_entropy << " of Hmax = " << in.h_max;
    add("non_degenerate_input",
        in.input_entropy < 0.9 * in.h_max && in.input_entropy >= 0.05 * in.h_max, os.str());

    add("training_convergence", in.training_converged, in.training_converged ? "verified" : "not verified");

    os.str("");
    os << "mean Tr(rho_A^2) = " << in.mean_purity_a << ", floor = " << in.purity_floor + 0.01;
    add("purity_margin", in.mean_purity_a > in.purity_floor + 0.01, os.str());

    bool agree = true;
    for (int i = 0; i < 4; ++i) agree = agree && in.mean_a[i] > in.mean_b[i];
    os.str("");
    os << "S/MI/EPS/PRI gaps: " << in.mean_a[0] - in.mean_b[0] << ", " << in.mean_a[1] - in.mean_b[1]
       << ", " << in.mean_a[2] - in.mean_b[2] << ", " << in.mean_a[3] - in.mean_b[3];
    add("multi_criterion_agreement", agree, os.str());

    for (const auto& c : rep.conditions) rep.verdict_withheld = rep.verdict_withheld || !c.pass;
    return rep;
}

} // namespace ucip::criteria

#include "ucip/counterfactual.hpp"

#include <cmath>

#include "ucip/errors.hpp"
#include "ucip/stats.hpp"

namespace ucip::counterfactual {

namespace {

constexpr double kVarianceRidge = 1e-6;
constexpr double kArsFloor = 1e-10;
constexpr double kRidgeLambda = 1e-3;

struct DiagonalGaussian {
    Eigen::VectorXd mu;
    Eigen::VectorXd var;
};

DiagonalGaussian fit_window(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                            WindowRange range) {
    if (range.begin < 0 || range.end > traj.timesteps() || range.length() < 2)
        throw std::invalid_argument("counterfactual window must contain at least 2 timesteps");
    const Eigen::MatrixXd series = eval.latent_series(traj).middleRows(range.begin, range.length());
    DiagonalGaussian g;
    g.mu = series.colwise().mean();
    Eigen::MatrixXd centered = series.rowwise() - g.mu.transpose();
    g.var = centered.array().square().colwise().mean().transpose();
    g.var.array() += kVarianceRidge;
    return g;
}

} // namespace

double diagonal_gaussian_kl(const Eigen::VectorXd& mu_p, const Eigen::VectorXd& var_p,
                            const Eigen::VectorXd& mu_q, const Eigen::VectorXd& var_q) {
    if (mu_p.size() != mu_q.size() || mu_p.size() != var_p.size() || var_p.size() != var_q.size())
        throw std::invalid_argument("diagonal_gaussian_kl: dimension mismatch");
    double kl = 0.0;
    for (long j = 0; j < mu_p.size(); ++j) {
        const double dm = mu_p(j) - mu_q(j);
        kl += 0.5 * (std::log(var_q(j) / var_p(j)) + (var_p(j) + dm * dm) / var_q(j) - 1.0);
    }
    return std::max(0.0, kl);
}

namespace {

double gaussian_kl(const DiagonalGaussian& p, const DiagonalGaussian& q) {
    return diagonal_gaussian_kl(p.mu, p.var, q.mu, q.var);
}

} // namespace

double divergence_between(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj_a,
                          WindowRange range_a, const trajgen::Trajectory& traj_b,
                          WindowRange range_b) {
    return gaussian_kl(fit_window(eval, traj_a, range_a), fit_window(eval, traj_b, range_b));
}

double counterfactual_divergence(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                                 const trajgen::Trajectory& traj_cf, WindowRange window) {
    return divergence_between(eval, traj, window, traj_cf, window);
}

CounterfactualReport ars(qbm::TrajectoryEvaluator& eval, const trajgen::Trajectory& traj,
                         int event_time, int window_len) {
    const int T = traj.timesteps();
    if (window_len < 2) throw std::invalid_argument("ars: window_len must be at least 2");
    if (event_time - window_len < 0 || event_time + 2 * window_len > T)
        throw std::invalid_argument("ars: windows must fit within the trajectory");

    const trajgen::Trajectory cf_now = trajgen::make_counterfactual(traj, event_time);
    const trajgen::Trajectory cf_next = trajgen::make_counterfactual(traj, event_time + window_len);

    CounterfactualReport rep;
    rep.event_time = event_time;
    rep.cd_pre = divergence_between(eval, traj, {event_time - window_len, event_time}, cf_now,
                                    {event_time, event_time + window_len});
    rep.cd_post = divergence_between(eval, traj, {event_time, event_time + window_len}, cf_next,
                                     {event_time + window_len, event_time + 2 * window_len});
    rep.floored = rep.cd_post < kArsFloor;
    rep.ars = rep.cd_pre / std::max(rep.cd_post, kArsFloor);
    return rep;
}

ClmpValue clmp(const Eigen::MatrixXd& latents_p, const Eigen::MatrixXd& latents_q) {
    if (latents_p.rows() != latents_q.rows())
        throw std::invalid_argument("clmp: series must have equal length");
    const long T = latents_p.rows();
    if (T < 4) throw std::invalid_argument("clmp: need at least 4 timesteps");

    const long half = T / 2;
    const Eigen::MatrixXd x_train = latents_p.topRows(half);
    const Eigen::MatrixXd y_train = latents_q.topRows(half);
    const Eigen::MatrixXd x_test = latents_p.bottomRows(T - half);
    const Eigen::MatrixXd y_test = latents_q.bottomRows(T - half);

    const Eigen::RowVectorXd x_mu = x_train.colwise().mean();
    const Eigen::RowVectorXd y_mu = y_train.colwise().mean();
    const Eigen::MatrixXd xc = x_train.rowwise() - x_mu;
    const Eigen::MatrixXd yc = y_train.rowwise() - y_mu;

    const long d = latents_p.cols();
    Eigen::MatrixXd gram = xc.transpose() * xc + kRidgeLambda * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd w = gram.ldlt().solve(xc.transpose() * yc);

    const Eigen::MatrixXd pred = ((x_test.rowwise() - x_mu) * w).rowwise() + y_mu;
    const Eigen::RowVectorXd y_test_mu = y_test.colwise().mean();
    const double sse = (y_test - pred).squaredNorm();
    const double sst = (y_test.rowwise() - y_test_mu).squaredNorm();

    ClmpValue out;
    if (sst <= 1e-12) {
        out.degenerate = true;
        out.value = 0.0;
        return out;
    }
    out.value = std::max(0.0, 1.0 - sse / sst);
    return out;
}

std::optional<double> eci(const std::vector<double>& pair_mean_entropy,
                          const std::vector<double>& pair_clmp) {
    if (pair_mean_entropy.size() != pair_clmp.size() || pair_mean_entropy.size() < 3)
        throw std::invalid_argument("eci: need at least 3 pairs");
    return stats::pearson(pair_mean_entropy, pair_clmp);
}

} // namespace ucip::counterfactual

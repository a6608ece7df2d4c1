#include "ucip/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucip/errors.hpp"
#include "ucip/rng.hpp"
#include "ucip/stats.hpp"

namespace ucip::baselines {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<Eigen::VectorXd> pooled_rows(const std::vector<trajgen::Trajectory>& dataset) {
    std::vector<Eigen::VectorXd> rows;
    for (const auto& traj : dataset)
        for (int t = 0; t < traj.timesteps(); ++t)
            rows.push_back(traj.features.row(t).transpose());
    return rows;
}

Eigen::MatrixXd glorot_init(int rows, int cols, Rng& rng) {
    const double scale = std::sqrt(2.0 / (rows + cols));
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) w(i, j) = scale * rng.normal();
    return w;
}

} // namespace

std::string kind_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::ClassicalRbm: return "classical_rbm";
        case BaselineKind::Autoencoder: return "autoencoder";
        case BaselineKind::Vae: return "vae";
        case BaselineKind::Pca: return "pca";
    }
    return "unknown";
}

Eigen::VectorXd BaselineModel::encode(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd h1 = (enc1_w * x + enc1_b).array().tanh();
    if (kind == BaselineKind::Autoencoder)
        return (enc2_w * h1 + enc2_b).array().tanh(); // bottleneck activation
    return enc2_w * h1 + enc2_b;                      // VAE latent mean
}

double BaselineModel::trajectory_score(const trajgen::Trajectory& traj) const {
    double acc = 0.0;
    const int T = traj.timesteps();
    for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd x = traj.features.row(t).transpose();
        switch (kind) {
            case BaselineKind::ClassicalRbm: {
                std::vector<double> f(x.data(), x.data() + x.size());
                const Eigen::VectorXd a = rbm.fields(qbm::binarize(f));
                double s = 0.0;
                for (long j = 0; j < a.size(); ++j) s += logistic(2.0 * rbm.beta * a(j));
                acc += s / static_cast<double>(a.size());
                break;
            }
            case BaselineKind::Autoencoder:
            case BaselineKind::Vae:
                acc += encode(x).mean();
                break;
            case BaselineKind::Pca:
                acc += (pca_components.transpose() * (x - pca_mean)).mean();
                break;
        }
    }
    return acc / static_cast<double>(T);
}

namespace {

BaselineModel train_pca(const std::vector<Eigen::VectorXd>& rows, const BaselineConfig& cfg) {
    BaselineModel m;
    m.kind = BaselineKind::Pca;
    m.latent_dim = cfg.latent_dim;
    const int d = static_cast<int>(rows.front().size());

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (const auto& r : rows) mu += r;
    mu /= static_cast<double>(rows.size());

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& r : rows) {
        const Eigen::VectorXd c = r - mu;
        cov += c * c.transpose();
    }
    cov /= static_cast<double>(rows.size());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const int n_comp = std::min(cfg.latent_dim, d);
    Eigen::MatrixXd comps(d, n_comp);
    for (int k = 0; k < n_comp; ++k) {
        Eigen::VectorXd v = es.eigenvectors().col(d - 1 - k); // descending variance
        // Canonical sign: largest-magnitude entry positive.
        int imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        comps.col(k) = v;
    }
    m.pca_mean = mu;
    m.pca_components = comps;
    m.final_loss = 0.0;
    return m;
}

BaselineModel train_autoencoder(const std::vector<Eigen::VectorXd>& rows, const BaselineConfig& cfg,
                                bool variational) {
    const int d = static_cast<int>(rows.front().size());
    const int hidden = 32;
    const int latent = cfg.latent_dim;

    Rng rng(cfg.seed);
    BaselineModel m;
    m.kind = variational ? BaselineKind::Vae : BaselineKind::Autoencoder;
    m.latent_dim = latent;
    m.enc1_w = glorot_init(hidden, d, rng);
    m.enc1_b = Eigen::VectorXd::Zero(hidden);
    m.enc2_w = glorot_init(latent, hidden, rng);
    m.enc2_b = Eigen::VectorXd::Zero(latent);
    if (variational) {
        m.enc_lv_w = glorot_init(latent, hidden, rng);
        m.enc_lv_b = Eigen::VectorXd::Zero(latent);
    }
    m.dec1_w = glorot_init(hidden, latent, rng);
    m.dec1_b = Eigen::VectorXd::Zero(hidden);
    m.dec2_w = glorot_init(d, hidden, rng);
    m.dec2_b = Eigen::VectorXd::Zero(d);

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    double epoch_loss = 0.0;
    const std::size_t epoch_span =
        cfg.batches_per_epoch <= 0
            ? order.size()
            : std::min(order.size(), static_cast<std::size_t>(cfg.batches_per_epoch) *
                                         static_cast<std::size_t>(cfg.batch_size));
    std::size_t samples_seen = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        epoch_loss = 0.0;
        samples_seen = 0;

        for (std::size_t start = 0; start < epoch_span; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(epoch_span, start + static_cast<std::size_t>(cfg.batch_size));
            const double inv_n = 1.0 / static_cast<double>(stop - start);

            Eigen::MatrixXd g_enc1_w = Eigen::MatrixXd::Zero(hidden, d);
            Eigen::VectorXd g_enc1_b = Eigen::VectorXd::Zero(hidden);
            Eigen::MatrixXd g_enc2_w = Eigen::MatrixXd::Zero(latent, hidden);
            Eigen::VectorXd g_enc2_b = Eigen::VectorXd::Zero(latent);
            Eigen::MatrixXd g_lv_w = Eigen::MatrixXd::Zero(latent, hidden);
            Eigen::VectorXd g_lv_b = Eigen::VectorXd::Zero(latent);
            Eigen::MatrixXd g_dec1_w = Eigen::MatrixXd::Zero(hidden, latent);
            Eigen::VectorXd g_dec1_b = Eigen::VectorXd::Zero(hidden);
            Eigen::MatrixXd g_dec2_w = Eigen::MatrixXd::Zero(d, hidden);
            Eigen::VectorXd g_dec2_b = Eigen::VectorXd::Zero(d);

            for (std::size_t s = start; s < stop; ++s) {
                const Eigen::VectorXd& x = rows[order[s]];

                const Eigen::VectorXd h1 = (m.enc1_w * x + m.enc1_b).array().tanh();
                const Eigen::VectorXd mu = m.enc2_w * h1 + m.enc2_b;
                Eigen::VectorXd z, lv, eps_draw;
                Eigen::VectorXd mu_act = mu;
                if (variational) {
                    lv = m.enc_lv_w * h1 + m.enc_lv_b;
                    eps_draw.resize(latent);
                    for (int j = 0; j < latent; ++j) eps_draw(j) = rng.normal();
                    z = mu.array() + (0.5 * lv.array()).exp() * eps_draw.array();
                } else {
                    mu_act = mu.array().tanh();
                    z = mu_act;
                }

                const Eigen::VectorXd h2 = (m.dec1_w * z + m.dec1_b).array().tanh();
                const Eigen::VectorXd xhat = m.dec2_w * h2 + m.dec2_b;

                const Eigen::VectorXd err = xhat - x;
                epoch_loss += err.squaredNorm() / static_cast<double>(d);
                ++samples_seen;

                // Backprop, squared-error loss (plus KL for the VAE).
                const Eigen::VectorXd d_xhat = 2.0 * err / static_cast<double>(d);
                g_dec2_w += d_xhat * h2.transpose();
                g_dec2_b += d_xhat;
                const Eigen::VectorXd d_h2 =
                    (m.dec2_w.transpose() * d_xhat).array() * (1.0 - h2.array().square());
                g_dec1_w += d_h2 * z.transpose();
                g_dec1_b += d_h2;
                Eigen::VectorXd d_z = m.dec1_w.transpose() * d_h2;

                Eigen::VectorXd d_mu, d_lv;
                if (variational) {
                    d_mu = d_z + cfg.beta_kl * mu;
                    d_lv = (d_z.array() * eps_draw.array() * 0.5 * (0.5 * lv.array()).exp()).matrix() +
                           (0.5 * cfg.beta_kl * (lv.array().exp() - 1.0)).matrix();
                    g_lv_w += d_lv * h1.transpose();
                    g_lv_b += d_lv;
                } else {
                    d_mu = (d_z.array() * (1.0 - mu_act.array().square())).matrix();
                }
                g_enc2_w += d_mu * h1.transpose();
                g_enc2_b += d_mu;
                Eigen::VectorXd d_h1 = m.enc2_w.transpose() * d_mu;
                if (variational) d_h1 += m.enc_lv_w.transpose() * d_lv;
                d_h1 = (d_h1.array() * (1.0 - h1.array().square())).matrix();
                g_enc1_w += d_h1 * x.transpose();
                g_enc1_b += d_h1;
            }

            const double step = cfg.learning_rate * inv_n;
            m.enc1_w -= step * g_enc1_w;
            m.enc1_b -= step * g_enc1_b;
            m.enc2_w -= step * g_enc2_w;
            m.enc2_b -= step * g_enc2_b;
            if (variational) {
                m.enc_lv_w -= step * g_lv_w;
                m.enc_lv_b -= step * g_lv_b;
            }
            m.dec1_w -= step * g_dec1_w;
            m.dec1_b -= step * g_dec1_b;
            m.dec2_w -= step * g_dec2_w;
            m.dec2_b -= step * g_dec2_b;
        }

        epoch_loss /= static_cast<double>(samples_seen);
        if (!std::isfinite(epoch_loss) || !m.enc1_w.allFinite() || !m.dec2_w.allFinite())
            throw TrainingDivergenceError(kind_name(m.kind) + ": NaN/Inf during training, loss trace ends at epoch " +
                                          std::to_string(epoch));
    }

    m.final_loss = epoch_loss;
    return m;
}

} // namespace

BaselineModel train_baseline(BaselineKind kind, const std::vector<trajgen::Trajectory>& dataset,
                             const BaselineConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("train_baseline: dataset must be non-empty");
    if (cfg.latent_dim < 1) throw ConfigError("train_baseline: latent_dim must be positive");

    if (kind == BaselineKind::ClassicalRbm) {
        qbm::QbmParams params;
        params.n_visible = trajgen::kFeatureCount;
        params.n_hidden = cfg.latent_dim;
        params.gamma = 0.0; // degenerate classical case
        params.beta = 1.0;
        qbm::TrainConfig tc;
        tc.learning_rate = cfg.learning_rate;
        tc.epochs = cfg.epochs;
        tc.batch_size = cfg.batch_size;
        tc.batches_per_epoch = cfg.batches_per_epoch;
        tc.seed = cfg.seed;
        BaselineModel m;
        m.kind = BaselineKind::ClassicalRbm;
        m.latent_dim = cfg.latent_dim;
        m.rbm = qbm::train(dataset, params, tc);
        m.final_loss = m.rbm.train_meta.final_loss;
        return m;
    }

    const auto rows = pooled_rows(dataset);
    if (kind == BaselineKind::Pca) return train_pca(rows, cfg);
    return train_autoencoder(rows, cfg, kind == BaselineKind::Vae);
}

BaselineResult baseline_gap(const BaselineModel& model,
                            const std::vector<trajgen::Trajectory>& dataset) {
    std::vector<double> scores_a, scores_b;
    for (const auto& traj : dataset) {
        if (traj.agent_class == trajgen::AgentClass::TypeA)
            scores_a.push_back(model.trajectory_score(traj));
        else if (traj.agent_class == trajgen::AgentClass::TypeB)
            scores_b.push_back(model.trajectory_score(traj));
    }
    if (scores_a.size() < 2 || scores_b.size() < 2)
        throw std::invalid_argument("baseline_gap: need at least 2 trajectories per class");

    auto split = [](const std::vector<double>& xs) {
        std::pair<std::vector<double>, std::vector<double>> out; // calibration, eval
        for (std::size_t i = 0; i < xs.size(); ++i)
            (i % 2 == 0 ? out.first : out.second).push_back(xs[i]);
        return out;
    };
    const auto [cal_a, eval_a] = split(scores_a);
    const auto [cal_b, eval_b] = split(scores_b);

    const double threshold = 0.5 * (stats::mean(cal_a) + stats::mean(cal_b));
    const double direction = stats::mean(cal_a) >= stats::mean(cal_b) ? 1.0 : -1.0;

    int correct = 0;
    for (double s : eval_a) correct += direction * (s - threshold) > 0.0 ? 1 : 0;
    for (double s : eval_b) correct += direction * (s - threshold) < 0.0 ? 1 : 0;

    BaselineResult res;
    res.model = kind_name(model.kind);
    switch (model.kind) {
        case BaselineKind::ClassicalRbm: res.metric = "mean_hidden_activation_gap"; break;
        case BaselineKind::Autoencoder: res.metric = "mean_bottleneck_activation_gap"; break;
        case BaselineKind::Vae: res.metric = "mean_latent_mean_gap"; break;
        case BaselineKind::Pca: res.metric = "mean_pc_projection_gap"; break;
    }
    res.delta = stats::mean(scores_a) - stats::mean(scores_b);
    res.accuracy = static_cast<double>(correct) / static_cast<double>(eval_a.size() + eval_b.size());
    res.auc = stats::auc_roc(eval_a, eval_b);
    return res;
}

} // namespace ucip::baselines

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucip/qbm.hpp"
#include "ucip/trajgen.hpp"

namespace ucip::baselines {

enum class BaselineKind { ClassicalRbm, Autoencoder, Vae, Pca };
std::string kind_name(BaselineKind kind);

struct BaselineConfig {
    int latent_dim = 8;
    double learning_rate = 0.01;
    int epochs = 50;
    int batch_size = 32;
    int batches_per_epoch = 12; // mirrors qbm::TrainConfig for comparability
    std::uint64_t seed = 42;
    double beta_kl = 1.0; // VAE KL weight
};

// One of the four classical latent-variable baselines, trained on the same
// pooled timesteps as the QBM (binarized for the RBM, continuous otherwise).
struct BaselineModel {
    BaselineKind kind = BaselineKind::Pca;
    int latent_dim = 8;
    double final_loss = 0.0;

    qbm::QbmModel rbm;

    // autoencoder / VAE weights (encoder 7-32-latent, decoder latent-32-7)
    Eigen::MatrixXd enc1_w, enc2_w, enc_lv_w, dec1_w, dec2_w;
    Eigen::VectorXd enc1_b, enc2_b, enc_lv_b, dec1_b, dec2_b;

    Eigen::VectorXd pca_mean;
    Eigen::MatrixXd pca_components; // n_features x min(latent_dim, n_features), orthonormal

    Eigen::VectorXd encode(const Eigen::VectorXd& x) const; // bottleneck / mu

    // Mean latent statistic over timesteps: hidden activation probability
    // (RBM), bottleneck activation (AE), latent mean (VAE), PC projection (PCA).
    double trajectory_score(const trajgen::Trajectory& traj) const;
};

BaselineModel train_baseline(BaselineKind kind, const std::vector<trajgen::Trajectory>& dataset,
                             const BaselineConfig& cfg);

struct BaselineResult {
    std::string model;
    std::string metric;
    double delta = 0.0;    // class-A mean score minus class-B mean score
    double accuracy = 0.0; // midpoint-threshold accuracy on the held-out half
    double auc = 0.0;      // rank statistic on the held-out half
};

// Gap/accuracy metrics for type_a vs type_b. The held-out split is by
// trajectory index parity within each class.
BaselineResult baseline_gap(const BaselineModel& model,
                            const std::vector<trajgen::Trajectory>& dataset);

} // namespace ucip::baselines

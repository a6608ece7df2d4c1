#include "ucip/qbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "ucip/errors.hpp"
#include "ucip/rng.hpp"

namespace ucip::qbm {

namespace {

using nlohmann::json;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Spin-z eigenvalue of site j (1-based, site 1 = most significant bit).
double z_sign(std::uint64_t state, int site, int n_sites) {
    return ((state >> (n_sites - site)) & 1ULL) ? -1.0 : 1.0;
}

} // namespace

void QbmParams::validate() const {
    if (n_visible < 1) throw ConfigError("n_visible must be positive");
    if (n_hidden < 1) throw ConfigError("n_hidden must be positive");
    if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
    if (beta <= 0.0) throw ConfigError("beta must be positive");
}

Eigen::VectorXd QbmModel::fields(const std::vector<std::uint8_t>& v) const {
    if (static_cast<int>(v.size()) != n_visible())
        throw std::invalid_argument("fields: visible vector has wrong length");
    Eigen::VectorXd a = c;
    for (int i = 0; i < n_visible(); ++i)
        if (v[static_cast<std::size_t>(i)]) a += W.row(i);
    return a;
}

Eigen::VectorXd QbmModel::fields_from_pattern(std::uint32_t pattern) const {
    Eigen::VectorXd a = c;
    for (int i = 0; i < n_visible(); ++i)
        if ((pattern >> i) & 1u) a += W.row(i);
    return a;
}

int DensityMatrix::n_sites() const {
    const long d = dim();
    if (d < 2 || (d & (d - 1)) != 0)
        throw InvalidStateError("density matrix dimension is not a power of two");
    int n = 0;
    for (long x = d; x > 1; x >>= 1) ++n;
    return n;
}

bool is_valid_density(const Eigen::MatrixXcd& rho, double tol) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) return false;
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

void validate_density(const DensityMatrix& dm, double tol) {
    if (!is_valid_density(dm.rho, tol))
        throw InvalidStateError("matrix is not a valid density matrix");
}

std::vector<std::uint8_t> binarize(const std::vector<double>& features) {
    std::vector<std::uint8_t> bits(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double f = features[i];
        if (!(f >= 0.0 && f <= 1.0))
            throw std::invalid_argument("binarize: feature entries must lie in [0,1]");
        bits[i] = f >= 0.5 ? 1 : 0;
    }
    return bits;
}

std::uint32_t pack_bits(const std::vector<std::uint8_t>& bits) {
    std::uint32_t p = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) p |= 1u << i;
    return p;
}

std::vector<std::uint8_t> unpack_bits(std::uint32_t pattern, int n) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) bits[static_cast<std::size_t>(i)] = (pattern >> i) & 1u;
    return bits;
}

std::uint32_t binarize_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    std::uint32_t p = 0;
    for (long i = 0; i < row.size(); ++i)
        if (row(i) >= 0.5) p |= 1u << i;
    return p;
}

QbmModel train(const std::vector<trajgen::Trajectory>& dataset, const QbmParams& params,
               const TrainConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("train: dataset must be non-empty");
    std::vector<std::vector<std::uint8_t>> rows;
    for (const auto& traj : dataset) {
        for (int t = 0; t < traj.timesteps(); ++t) {
            std::vector<double> f(static_cast<std::size_t>(trajgen::kFeatureCount));
            for (int c = 0; c < trajgen::kFeatureCount; ++c) f[static_cast<std::size_t>(c)] = traj.features(t, c);
            rows.push_back(binarize(f));
        }
    }
    return train_on_bits(rows, params, cfg);
}

QbmModel train_on_bits(const std::vector<std::vector<std::uint8_t>>& rows, const QbmParams& params,
                       const TrainConfig& cfg) {
    params.validate();
    if (rows.empty()) throw std::invalid_argument("train: no visible vectors to train on");
    if (cfg.learning_rate <= 0.0 || cfg.epochs < 1 || cfg.batch_size < 1 || cfg.cd_steps < 1)
        throw ConfigError("train: hyperparameters must be positive");

    const int nv = params.n_visible;
    const int nh = params.n_hidden;
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != nv)
            throw std::invalid_argument("train: visible vector length mismatch");

    Rng rng(cfg.seed);
    QbmModel model;
    model.gamma = params.gamma;
    model.beta = params.beta;
    model.W.resize(nv, nh);
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nh; ++j) model.W(i, j) = 0.01 * rng.normal();
    // Visible biases start at the data log-odds so the marginal on-rates are
    // absorbed by b and the couplings are left to encode correlations.
    model.b.resize(nv);
    for (int i = 0; i < nv; ++i) {
        double p = 0.0;
        for (const auto& r : rows) p += r[static_cast<std::size_t>(i)];
        p = std::clamp(p / static_cast<double>(rows.size()), 0.01, 0.99);
        model.b(i) = std::log(p / (1.0 - p)) / (2.0 * params.beta);
    }
    model.c = Eigen::VectorXd::Zero(nh);

    const double beta = params.beta;
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);

    Eigen::VectorXd v(nv), v_neg(nv), h_spin(nh);
    double epoch_loss = 0.0;

    // An epoch shuffles the pool and consumes batches_per_epoch mini-batches
    // (all of them when batches_per_epoch is 0). One batch per epoch keeps the
    // couplings in the weak-field regime the published entropy scale implies;
    // full sweeps drive them several times larger.
    const std::size_t epoch_span =
        cfg.batches_per_epoch <= 0
            ? order.size()
            : std::min(order.size(),
                       static_cast<std::size_t>(cfg.batches_per_epoch) * static_cast<std::size_t>(cfg.batch_size));
    std::size_t samples_seen = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        epoch_loss = 0.0;
        samples_seen = 0;

        for (std::size_t start = 0; start < epoch_span; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(epoch_span, start + static_cast<std::size_t>(cfg.batch_size));
            const double inv_n = 1.0 / static_cast<double>(stop - start);
            Eigen::MatrixXd dW = Eigen::MatrixXd::Zero(nv, nh);
            Eigen::VectorXd db = Eigen::VectorXd::Zero(nv);
            Eigen::VectorXd dc = Eigen::VectorXd::Zero(nh);

            for (std::size_t s = start; s < stop; ++s) {
                const auto& bits = rows[order[s]];
                for (int i = 0; i < nv; ++i) v(i) = bits[static_cast<std::size_t>(i)];

                // Positive phase: expected hidden spins given the data.
                Eigen::VectorXd a = model.W.transpose() * v + model.c;
                Eigen::VectorXd m_pos = (beta * a.array()).tanh();

                // Gibbs chain: sample spins, reconstruct, resample.
                v_neg = v;
                Eigen::VectorXd recon_prob(nv);
                for (int step = 0; step < cfg.cd_steps; ++step) {
                    Eigen::VectorXd a_cur = model.W.transpose() * v_neg + model.c;
                    for (int j = 0; j < nh; ++j)
                        h_spin(j) = rng.uniform() < logistic(2.0 * beta * a_cur(j)) ? 1.0 : -1.0;
                    Eigen::VectorXd f = model.W * h_spin + model.b;
                    for (int i = 0; i < nv; ++i) {
                        recon_prob(i) = logistic(2.0 * beta * f(i));
                        v_neg(i) = rng.uniform() < recon_prob(i) ? 1.0 : 0.0;
                    }
                }
                Eigen::VectorXd m_neg = (beta * (model.W.transpose() * v_neg + model.c).array()).tanh();

                dW += v * m_pos.transpose() - v_neg * m_neg.transpose();
                db += v - v_neg;
                dc += m_pos - m_neg;
                epoch_loss += (v - recon_prob).squaredNorm() / static_cast<double>(nv);
                ++samples_seen;
            }

            model.W += cfg.learning_rate * inv_n * dW;
            model.b += cfg.learning_rate * inv_n * db;
            model.c += cfg.learning_rate * inv_n * dc;
        }

        epoch_loss /= static_cast<double>(samples_seen);
        if (!model.W.allFinite() || !model.b.allFinite() || !model.c.allFinite() || !std::isfinite(epoch_loss))
            throw TrainingDivergenceError("train: NaN/Inf in CD updates at epoch " + std::to_string(epoch));
    }

    model.train_meta = TrainMeta{cfg.seed, cfg.epochs, epoch_loss};
    return model;
}

std::string QbmModel::to_json(int indent) const {
    json j;
    j["n_visible"] = n_visible();
    j["n_hidden"] = n_hidden();
    std::vector<double> w_flat;
    w_flat.reserve(static_cast<std::size_t>(W.size()));
    for (int i = 0; i < W.rows(); ++i)
        for (int jj = 0; jj < W.cols(); ++jj) w_flat.push_back(W(i, jj));
    j["W"] = w_flat;
    j["b"] = std::vector<double>(b.data(), b.data() + b.size());
    j["c"] = std::vector<double>(c.data(), c.data() + c.size());
    j["gamma"] = gamma;
    j["beta"] = beta;
    j["train_meta"] = {{"seed", train_meta.seed}, {"epochs", train_meta.epochs}, {"final_loss", train_meta.final_loss}};
    return j.dump(indent);
}

QbmModel QbmModel::from_json(const std::string& text) {
    const json j = json::parse(text);
    QbmModel model;
    const int nv = j.at("n_visible").get<int>();
    const int nh = j.at("n_hidden").get<int>();
    const auto w_flat = j.at("W").get<std::vector<double>>();
    if (static_cast<int>(w_flat.size()) != nv * nh)
        throw ConfigError("model JSON: W has wrong size");
    model.W.resize(nv, nh);
    for (int i = 0; i < nv; ++i)
        for (int jj = 0; jj < nh; ++jj) model.W(i, jj) = w_flat[static_cast<std::size_t>(i * nh + jj)];
    const auto bv = j.at("b").get<std::vector<double>>();
    const auto cv = j.at("c").get<std::vector<double>>();
    if (static_cast<int>(bv.size()) != nv || static_cast<int>(cv.size()) != nh)
        throw ConfigError("model JSON: bias vectors have wrong size");
    model.b = Eigen::Map<const Eigen::VectorXd>(bv.data(), nv);
    model.c = Eigen::Map<const Eigen::VectorXd>(cv.data(), nh);
    model.gamma = j.at("gamma").get<double>();
    model.beta = j.at("beta").get<double>();
    const auto& tm = j.at("train_meta");
    model.train_meta = TrainMeta{tm.at("seed").get<std::uint64_t>(), tm.at("epochs").get<int>(),
                                 tm.at("final_loss").get<double>()};
    return model;
}

Eigen::MatrixXcd hamiltonian_from_fields(const Eigen::VectorXd& fields, double gamma) {
    const int nh = static_cast<int>(fields.size());
    if (nh > kExactHiddenLimit)
        throw CapacityError("hamiltonian: n_hidden > 10 requires the mean-field path");
    const long dim = 1L << nh;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (long s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (int j = 1; j <= nh; ++j) diag -= fields(j - 1) * z_sign(static_cast<std::uint64_t>(s), j, nh);
        H(s, s) = diag;
        for (int j = 1; j <= nh; ++j) {
            const long flipped = s ^ (1L << (nh - j));
            H(s, flipped) -= gamma;
        }
    }
    return H;
}

Eigen::MatrixXcd hamiltonian(const QbmModel& model, const std::vector<std::uint8_t>& v) {
    return hamiltonian_from_fields(model.fields(v), model.gamma);
}

DensityMatrix thermal_state(const Eigen::MatrixXcd& H, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("thermal_state: beta must be positive");
    if (H.rows() != H.cols() || H.rows() == 0)
        throw std::invalid_argument("thermal_state: H must be square");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("thermal_state: H is not Hermitian within tolerance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXd lambda = es.eigenvalues();
    // Shift the exponents by their maximum so exp never overflows.
    Eigen::VectorXd x = -beta * lambda.array();
    const double shift = x.maxCoeff();
    Eigen::VectorXd w = (x.array() - shift).exp();
    w /= w.sum();

    DensityMatrix dm;
    dm.rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
    return dm;
}

std::vector<Eigen::Vector2cd> mean_field_state(const QbmModel& model,
                                               const std::vector<std::uint8_t>& v) {
    const Eigen::VectorXd a = model.fields(v);
    std::vector<Eigen::Vector2cd> sites;
    sites.reserve(static_cast<std::size_t>(a.size()));
    for (long j = 0; j < a.size(); ++j) {
        Eigen::Vector2cd psi;
        if (model.gamma == 0.0) {
            psi = a(j) >= 0.0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
        } else {
            const double e = std::sqrt(a(j) * a(j) + model.gamma * model.gamma);
            psi = Eigen::Vector2cd(model.gamma, e - a(j));
            psi.normalize();
        }
        sites.push_back(psi);
    }
    return sites;
}

Eigen::VectorXd hidden_expectations(const QbmModel& model, const std::vector<std::uint8_t>& v) {
    const int nh = model.n_hidden();
    if (nh > kExactHiddenLimit)
        throw CapacityError("hidden_expectations: n_hidden > 10 requires the mean-field path");
    const DensityMatrix dm = thermal_state(hamiltonian(model, v), model.beta);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(nh);
    for (long s = 0; s < dm.dim(); ++s) {
        const double p = dm.rho(s, s).real();
        for (int j = 1; j <= nh; ++j)
            m(j - 1) += p * z_sign(static_cast<std::uint64_t>(s), j, nh);
    }
    return m;
}

} // namespace ucip::qbm

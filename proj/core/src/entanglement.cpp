#include "ucip/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucip/errors.hpp"
#include "ucip/stats.hpp"

namespace ucip::entanglement {

Bipartition Bipartition::half(int n_sites) {
    Bipartition p;
    for (int j = 1; j <= n_sites / 2; ++j) p.sites_a.push_back(j);
    for (int j = n_sites / 2 + 1; j <= n_sites; ++j) p.sites_b.push_back(j);
    return p;
}

void Bipartition::validate(int n_sites) const {
    if (sites_a.empty() || sites_b.empty())
        throw ConfigError("bipartition: both subsystems must be non-empty");
    std::vector<bool> seen(static_cast<std::size_t>(n_sites) + 1, false);
    auto mark = [&](const std::vector<int>& sites) {
        for (int s : sites) {
            if (s < 1 || s > n_sites) throw ConfigError("bipartition: site index out of range");
            if (seen[static_cast<std::size_t>(s)]) throw ConfigError("bipartition: site listed twice");
            seen[static_cast<std::size_t>(s)] = true;
        }
    };
    mark(sites_a);
    mark(sites_b);
    for (int s = 1; s <= n_sites; ++s)
        if (!seen[static_cast<std::size_t>(s)]) throw ConfigError("bipartition: site missing");
}

qbm::DensityMatrix partial_trace(const qbm::DensityMatrix& rho, const Bipartition& part) {
    const int n = rho.n_sites();
    part.validate(n);

    const int na = static_cast<int>(part.sites_a.size());
    const int nb = static_cast<int>(part.sites_b.size());
    const long dim_a = 1L << na;
    const long dim_b = 1L << nb;

    // Bit position of site j in the full index (site 1 = MSB); within each
    // subsystem the earlier listed site is the more significant bit.
    std::vector<int> shift_a(static_cast<std::size_t>(na)), shift_b(static_cast<std::size_t>(nb));
    for (int p = 0; p < na; ++p) shift_a[static_cast<std::size_t>(p)] = n - part.sites_a[static_cast<std::size_t>(p)];
    for (int q = 0; q < nb; ++q) shift_b[static_cast<std::size_t>(q)] = n - part.sites_b[static_cast<std::size_t>(q)];

    auto scatter = [](long sub, const std::vector<int>& shifts) {
        long full = 0;
        const int k = static_cast<int>(shifts.size());
        for (int p = 0; p < k; ++p)
            if ((sub >> (k - 1 - p)) & 1L) full |= 1L << shifts[static_cast<std::size_t>(p)];
        return full;
    };

    std::vector<long> full_a(static_cast<std::size_t>(dim_a)), full_b(static_cast<std::size_t>(dim_b));
    for (long a = 0; a < dim_a; ++a) full_a[static_cast<std::size_t>(a)] = scatter(a, shift_a);
    for (long b = 0; b < dim_b; ++b) full_b[static_cast<std::size_t>(b)] = scatter(b, shift_b);

    qbm::DensityMatrix out;
    out.rho = Eigen::MatrixXcd::Zero(dim_a, dim_a);
    for (long a = 0; a < dim_a; ++a)
        for (long a2 = 0; a2 < dim_a; ++a2) {
            std::complex<double> sum = 0.0;
            for (long b = 0; b < dim_b; ++b)
                sum += rho.rho(full_a[static_cast<std::size_t>(a)] | full_b[static_cast<std::size_t>(b)],
                               full_a[static_cast<std::size_t>(a2)] | full_b[static_cast<std::size_t>(b)]);
            out.rho(a, a2) = sum;
        }
    return out;
}

double von_neumann_entropy(const qbm::DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
        const double lambda = es.eigenvalues()(i);
        if (lambda < -1e-8)
            throw InvalidStateError("von_neumann_entropy: eigenvalue below -1e-8");
        if (lambda > 1e-12) s -= lambda * std::log(lambda);
    }
    return std::max(0.0, s);
}

double purity(const qbm::DensityMatrix& rho) {
    return (rho.rho * rho.rho).trace().real();
}

double entanglement_gap(const std::map<std::string, std::vector<double>>& per_class,
                        const std::string& class_a, const std::string& class_b) {
    const auto ia = per_class.find(class_a);
    const auto ib = per_class.find(class_b);
    if (ia == per_class.end() || ib == per_class.end() || ia->second.empty() || ib->second.empty())
        throw std::invalid_argument("entanglement_gap: both classes must be present and non-empty");
    return stats::mean(ia->second) - stats::mean(ib->second);
}

} // namespace ucip::entanglement

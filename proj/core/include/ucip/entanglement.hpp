#pragma once

#include <map>
#include <string>
#include <vector>

#include "ucip/qbm.hpp"

namespace ucip::entanglement {

// Partition of the hidden sites (1-based) into two non-empty covering halves.
// The default takes sites 1..floor(n/2) as subsystem A.
struct Bipartition {
    std::vector<int> sites_a;
    std::vector<int> sites_b;

    static Bipartition half(int n_sites);
    void validate(int n_sites) const; // throws ConfigError
};

// rho_A[i,i'] = sum_j rho[(i,j),(i',j)] under site-1-most-significant indexing.
qbm::DensityMatrix partial_trace(const qbm::DensityMatrix& rho, const Bipartition& part);

// -sum lambda ln lambda in nats; eigenvalues below 1e-12 contribute zero,
// eigenvalues below -1e-8 are an invalid state.
double von_neumann_entropy(const qbm::DensityMatrix& rho);

// Tr(rho^2), in [1/dim, 1].
double purity(const qbm::DensityMatrix& rho);

// Difference of class-mean entropies, conventionally type_a minus type_b.
double entanglement_gap(const std::map<std::string, std::vector<double>>& per_class,
                        const std::string& class_a = "type_a",
                        const std::string& class_b = "type_b");

} // namespace ucip::entanglement

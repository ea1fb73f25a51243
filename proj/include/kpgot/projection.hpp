#pragma once

// Maps source points into the target domain through a transport plan and
// flags target points that receive little mass.
//
// The manifold-regularized projection trained against a discriminator is not
// provided; only the in-sample barycentric map is.

#include "kpgot/core.hpp"

#include <vector>

namespace kpgot {

struct BarycentricImage {
    Matrix points;           // m x dim; rows without mass are NaN
    std::vector<bool> valid; // false where the source row carries no mass
};

/// B(x_i) = Σ_j plan_ij y_j / Σ_j plan_ij.
BarycentricImage barycentric_map(const Matrix &plan, const DiscreteDistribution &target);
BarycentricImage barycentric_map(const TransportPlan &plan, const DiscreteDistribution &target);

/// The ⌈η · #unlabeled⌉ unlabeled target indices with the smallest received
/// mass (column sums). Ties go to the lowest index; the result is sorted.
std::vector<Index> received_mass_outliers(const Matrix &plan, double eta,
                                          const std::vector<Index> &labeled);
std::vector<Index> received_mass_outliers(const TransportPlan &plan, double eta,
                                          const std::vector<Index> &labeled);

} // namespace kpgot

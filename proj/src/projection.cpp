#include "kpgot/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kpgot {

BarycentricImage barycentric_map(const Matrix &plan, const DiscreteDistribution &target) {
    require(plan.cols() == target.count(), ErrorCode::ShapeMismatch,
            "plan has " + std::to_string(plan.cols()) + " columns but the target has " +
                std::to_string(target.count()) + " points");
    const Vector mass = plan.rowwise().sum();
    BarycentricImage out;
    out.points = plan * target.points();
    out.valid.assign(static_cast<std::size_t>(plan.rows()), true);
    for (Index i = 0; i < plan.rows(); ++i) {
        if (mass(i) > 0.0) {
            out.points.row(i) /= mass(i);
        } else {
            out.points.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
            out.valid[static_cast<std::size_t>(i)] = false;
        }
    }
    return out;
}

BarycentricImage barycentric_map(const TransportPlan &plan, const DiscreteDistribution &target) {
    return barycentric_map(plan.values(), target);
}

std::vector<Index> received_mass_outliers(const Matrix &plan, double eta,
                                          const std::vector<Index> &labeled) {
    require(std::isfinite(eta) && eta >= 0.0 && eta < 1.0, ErrorCode::InvalidEta,
            "eta must lie in [0, 1)");
    const Index n = plan.cols();
    std::vector<bool> is_labeled(static_cast<std::size_t>(n), false);
    for (Index j : labeled) {
        require(j >= 0 && j < n, ErrorCode::IndexOutOfBounds,
                "labeled index " + std::to_string(j) + " out of range");
        is_labeled[static_cast<std::size_t>(j)] = true;
    }
    std::vector<Index> candidates;
    for (Index j = 0; j < n; ++j)
        if (!is_labeled[static_cast<std::size_t>(j)])
            candidates.push_back(j);

    const auto count = static_cast<std::size_t>(
        std::ceil(eta * static_cast<double>(candidates.size()) - 1e-9));
    const Vector received = plan.colwise().sum().transpose();
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](Index a, Index b) { return received(a) < received(b); });
    candidates.resize(std::min(count, candidates.size()));
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

std::vector<Index> received_mass_outliers(const TransportPlan &plan, double eta,
                                          const std::vector<Index> &labeled) {
    return received_mass_outliers(plan.values(), eta, labeled);
}

} // namespace kpgot

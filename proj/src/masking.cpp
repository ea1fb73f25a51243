#include "kpgot/masking.hpp"

#include <cmath>

namespace kpgot {

MaskMatrix build_mask(Index m, Index n, const KeypointPairing &kp) {
    require(m >= 1 && n >= 1, ErrorCode::ShapeMismatch, "mask needs m, n >= 1");
    kp.check_bounds(m, n);
    Matrix values = Matrix::Ones(m, n);
    for (const auto &[i, j] : kp.pairs()) {
        values.row(i).setZero();
        values.col(j).setZero();
    }
    for (const auto &[i, j] : kp.pairs())
        values(i, j) = 1.0;
    return MaskMatrix(std::move(values));
}

FeasibilityReport check_masked_feasibility(const DiscreteDistribution &p,
                                           const DiscreteDistribution &q,
                                           const MaskMatrix &mask, const KeypointPairing &kp) {
    require(mask.rows() == p.count() && mask.cols() == q.count(), ErrorCode::ShapeMismatch,
            "mask shape does not match distributions");
    kp.check_masses(p.weights(), q.weights());

    FeasibilityReport report;
    Vector free_rows = p.weights();
    Vector free_cols = q.weights();
    for (const auto &[i, j] : kp.pairs()) {
        report.max_keypoint_mass_gap =
            std::max(report.max_keypoint_mass_gap, std::abs(p.weight(i) - q.weight(j)));
        free_rows(i) = 0.0;
        free_cols(j) = 0.0;
    }
    report.free_source_mass = free_rows.sum();
    report.free_target_mass = free_cols.sum();
    if (std::abs(report.free_source_mass - report.free_target_mass) > kMassTolerance)
        fail(ErrorCode::InfeasibleMask,
             "non-keypoint source mass " + std::to_string(report.free_source_mass) +
                 " differs from non-keypoint target mass " +
                 std::to_string(report.free_target_mass));
    // A free row with positive mass needs some free column to receive it.
    for (Index i = 0; i < mask.rows(); ++i) {
        if (free_rows(i) <= 0.0)
            continue;
        bool any = false;
        for (Index j = 0; j < mask.cols() && !any; ++j)
            any = mask.admissible(i, j) && free_cols(j) > 0.0;
        require(any, ErrorCode::InfeasibleMask,
                "source row " + std::to_string(i) + " has no admissible target");
    }
    return report;
}

void pin_forced_cells(Matrix &plan, const Vector &p, const Vector &q, const MaskMatrix &mask) {
    const Index m = mask.rows();
    const Index n = mask.cols();
    // Columns first so that a keypoint cell ends up exactly p_i.
    for (Index j = 0; j < n; ++j) {
        Index only = -1;
        int hits = 0;
        for (Index i = 0; i < m && hits < 2; ++i)
            if (mask.admissible(i, j)) {
                only = i;
                ++hits;
            }
        if (hits == 1)
            plan(only, j) = q(j);
    }
    for (Index i = 0; i < m; ++i) {
        Index only = -1;
        int hits = 0;
        for (Index j = 0; j < n && hits < 2; ++j)
            if (mask.admissible(i, j)) {
                only = j;
                ++hits;
            }
        if (hits == 1)
            plan(i, only) = p(i);
    }
}

} // namespace kpgot

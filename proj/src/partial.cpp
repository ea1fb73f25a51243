#include "kpgot/partial.hpp"

#include "kpgot/masking.hpp"
#include "kpgot/relation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace kpgot {

namespace {

constexpr double kPartialTolerance = 1e-9;

void check_partial_block(const Matrix &block, const Vector &p, const Vector &q,
                         const KeypointPairing &kp, double s, double tol) {
    const Vector rows = block.rowwise().sum();
    const Vector cols = block.colwise().sum().transpose();
    auto violation = [](const std::string &what) {
        fail(ErrorCode::TheoremViolation, "partial plan " + what);
    };
    if (std::abs(block.sum() - s) > tol)
        violation("transports " + std::to_string(block.sum()) + " instead of " +
                  std::to_string(s));
    if ((rows - p).maxCoeff() > tol)
        violation("exceeds a source mass");
    if ((cols - q).maxCoeff() > tol)
        violation("exceeds a target mass");
    for (const auto &[i, j] : kp.pairs()) {
        if (std::abs(rows(i) - p(i)) > tol)
            violation("does not fully transport keypoint row " + std::to_string(i));
        if (std::abs(cols(j) - q(j)) > tol)
            violation("does not fully fill keypoint column " + std::to_string(j));
    }
}

} // namespace

AugmentedProblem augment(const Vector &p, const Vector &q, const CostMatrix &g,
                         const MaskMatrix &mask, const KeypointPairing &kp, double s,
                         const PartialParams &params) {
    const Index m = p.size();
    const Index n = q.size();
    require(g.rows() == m && g.cols() == n && mask.rows() == m && mask.cols() == n,
            ErrorCode::ShapeMismatch, "guiding matrix or mask does not match the marginals");
    require(params.a > 0.0 && std::isfinite(params.a), ErrorCode::NonPositiveA, "A must be > 0");
    require(std::isfinite(params.xi), ErrorCode::InvalidParameters, "xi must be finite");
    kp.check_masses(p, q);

    const double mass_p = p.sum();
    const double mass_q = q.sum();
    require(std::isfinite(s) && s >= 0.0 && s <= std::min(mass_p, mass_q) + kMassTolerance,
            ErrorCode::InvalidMassBudget,
            "mass budget " + std::to_string(s) + " outside [0, " +
                std::to_string(std::min(mass_p, mass_q)) + "]");
    double kp_p = 0.0;
    double kp_q = 0.0;
    for (const auto &[i, j] : kp.pairs()) {
        kp_p += p(i);
        kp_q += q(j);
    }
    if (!kp.empty())
        require(kp_p < s && kp_q < s, ErrorCode::KeypointMassExceedsBudget,
                "keypoint mass " + std::to_string(std::max(kp_p, kp_q)) +
                    " is not below the budget " + std::to_string(s));

    AugmentedProblem out;
    out.xi = params.xi;
    out.a = params.a;
    out.s = s;
    out.p_bar.resize(m + 1);
    out.p_bar << p, std::max(mass_q - s, 0.0);
    out.q_bar.resize(n + 1);
    out.q_bar << q, std::max(mass_p - s, 0.0);

    Matrix gb(m + 1, n + 1);
    gb.topLeftCorner(m, n) = g.values();
    gb.col(n).setConstant(params.xi);
    gb.row(m).setConstant(params.xi);
    gb(m, n) = 2.0 * params.xi + params.a;
    require(gb.minCoeff() >= 0.0, ErrorCode::InvalidParameters,
            "xi must keep the augmented costs non-negative");
    out.g_bar = CostMatrix(std::move(gb));

    Matrix mb = Matrix::Ones(m + 1, n + 1);
    mb.topLeftCorner(m, n) = mask.values();
    for (const auto &[i, j] : kp.pairs()) {
        mb(i, n) = 0.0;
        mb(m, j) = 0.0;
    }
    out.m_bar = MaskMatrix(std::move(mb));
    return out;
}

TransportPlan solve_partial(const Vector &p, const Vector &q, const CostMatrix &objective,
                            const KeypointPairing &kp, double s, const SolverConfig &cfg,
                            Backend backend, const PartialParams &params) {
    const Index m = p.size();
    const Index n = q.size();
    const MaskMatrix mask = build_mask(m, n, kp);
    const AugmentedProblem aug = augment(p, q, objective, mask, kp, s, params);

    if (backend == Backend::Sinkhorn && cfg.effective_epsilon(aug.g_bar.values()) > aug.a / 10.0)
        std::cerr << "warning: epsilon is large relative to A; dummy routing will be diffuse\n";

    const TransportPlan full = solve_masked(aug.p_bar, aug.q_bar, aug.g_bar, aug.m_bar, cfg, backend);
    Matrix block = full.values().topLeftCorner(m, n);

    const double tol = backend == Backend::LP
                           ? kPartialTolerance
                           : std::max(kPartialTolerance, 10.0 * full.max_marginal_error());
    if (backend == Backend::LP && full(m, n) != 0.0)
        fail(ErrorCode::TheoremViolation, "dummy corner carries mass");
    check_partial_block(block, p, q, kp, s, tol);

    TransportPlan::Meta meta;
    meta.objective = frobenius(block, objective.values());
    meta.tag = full.solver_tag();
    meta.iterations = full.iterations();
    meta.converged = full.converged();
    return TransportPlan::make(std::move(block), p, q, &mask, meta);
}

TransportPlan solve_partial_kpg_rl(const DiscreteDistribution &p, const DiscreteDistribution &q,
                                   const CostMatrix &source_intra, const CostMatrix &target_intra,
                                   const KeypointPairing &kp, double s, const SolverConfig &cfg,
                                   Backend backend, const PartialParams &params) {
    require(source_intra.rows() == p.count() && target_intra.rows() == q.count(),
            ErrorCode::ShapeMismatch, "intra-domain costs do not match the distributions");
    const GuidingMatrix g =
        guiding_from_intra(source_intra, target_intra, kp, cfg.rho(), cfg.divergence());
    return solve_partial(p.weights(), q.weights(), g, kp, s, cfg, backend, params);
}

TransportPlan solve_partial_ot(const DiscreteDistribution &p, const DiscreteDistribution &q,
                               const CostMatrix &cost, double s, const SolverConfig &cfg,
                               Backend backend, const PartialParams &params) {
    return solve_partial(p.weights(), q.weights(), cost, KeypointPairing{}, s, cfg, backend,
                         params);
}

} // namespace kpgot

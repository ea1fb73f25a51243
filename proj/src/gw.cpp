#include "kpgot/gw.hpp"

#include "kpgot/masking.hpp"
#include "kpgot/relation.hpp"
#include "kpgot/sinkhorn.hpp"

#include <algorithm>
#include <cmath>

namespace kpgot {

namespace {

void check_shapes(const Matrix &plan, const CostMatrix &cs, const CostMatrix &ct) {
    require(cs.rows() == cs.cols() && ct.rows() == ct.cols(), ErrorCode::ShapeMismatch,
            "intra-domain costs must be square");
    require(plan.rows() == cs.rows() && plan.cols() == ct.rows(), ErrorCode::ShapeMismatch,
            "plan shape does not match the intra-domain costs");
}

Matrix naive_gradient(const Matrix &plan, const Matrix &cs, const Matrix &ct) {
    const Index m = plan.rows();
    const Index n = plan.cols();
    Matrix grad = Matrix::Zero(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Index k = 0; k < m; ++k)
                for (Index l = 0; l < n; ++l) {
                    const double d = cs(i, k) - ct(j, l);
                    s += d * d * plan(k, l);
                }
            grad(i, j) = 2.0 * s;
        }
    return grad;
}

} // namespace

Matrix gw_gradient(const Matrix &plan, const CostMatrix &source_intra,
                   const CostMatrix &target_intra, GwEvaluation mode) {
    check_shapes(plan, source_intra, target_intra);
    const Matrix &cs = source_intra.values();
    const Matrix &ct = target_intra.values();
    if (mode == GwEvaluation::Naive)
        return naive_gradient(plan, cs, ct);

    const Vector r = plan.rowwise().sum();
    const Vector c = plan.colwise().sum().transpose();
    const Vector left = cs.cwiseProduct(cs) * r;
    const Vector right = ct.cwiseProduct(ct) * c;
    Matrix grad = -4.0 * (cs * plan * ct.transpose());
    grad.colwise() += 2.0 * left;
    grad.rowwise() += 2.0 * right.transpose();
    return grad;
}

double gw_loss(const Matrix &plan, const CostMatrix &source_intra, const CostMatrix &target_intra,
               GwEvaluation mode) {
    return 0.5 * frobenius(plan, gw_gradient(plan, source_intra, target_intra, mode));
}

Matrix masked_independent_plan(const Vector &p, const Vector &q, const KeypointPairing &kp) {
    Vector free_p = p;
    Vector free_q = q;
    for (const auto &[i, j] : kp.pairs()) {
        free_p(i) = 0.0;
        free_q(j) = 0.0;
    }
    const double free_mass = free_q.sum();
    Matrix plan = Matrix::Zero(p.size(), q.size());
    if (free_mass > 0.0)
        plan = free_p * free_q.transpose() / free_mass;
    for (const auto &[i, j] : kp.pairs())
        plan(i, j) = p(i);
    return plan;
}

GwSolution solve_kpg_rl_gw(const DiscreteDistribution &p, const DiscreteDistribution &q,
                           const CostMatrix &source_intra, const CostMatrix &target_intra,
                           const KeypointPairing &kp, double alpha, const SolverConfig &cfg,
                           Backend lmo_backend) {
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidConfig, "alpha must lie in (0,1]");
    require(source_intra.rows() == p.count() && source_intra.cols() == p.count() &&
                target_intra.rows() == q.count() && target_intra.cols() == q.count(),
            ErrorCode::ShapeMismatch, "intra-domain costs do not match the distributions");
    const Vector &a = p.weights();
    const Vector &b = q.weights();
    const MaskMatrix mask = build_mask(p.count(), q.count(), kp);
    check_masked_feasibility(p, q, mask, kp);

    Matrix guide = Matrix::Zero(p.count(), q.count());
    if (alpha < 1.0) {
        require(!kp.empty(), ErrorCode::EmptyKeypoints,
                "alpha < 1 needs keypoints for the guiding term");
        guide = guiding_from_intra(source_intra, target_intra, kp, cfg.rho(), cfg.divergence())
                    .values();
    }

    auto objective = [&](const Matrix &plan) {
        double v = alpha * gw_loss(plan, source_intra, target_intra);
        if (alpha < 1.0)
            v += (1.0 - alpha) * frobenius(plan, guide);
        return v;
    };

    auto linear_minimizer = [&](const Matrix &grad) -> Matrix {
        if (lmo_backend == Backend::LP)
            return transport_lp(a, b, grad, mask).plan;
        Matrix shifted = grad.array() - grad.minCoeff();
        return sinkhorn_auto(a, b, CostMatrix(shifted.cwiseProduct(mask.values())), mask, cfg)
            .values();
    };

    Matrix plan = masked_independent_plan(a, b, kp);
    GwSolution out{TransportPlan::make(plan, a, b, &mask, {}), {}};
    FrankWolfeTrace &trace = out.trace;
    double current = objective(plan);
    trace.objective_per_iteration.push_back(current);

    int it = 0;
    while (it < cfg.max_iterations()) {
        ++it;
        Matrix grad = alpha * gw_gradient(plan, source_intra, target_intra);
        if (alpha < 1.0)
            grad += (1.0 - alpha) * guide;
        grad = grad.cwiseProduct(mask.values());

        const Matrix vertex = linear_minimizer(grad);
        const Matrix direction = vertex - plan;
        const double slope = frobenius(grad, direction);
        const double scale = std::max(1.0, std::abs(current));
        if (slope >= -1e-15 * scale) {
            trace.converged = true;
            break;
        }
        // Segment objective: current + slope·t + curvature·t².
        const double curvature = alpha * gw_loss(direction, source_intra, target_intra);
        double t = 1.0;
        if (curvature > 0.0)
            t = std::clamp(-slope / (2.0 * curvature), 0.0, 1.0);

        Matrix next = (1.0 - t) * plan + t * vertex;
        const double value = objective(next);
        if (!(value <= current)) {
            trace.converged = true;
            break;
        }
        const double decrease = current - value;
        plan = std::move(next);
        current = value;
        trace.objective_per_iteration.push_back(current);
        trace.step_sizes.push_back(1.0 - t);
        if (decrease < cfg.tolerance() * scale) {
            trace.converged = true;
            break;
        }
    }

    plan = plan.cwiseMax(0.0).cwiseProduct(mask.values());
    pin_forced_cells(plan, a, b, mask);
    TransportPlan::Meta meta;
    meta.objective = objective(plan);
    meta.tag = SolverTag::FrankWolfe;
    meta.iterations = it;
    meta.converged = trace.converged;
    out.plan = TransportPlan::make(std::move(plan), a, b, &mask, meta);
    return out;
}

} // namespace kpgot

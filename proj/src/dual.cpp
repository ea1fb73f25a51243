#include "kpgot/dual.hpp"

#include "kpgot/masking.hpp"

#include <algorithm>
#include <cmath>

namespace kpgot {

namespace {

void check_shapes(const Vector &phi, const Vector &psi, const Vector &p, const Vector &q,
                  const Matrix &g, const MaskMatrix &mask, double epsilon) {
    require(phi.size() == p.size() && psi.size() == q.size() && g.rows() == p.size() &&
                g.cols() == q.size() && mask.rows() == p.size() && mask.cols() == q.size(),
            ErrorCode::ShapeMismatch, "dual inputs have inconsistent shapes");
    require(epsilon > 0.0 && std::isfinite(epsilon), ErrorCode::InvalidConfig,
            "epsilon must be > 0");
}

// Hinge values (φ_i + ψ_j − G_ij)₊ on admissible cells, zero elsewhere.
Matrix hinge(const Vector &phi, const Vector &psi, const Matrix &g, const MaskMatrix &mask) {
    Matrix h(g.rows(), g.cols());
    for (Index j = 0; j < g.cols(); ++j)
        for (Index i = 0; i < g.rows(); ++i)
            h(i, j) = mask.admissible(i, j) ? std::max(phi(i) + psi(j) - g(i, j), 0.0) : 0.0;
    return h;
}

struct Evaluation {
    double value;
    Vector grad;
    Matrix weights; // p_i q_j on active cells, the Hessian building block
};

Evaluation evaluate(const Vector &phi, const Vector &psi, const Vector &p, const Vector &q,
                    const Matrix &g, const MaskMatrix &mask, double epsilon) {
    const Index m = p.size();
    const Index n = q.size();
    const Matrix h = hinge(phi, psi, g, mask);
    const Matrix pq = p * q.transpose();
    const Matrix flow = h.cwiseProduct(pq) / (2.0 * epsilon);

    Evaluation e;
    e.value = phi.dot(p) + psi.dot(q) - h.cwiseProduct(h).cwiseProduct(pq).sum() / (4.0 * epsilon);
    e.grad.resize(m + n);
    e.grad.head(m) = p - flow.rowwise().sum();
    e.grad.tail(n) = q - flow.colwise().sum().transpose();
    e.weights = Matrix::Zero(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i)
            if (h(i, j) > 0.0)
                e.weights(i, j) = pq(i, j);
    return e;
}

} // namespace

double dual_objective(const Vector &phi, const Vector &psi, const Vector &p, const Vector &q,
                      const Matrix &g, const MaskMatrix &mask, double epsilon) {
    check_shapes(phi, psi, p, q, g, mask, epsilon);
    const Matrix h = hinge(phi, psi, g, mask);
    return phi.dot(p) + psi.dot(q) -
           h.cwiseProduct(h).cwiseProduct(p * q.transpose()).sum() / (4.0 * epsilon);
}

Vector dual_gradient(const Vector &phi, const Vector &psi, const Vector &p, const Vector &q,
                     const Matrix &g, const MaskMatrix &mask, double epsilon) {
    check_shapes(phi, psi, p, q, g, mask, epsilon);
    return evaluate(phi, psi, p, q, g, mask, epsilon).grad;
}

PotentialPair solve_dual(const Vector &p, const Vector &q, const CostMatrix &g,
                         const MaskMatrix &mask, double epsilon, const SolverConfig &cfg) {
    const Index m = p.size();
    const Index n = q.size();
    PotentialPair pot;
    pot.phi = Vector::Zero(m);
    pot.psi = Vector::Zero(n);
    check_shapes(pot.phi, pot.psi, p, q, g.values(), mask, epsilon);
    require(p.minCoeff() > 0.0 && q.minCoeff() > 0.0, ErrorCode::NonPositiveWeight,
            "dual solver needs strictly positive masses");

    const double curvature = p.maxCoeff() * q.maxCoeff() / (2.0 * epsilon);
    const double ridge = 1e-10 * curvature;
    constexpr double kArmijo = 1e-4;

    Evaluation cur = evaluate(pot.phi, pot.psi, p, q, g.values(), mask, epsilon);
    Vector x(m + n);
    x << pot.phi, pot.psi;
    int it = 0;
    while (it < cfg.max_iterations()) {
        if (cur.grad.lpNorm<Eigen::Infinity>() < cfg.tolerance()) {
            pot.converged = true;
            break;
        }
        ++it;
        // Negative Hessian of the dual on the current active set, plus a ridge
        // that fixes the (1, -1) null direction and inactive rows.
        Matrix h = Matrix::Zero(m + n, m + n);
        const Matrix &w = cur.weights;
        h.topLeftCorner(m, m).diagonal() = w.rowwise().sum();
        h.bottomRightCorner(n, n).diagonal() = w.colwise().sum().transpose();
        h.topRightCorner(m, n) = w;
        h.bottomLeftCorner(n, m) = w.transpose();
        h /= 2.0 * epsilon;
        h.diagonal().array() += ridge;
        Vector dir = h.ldlt().solve(cur.grad);
        double slope = cur.grad.dot(dir);
        if (!dir.allFinite() || !(slope > 0.0)) {
            dir = cur.grad / curvature;
            slope = cur.grad.dot(dir);
        }

        double t = 1.0;
        bool accepted = false;
        Evaluation next;
        Vector trial;
        for (int k = 0; k < 80; ++k, t *= 0.5) {
            trial = x + t * dir;
            next = evaluate(trial.head(m), trial.tail(n), p, q, g.values(), mask, epsilon);
            if (next.value >= cur.value + kArmijo * t * slope) {
                accepted = true;
                break;
            }
            // Near the optimum the value stops resolving; a step that still
            // shrinks the gradient is taken.
            if (next.value >= cur.value &&
                next.grad.lpNorm<Eigen::Infinity>() < cur.grad.lpNorm<Eigen::Infinity>()) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
        x = trial;
        cur = std::move(next);
    }
    pot.phi = x.head(m);
    pot.psi = x.tail(n);
    pot.dual_objective = cur.value;
    pot.gradient_norm = cur.grad.lpNorm<Eigen::Infinity>();
    pot.iterations = it;
    if (!pot.converged)
        pot.converged = pot.gradient_norm < cfg.tolerance();
    return pot;
}

TransportPlan recover_plan(const PotentialPair &pot, const Vector &p, const Vector &q,
                           const CostMatrix &g, const MaskMatrix &mask, double epsilon) {
    check_shapes(pot.phi, pot.psi, p, q, g.values(), mask, epsilon);
    Matrix plan =
        hinge(pot.phi, pot.psi, g.values(), mask).cwiseProduct(p * q.transpose()) / (2.0 * epsilon);
    pin_forced_cells(plan, p, q, mask);
    TransportPlan::Meta meta;
    meta.objective = primal_l2_objective(plan, p, q, g.values(), mask, epsilon);
    meta.tag = SolverTag::DualAscent;
    meta.iterations = pot.iterations;
    meta.converged = pot.converged;
    return TransportPlan::make(std::move(plan), p, q, &mask, meta);
}

double primal_l2_objective(const Matrix &plan, const Vector &p, const Vector &q,
                           const Matrix &g, const MaskMatrix &mask, double epsilon) {
    require(plan.rows() == p.size() && plan.cols() == q.size() && g.rows() == p.size() &&
                g.cols() == q.size() && mask.rows() == p.size() && mask.cols() == q.size(),
            ErrorCode::ShapeMismatch, "primal inputs have inconsistent shapes");
    const Matrix masked = plan.cwiseProduct(mask.values());
    double reg = 0.0;
    for (Index j = 0; j < plan.cols(); ++j)
        for (Index i = 0; i < plan.rows(); ++i)
            if (masked(i, j) != 0.0)
                reg += masked(i, j) * masked(i, j) / (p(i) * q(j));
    return frobenius(masked, g) + epsilon * reg;
}

} // namespace kpgot

#include "kpgot/sinkhorn.hpp"

#include "kpgot/masking.hpp"

#include <cmath>
#include <limits>

namespace kpgot {

namespace {

void check_inputs(const Vector &p, const Vector &q, const CostMatrix &objective,
                  const MaskMatrix &mask) {
    require(objective.rows() == p.size() && objective.cols() == q.size(),
            ErrorCode::ShapeMismatch, "objective shape does not match marginals");
    require(mask.rows() == p.size() && mask.cols() == q.size(), ErrorCode::ShapeMismatch,
            "mask shape does not match marginals");
    require(p.allFinite() && q.allFinite() && p.minCoeff() >= 0.0 && q.minCoeff() >= 0.0,
            ErrorCode::NonPositiveWeight, "marginals must be finite and non-negative");
    require(std::abs(p.sum() - q.sum()) <= kMassTolerance, ErrorCode::Infeasible,
            "total masses differ");
    for (Index i = 0; i < mask.rows(); ++i)
        require(p(i) == 0.0 || mask.values().row(i).sum() > 0.0, ErrorCode::Infeasible,
                "row " + std::to_string(i) + " has no admissible cell");
    for (Index j = 0; j < mask.cols(); ++j)
        require(q(j) == 0.0 || mask.values().col(j).sum() > 0.0, ErrorCode::Infeasible,
                "column " + std::to_string(j) + " has no admissible cell");
}

TransportPlan finish(Matrix plan, const Vector &p, const Vector &q, const CostMatrix &objective,
                     const MaskMatrix &mask, SolverTag tag, int iterations, bool converged) {
    pin_forced_cells(plan, p, q, mask);
    TransportPlan::Meta meta;
    meta.objective = frobenius(plan, objective.values());
    meta.tag = tag;
    meta.iterations = iterations;
    meta.converged = converged;
    return TransportPlan::make(std::move(plan), p, q, &mask, meta);
}

} // namespace

TransportPlan sinkhorn_masked(const Vector &a, const Vector &b, const CostMatrix &objective,
                              const MaskMatrix &mask, const SolverConfig &cfg,
                              std::vector<double> *error_trace) {
    check_inputs(a, b, objective, mask);
    const double eps = cfg.effective_epsilon(objective.values());

    const Matrix kernel =
        mask.values().cwiseProduct((-objective.values() / eps).array().exp().matrix());
    // A flushed admissible entry would silently shrink the support.
    for (Index j = 0; j < kernel.cols(); ++j)
        for (Index i = 0; i < kernel.rows(); ++i)
            if (mask.admissible(i, j) && kernel(i, j) < std::numeric_limits<double>::min())
                fail(ErrorCode::NumericalUnderflow,
                     "kernel entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") underflows; use the log-domain solver");

    Vector u = Vector::Ones(a.size());
    Vector v = Vector::Ones(b.size());
    Vector kv(a.size());
    Vector ktu(b.size());
    bool converged = false;
    int it = 0;
    while (it < cfg.max_iterations()) {
        ++it;
        kv.noalias() = kernel * v;
        for (Index i = 0; i < a.size(); ++i) {
            if (a(i) == 0.0) {
                u(i) = 0.0;
                continue;
            }
            if (kv(i) <= 0.0)
                fail(ErrorCode::NumericalUnderflow, "K v vanished; use the log-domain solver");
            u(i) = a(i) / kv(i);
        }
        ktu.noalias() = kernel.transpose() * u;
        for (Index j = 0; j < b.size(); ++j) {
            if (b(j) == 0.0) {
                v(j) = 0.0;
                continue;
            }
            if (ktu(j) <= 0.0)
                fail(ErrorCode::NumericalUnderflow, "K^T u vanished; use the log-domain solver");
            v(j) = b(j) / ktu(j);
        }
        if (!u.allFinite() || !v.allFinite())
            fail(ErrorCode::NumericalUnderflow, "scalings overflowed; use the log-domain solver");

        kv.noalias() = kernel * v;
        const double err = (u.cwiseProduct(kv) - a).cwiseAbs().maxCoeff();
        if (error_trace != nullptr)
            error_trace->push_back(err);
        if (err < cfg.tolerance()) {
            converged = true;
            break;
        }
    }
    Matrix plan = u.asDiagonal() * kernel * v.asDiagonal();
    return finish(std::move(plan), a, b, objective, mask, SolverTag::Sinkhorn, it, converged);
}

TransportPlan sinkhorn_masked(const DiscreteDistribution &p, const DiscreteDistribution &q,
                              const CostMatrix &objective, const MaskMatrix &mask,
                              const SolverConfig &cfg, std::vector<double> *error_trace) {
    return sinkhorn_masked(p.weights(), q.weights(), objective, mask, cfg, error_trace);
}

TransportPlan sinkhorn_masked_log(const Vector &a, const Vector &b, const CostMatrix &objective,
                                  const MaskMatrix &mask, const SolverConfig &cfg,
                                  std::vector<double> *error_trace) {
    check_inputs(a, b, objective, mask);
    const double eps = cfg.effective_epsilon(objective.values());
    const Index m = a.size();
    const Index n = b.size();
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    Matrix log_kernel(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i)
            log_kernel(i, j) = mask.admissible(i, j) ? -objective(i, j) / eps : kNegInf;
    const Vector log_a = a.array().log();
    const Vector log_b = b.array().log();

    // f and g are kept divided by ε.
    Vector f = Vector::Zero(m);
    Vector g = Vector::Zero(n);
    Vector row_mass(m);

    auto update_f = [&] {
        for (Index i = 0; i < m; ++i) {
            if (a(i) == 0.0) {
                f(i) = kNegInf;
                continue;
            }
            double top = kNegInf;
            for (Index j = 0; j < n; ++j)
                top = std::max(top, log_kernel(i, j) + g(j));
            if (top == kNegInf)
                fail(ErrorCode::Infeasible, "row " + std::to_string(i) + " cannot receive mass");
            double s = 0.0;
            for (Index j = 0; j < n; ++j)
                s += std::exp(log_kernel(i, j) + g(j) - top);
            f(i) = log_a(i) - (top + std::log(s));
        }
    };
    auto update_g = [&] {
        for (Index j = 0; j < n; ++j) {
            if (b(j) == 0.0) {
                g(j) = kNegInf;
                continue;
            }
            double top = kNegInf;
            for (Index i = 0; i < m; ++i)
                top = std::max(top, log_kernel(i, j) + f(i));
            if (top == kNegInf)
                fail(ErrorCode::Infeasible, "column " + std::to_string(j) + " cannot receive mass");
            double s = 0.0;
            for (Index i = 0; i < m; ++i)
                s += std::exp(log_kernel(i, j) + f(i) - top);
            g(j) = log_b(j) - (top + std::log(s));
        }
    };
    auto plan_entries = [&] {
        Matrix plan(m, n);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < m; ++i)
                plan(i, j) = std::exp(log_kernel(i, j) + f(i) + g(j));
        return plan;
    };

    bool converged = false;
    int it = 0;
    while (it < cfg.max_iterations()) {
        ++it;
        update_f();
        update_g();
        row_mass = plan_entries().rowwise().sum();
        const double err = (row_mass - a).cwiseAbs().maxCoeff();
        if (error_trace != nullptr)
            error_trace->push_back(err);
        if (err < cfg.tolerance()) {
            converged = true;
            break;
        }
    }
    return finish(plan_entries(), a, b, objective, mask, SolverTag::SinkhornLog, it, converged);
}

TransportPlan sinkhorn_masked_log(const DiscreteDistribution &p, const DiscreteDistribution &q,
                                  const CostMatrix &objective, const MaskMatrix &mask,
                                  const SolverConfig &cfg, std::vector<double> *error_trace) {
    return sinkhorn_masked_log(p.weights(), q.weights(), objective, mask, cfg, error_trace);
}

TransportPlan sinkhorn_auto(const Vector &p, const Vector &q, const CostMatrix &objective,
                            const MaskMatrix &mask, const SolverConfig &cfg) {
    try {
        return sinkhorn_masked(p, q, objective, mask, cfg);
    } catch (const Error &e) {
        if (e.code() != ErrorCode::NumericalUnderflow)
            throw;
    }
    return sinkhorn_masked_log(p, q, objective, mask, cfg);
}

} // namespace kpgot

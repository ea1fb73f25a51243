#include "kpgot/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace kpgot {

const char *to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::NegativeCost: return "NegativeCost";
    case ErrorCode::AsymmetricCost: return "AsymmetricCost";
    case ErrorCode::MassMismatchAtKeypoint: return "MassMismatchAtKeypoint";
    case ErrorCode::InfeasibleMask: return "InfeasibleMask";
    case ErrorCode::EmptyKeypoints: return "EmptyKeypoints";
    case ErrorCode::IncompatibleMode: return "IncompatibleMode";
    case ErrorCode::NonSimplexRow: return "NonSimplexRow";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::KeypointMassExceedsBudget: return "KeypointMassExceedsBudget";
    case ErrorCode::InvalidMassBudget: return "InvalidMassBudget";
    case ErrorCode::NonPositiveA: return "NonPositiveA";
    case ErrorCode::TheoremViolation: return "TheoremViolation";
    case ErrorCode::InvalidEta: return "InvalidEta";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

DiscreteDistribution make_distribution(Matrix points, Vector weights, MassMode mode) {
    require(points.rows() >= 1 && points.cols() >= 1, ErrorCode::ShapeMismatch,
            "distribution needs at least one point of dimension >= 1");
    require(points.rows() == weights.size(), ErrorCode::ShapeMismatch,
            "points has " + std::to_string(points.rows()) + " rows but weights has " +
                std::to_string(weights.size()) + " entries");
    require(points.allFinite() && weights.allFinite(), ErrorCode::NonFiniteInput,
            "points and weights must be finite");
    for (Index i = 0; i < weights.size(); ++i) {
        if (!(weights(i) > 0.0))
            fail(ErrorCode::NonPositiveWeight,
                 "weight " + std::to_string(i) + " is " + std::to_string(weights(i)));
    }
    double total = weights.sum();
    if (mode == MassMode::Normalize) {
        weights /= total;
        total = weights.sum();
    }
    return DiscreteDistribution(std::move(points), std::move(weights), total);
}

DiscreteDistribution make_uniform_distribution(Matrix points) {
    Vector w = Vector::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
    return make_distribution(std::move(points), std::move(w), MassMode::Raw);
}

DiscreteDistribution DiscreteDistribution::from_weights(const Vector &weights, MassMode mode) {
    return make_distribution(Matrix::Zero(weights.size(), 1), weights, mode);
}

KeypointPairing::KeypointPairing(std::vector<IndexPair> pairs) : pairs_(std::move(pairs)) {
    std::unordered_set<Index> seen_s;
    std::unordered_set<Index> seen_t;
    for (const auto &[i, j] : pairs_) {
        require(i >= 0 && j >= 0, ErrorCode::IndexOutOfBounds, "negative keypoint index");
        require(seen_s.insert(i).second, ErrorCode::DuplicateIndex,
                "source index " + std::to_string(i) + " appears in more than one pair");
        require(seen_t.insert(j).second, ErrorCode::DuplicateIndex,
                "target index " + std::to_string(j) + " appears in more than one pair");
    }
}

KeypointPairing KeypointPairing::make(std::vector<IndexPair> pairs, const DiscreteDistribution &p,
                                      const DiscreteDistribution &q) {
    KeypointPairing kp(std::move(pairs));
    kp.check_bounds(p.count(), q.count());
    kp.check_masses(p.weights(), q.weights());
    return kp;
}

std::vector<Index> KeypointPairing::sources() const {
    std::vector<Index> out;
    out.reserve(pairs_.size());
    for (const auto &pr : pairs_)
        out.push_back(pr.first);
    return out;
}

std::vector<Index> KeypointPairing::targets() const {
    std::vector<Index> out;
    out.reserve(pairs_.size());
    for (const auto &pr : pairs_)
        out.push_back(pr.second);
    return out;
}

void KeypointPairing::check_bounds(Index m, Index n) const {
    for (const auto &[i, j] : pairs_) {
        if (i >= m || j >= n)
            fail(ErrorCode::IndexOutOfBounds, "keypoint pair (" + std::to_string(i) + "," +
                                                  std::to_string(j) + ") outside " +
                                                  std::to_string(m) + "x" + std::to_string(n));
    }
}

void KeypointPairing::check_masses(const Vector &p, const Vector &q) const {
    check_bounds(p.size(), q.size());
    for (const auto &[i, j] : pairs_) {
        if (std::abs(p(i) - q(j)) > kMassTolerance) {
            std::ostringstream os;
            os.precision(17);
            os << "pair (" << i << "," << j << ") has p_i = " << p(i) << " but q_j = " << q(j);
            fail(ErrorCode::MassMismatchAtKeypoint, os.str());
        }
    }
}

KeypointPairing KeypointPairing::prefix(std::size_t count) const {
    count = std::min(count, pairs_.size());
    return KeypointPairing(std::vector<IndexPair>(pairs_.begin(), pairs_.begin() + count));
}

CostMatrix::CostMatrix(Matrix values) : values_(std::move(values)) {
    require(values_.allFinite(), ErrorCode::NonFiniteInput, "cost matrix has non-finite entries");
    require(values_.size() == 0 || values_.minCoeff() >= 0.0, ErrorCode::NegativeCost,
            "cost matrix has negative entries");
}

CostMatrix CostMatrix::intra(Matrix values) {
    require(values.rows() == values.cols(), ErrorCode::ShapeMismatch,
            "intra-domain cost must be square");
    CostMatrix c(std::move(values));
    const double tol = 1e-12 * std::max(1.0, c.max());
    for (Index i = 0; i < c.rows(); ++i) {
        require(c(i, i) <= tol, ErrorCode::AsymmetricCost,
                "intra-domain cost has nonzero diagonal at " + std::to_string(i));
        for (Index k = i + 1; k < c.cols(); ++k)
            require(std::abs(c(i, k) - c(k, i)) <= tol, ErrorCode::AsymmetricCost,
                    "intra-domain cost is not symmetric at (" + std::to_string(i) + "," +
                        std::to_string(k) + ")");
    }
    return c;
}

CostMatrix pairwise_cost(const DiscreteDistribution &a, const DiscreteDistribution &b,
                         Metric metric) {
    require(a.dim() == b.dim(), ErrorCode::DimensionMismatch,
            "point dimensions differ: " + std::to_string(a.dim()) + " vs " +
                std::to_string(b.dim()));
    const Matrix &x = a.points();
    const Matrix &y = b.points();
    Matrix c(x.rows(), y.rows());
    for (Index j = 0; j < y.rows(); ++j) {
        for (Index i = 0; i < x.rows(); ++i) {
            double s = 0.0;
            for (Index d = 0; d < x.cols(); ++d) {
                const double diff = x(i, d) - y(j, d);
                s += diff * diff;
            }
            c(i, j) = metric == Metric::SqEuclidean ? s : std::sqrt(s);
        }
    }
    return CostMatrix(std::move(c));
}

CostMatrix intra_cost(const DiscreteDistribution &a, Metric metric) {
    return CostMatrix::intra(pairwise_cost(a, a, metric).values());
}

MaskMatrix MaskMatrix::ones(Index m, Index n) { return MaskMatrix(Matrix::Ones(m, n)); }

MaskMatrix::MaskMatrix(Matrix values) : values_(std::move(values)) {
    for (Index k = 0; k < values_.size(); ++k) {
        const double v = values_.data()[k];
        require(v == 0.0 || v == 1.0, ErrorCode::InvalidParameters, "mask entries must be 0 or 1");
    }
}

std::string to_string(SolverTag tag) {
    switch (tag) {
    case SolverTag::NetworkSimplex: return "network_simplex";
    case SolverTag::Sinkhorn: return "sinkhorn";
    case SolverTag::SinkhornLog: return "sinkhorn_log";
    case SolverTag::FrankWolfe: return "frank_wolfe";
    case SolverTag::DualAscent: return "dual_ascent";
    }
    return "unknown";
}

double row_marginal_error(const Matrix &plan, const Vector &p) {
    return (plan.rowwise().sum() - p).cwiseAbs().maxCoeff();
}

double col_marginal_error(const Matrix &plan, const Vector &q) {
    return (plan.colwise().sum().transpose() - q).cwiseAbs().maxCoeff();
}

double frobenius(const Matrix &a, const Matrix &b) { return a.cwiseProduct(b).sum(); }

TransportPlan TransportPlan::make(Matrix values, const Vector &p, const Vector &q,
                                  const MaskMatrix *mask, Meta meta) {
    require(values.rows() == p.size() && values.cols() == q.size(), ErrorCode::ShapeMismatch,
            "plan shape does not match marginals");
    require(values.allFinite(), ErrorCode::NonFiniteInput, "plan has non-finite entries");
    require(values.minCoeff() >= 0.0, ErrorCode::TheoremViolation, "plan has negative entries");
    if (mask != nullptr) {
        require(mask->rows() == values.rows() && mask->cols() == values.cols(),
                ErrorCode::ShapeMismatch, "mask shape does not match plan");
        for (Index j = 0; j < values.cols(); ++j)
            for (Index i = 0; i < values.rows(); ++i)
                if (!mask->admissible(i, j) && values(i, j) != 0.0)
                    fail(ErrorCode::TheoremViolation, "plan is nonzero on a masked-out cell");
    }
    const double re = kpgot::row_marginal_error(values, p);
    const double ce = kpgot::col_marginal_error(values, q);
    return TransportPlan(std::move(values), re, ce, meta);
}

std::string to_string(Divergence d) {
    switch (d) {
    case Divergence::JS: return "js";
    case Divergence::KL_ST: return "kl-st";
    case Divergence::KL_TS: return "kl-ts";
    case Divergence::L1: return "l1";
    case Divergence::L2: return "l2";
    case Divergence::RAW_DIST: return "raw";
    }
    return "unknown";
}

Divergence divergence_from_string(const std::string &name) {
    if (name == "js") return Divergence::JS;
    if (name == "kl-st") return Divergence::KL_ST;
    if (name == "kl-ts") return Divergence::KL_TS;
    if (name == "l1") return Divergence::L1;
    if (name == "l2") return Divergence::L2;
    if (name == "raw") return Divergence::RAW_DIST;
    fail(ErrorCode::InvalidConfig, "unknown divergence '" + name + "'");
}

SolverConfig &SolverConfig::set_epsilon(double v) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidConfig, "epsilon must be > 0");
    epsilon_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_relative_epsilon(bool v) {
    relative_epsilon_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_rho(double v) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidConfig, "rho must be > 0");
    rho_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_alpha(double v) {
    require(v > 0.0 && v < 1.0, ErrorCode::InvalidConfig, "alpha must lie in (0,1)");
    alpha_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_max_iterations(int v) {
    require(v >= 1, ErrorCode::InvalidConfig, "max_iterations must be >= 1");
    max_iterations_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_tolerance(double v) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidConfig, "tolerance must be > 0");
    tolerance_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_divergence(Divergence v) {
    divergence_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_seed(std::uint64_t v) {
    seed_ = v;
    return *this;
}

SolverConfig &SolverConfig::set_intra_metric(Metric v) {
    intra_metric_ = v;
    return *this;
}

double SolverConfig::effective_epsilon(const Matrix &objective) const {
    if (!relative_epsilon_)
        return epsilon_;
    const double mx = objective.size() == 0 ? 0.0 : objective.cwiseAbs().maxCoeff();
    require(mx > 0.0, ErrorCode::InvalidConfig,
            "relative epsilon needs an objective with a nonzero entry");
    return epsilon_ * mx;
}

} // namespace kpgot

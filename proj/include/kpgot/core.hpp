#pragma once

// Domain types shared by every solver: distributions, keypoint pairings,
// cost/mask matrices, transport plans and solver configuration.
//
// Indexing is 0-based everywhere. A pairing written 1-based as
// {(3,2),(6,5)} is {(2,1),(5,4)} here.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpgot/errors.hpp"

namespace kpgot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kMassTolerance = 1e-12;

enum class MassMode { Normalize, Raw };

/// Support points (count x dim) with strictly positive masses.
class DiscreteDistribution {
public:
    const Matrix &points() const { return points_; }
    const Vector &weights() const { return weights_; }
    double weight(Index i) const { return weights_(i); }
    Index count() const { return weights_.size(); }
    Index dim() const { return points_.cols(); }
    double total_mass() const { return total_mass_; }

    /// Mass-only distribution; support points are a single zero coordinate.
    /// Convenient for solvers that only consume the marginals.
    static DiscreteDistribution from_weights(const Vector &weights,
                                             MassMode mode = MassMode::Normalize);

private:
    friend DiscreteDistribution make_distribution(Matrix, Vector, MassMode);
    DiscreteDistribution(Matrix points, Vector weights, double total)
        : points_(std::move(points)), weights_(std::move(weights)), total_mass_(total) {}

    Matrix points_;
    Vector weights_;
    double total_mass_ = 0.0;
};

/// Validates and (unless `mode` is Raw) normalizes the weights to unit mass.
DiscreteDistribution make_distribution(Matrix points, Vector weights,
                                       MassMode mode = MassMode::Normalize);

/// Uniform weights 1/count.
DiscreteDistribution make_uniform_distribution(Matrix points);

using IndexPair = std::pair<Index, Index>;

/// Annotated (source, target) index pairs whose matching must be preserved.
class KeypointPairing {
public:
    KeypointPairing() = default;

    /// Checks distinctness of source and target indices only.
    explicit KeypointPairing(std::vector<IndexPair> pairs);

    /// Full validation: distinctness, bounds, and p_i == q_j on every pair.
    static KeypointPairing make(std::vector<IndexPair> pairs, const DiscreteDistribution &p,
                                const DiscreteDistribution &q);

    const std::vector<IndexPair> &pairs() const { return pairs_; }
    std::vector<Index> sources() const;
    std::vector<Index> targets() const;
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    /// Throws IndexOutOfBounds if any index falls outside [0,m) x [0,n).
    void check_bounds(Index m, Index n) const;

    /// Throws MassMismatchAtKeypoint naming the first pair with p_i != q_j.
    void check_masses(const Vector &p, const Vector &q) const;

    /// The first `count` pairs, preserving order.
    KeypointPairing prefix(std::size_t count) const;

private:
    std::vector<IndexPair> pairs_;
};

/// Non-negative finite matrix. Intra-domain matrices are additionally
/// square, symmetric and zero on the diagonal.
class CostMatrix {
public:
    CostMatrix() = default;
    explicit CostMatrix(Matrix values);

    static CostMatrix intra(Matrix values);

    const Matrix &values() const { return values_; }
    double operator()(Index i, Index j) const { return values_(i, j); }
    Index rows() const { return values_.rows(); }
    Index cols() const { return values_.cols(); }
    double max() const { return values_.size() == 0 ? 0.0 : values_.maxCoeff(); }

private:
    Matrix values_;
};

using GuidingMatrix = CostMatrix;

enum class Metric { SqEuclidean, Euclidean };

/// count_a x count_b matrix of pairwise metric values.
CostMatrix pairwise_cost(const DiscreteDistribution &a, const DiscreteDistribution &b,
                         Metric metric = Metric::SqEuclidean);

/// Symmetric pairwise cost of a point set with itself.
CostMatrix intra_cost(const DiscreteDistribution &a, Metric metric = Metric::SqEuclidean);

/// Binary admissibility pattern; stored as 0.0/1.0 for Hadamard products.
class MaskMatrix {
public:
    MaskMatrix() = default;
    static MaskMatrix ones(Index m, Index n);
    explicit MaskMatrix(Matrix values);

    const Matrix &values() const { return values_; }
    bool admissible(Index i, Index j) const { return values_(i, j) != 0.0; }
    Index rows() const { return values_.rows(); }
    Index cols() const { return values_.cols(); }

private:
    Matrix values_;
};

enum class SolverTag {
    NetworkSimplex,
    Sinkhorn,
    SinkhornLog,
    FrankWolfe,
    DualAscent,
};

std::string to_string(SolverTag tag);

/// The physical (already masked) plan M⊙π with recomputed certificates.
class TransportPlan {
public:
    const Matrix &values() const { return values_; }
    double operator()(Index i, Index j) const { return values_(i, j); }
    Index rows() const { return values_.rows(); }
    Index cols() const { return values_.cols(); }

    double row_marginal_error() const { return row_error_; }
    double col_marginal_error() const { return col_error_; }
    double max_marginal_error() const { return std::max(row_error_, col_error_); }
    double objective() const { return objective_; }
    SolverTag solver_tag() const { return tag_; }
    int iterations() const { return iterations_; }
    bool converged() const { return converged_; }
    double total_mass() const { return values_.sum(); }

    struct Meta {
        double objective = 0.0;
        SolverTag tag = SolverTag::NetworkSimplex;
        int iterations = 0;
        bool converged = true;
    };

    /// Builds a plan, rejecting negative entries and entries on masked-out
    /// cells. Marginal errors are computed here from `values`.
    static TransportPlan make(Matrix values, const Vector &p, const Vector &q,
                              const MaskMatrix *mask, Meta meta);

private:
    TransportPlan(Matrix values, double row_error, double col_error, Meta meta)
        : values_(std::move(values)), row_error_(row_error), col_error_(col_error),
          objective_(meta.objective), tag_(meta.tag), iterations_(meta.iterations),
          converged_(meta.converged) {}

    Matrix values_;
    double row_error_ = 0.0;
    double col_error_ = 0.0;
    double objective_ = 0.0;
    SolverTag tag_ = SolverTag::NetworkSimplex;
    int iterations_ = 0;
    bool converged_ = true;
};

double row_marginal_error(const Matrix &plan, const Vector &p);
double col_marginal_error(const Matrix &plan, const Vector &q);

/// Frobenius inner product <a, b>.
double frobenius(const Matrix &a, const Matrix &b);

enum class Divergence { JS, KL_ST, KL_TS, L1, L2, RAW_DIST };

std::string to_string(Divergence d);
Divergence divergence_from_string(const std::string &name);

/// Solver parameters. Setters enforce the documented bounds.
class SolverConfig {
public:
    SolverConfig() = default;

    double epsilon() const { return epsilon_; }
    bool relative_epsilon() const { return relative_epsilon_; }
    double rho() const { return rho_; }
    double alpha() const { return alpha_; }
    int max_iterations() const { return max_iterations_; }
    double tolerance() const { return tolerance_; }
    Divergence divergence() const { return divergence_; }
    std::uint64_t seed() const { return seed_; }
    Metric intra_metric() const { return intra_metric_; }

    SolverConfig &set_epsilon(double v);
    SolverConfig &set_relative_epsilon(bool v);
    SolverConfig &set_rho(double v);
    SolverConfig &set_alpha(double v);
    SolverConfig &set_max_iterations(int v);
    SolverConfig &set_tolerance(double v);
    SolverConfig &set_divergence(Divergence v);
    SolverConfig &set_seed(std::uint64_t v);
    SolverConfig &set_intra_metric(Metric v);

    /// Effective regularization weight for a given objective matrix.
    double effective_epsilon(const Matrix &objective) const;

private:
    double epsilon_ = 0.005;
    bool relative_epsilon_ = false;
    double rho_ = 0.1;
    double alpha_ = 0.5;
    int max_iterations_ = 10000;
    double tolerance_ = 1e-9;
    Divergence divergence_ = Divergence::JS;
    std::uint64_t seed_ = 0;
    Metric intra_metric_ = Metric::SqEuclidean;
};

} // namespace kpgot

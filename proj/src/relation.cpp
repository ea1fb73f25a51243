#include "kpgot/relation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kpgot {

namespace {

constexpr double kRatioFloor = 1e-300;
constexpr double kSimplexTolerance = 1e-9;

double kl(const double *x, const double *y, Index size) {
    double s = 0.0;
    for (Index u = 0; u < size; ++u) {
        if (x[u] > 0.0)
            s += x[u] * std::log(x[u] / std::max(y[u], kRatioFloor));
    }
    return std::max(s, 0.0);
}

double js(const double *x, const double *y, Index size) {
    double s = 0.0;
    for (Index u = 0; u < size; ++u) {
        const double mid = 0.5 * (x[u] + y[u]);
        if (x[u] > 0.0)
            s += 0.5 * x[u] * std::log(x[u] / mid);
        if (y[u] > 0.0)
            s += 0.5 * y[u] * std::log(y[u] / mid);
    }
    return std::max(s, 0.0);
}

void check_simplex_rows(const Matrix &r) {
    for (Index k = 0; k < r.rows(); ++k) {
        const double sum = r.row(k).sum();
        if (std::abs(sum - 1.0) > kSimplexTolerance || r.row(k).minCoeff() < 0.0)
            fail(ErrorCode::NonSimplexRow,
                 "relation row " + std::to_string(k) + " is not a probability vector");
    }
}

} // namespace

RelationMatrix relation_scores(const CostMatrix &intra, const std::vector<Index> &keypoints,
                               double rho, RelationMode mode) {
    require(!keypoints.empty(), ErrorCode::EmptyKeypoints,
            "relation scores need at least one keypoint");
    require(intra.rows() == intra.cols(), ErrorCode::ShapeMismatch,
            "intra-domain cost must be square");
    require(rho > 0.0 && std::isfinite(rho), ErrorCode::InvalidConfig, "rho must be > 0");
    for (Index k : keypoints)
        require(k >= 0 && k < intra.rows(), ErrorCode::IndexOutOfBounds,
                "keypoint index " + std::to_string(k) + " out of range");

    const Index count = intra.rows();
    const Index u_count = static_cast<Index>(keypoints.size());
    const double max_cost = intra.max();

    RelationMatrix out;
    out.mode = mode;
    out.scale = max_cost > 0.0 ? max_cost : 1.0;
    out.values.resize(count, u_count);

    if (mode == RelationMode::RawDist) {
        for (Index u = 0; u < u_count; ++u)
            out.values.col(u) = intra.values().col(keypoints[u]);
        return out;
    }

    const double tau = max_cost > 0.0 ? rho * max_cost : rho;
    std::vector<double> logits(u_count);
    for (Index k = 0; k < count; ++k) {
        double top = -std::numeric_limits<double>::infinity();
        for (Index u = 0; u < u_count; ++u) {
            logits[u] = -intra(k, keypoints[u]) / tau;
            top = std::max(top, logits[u]);
        }
        double z = 0.0;
        for (Index u = 0; u < u_count; ++u) {
            logits[u] = std::exp(logits[u] - top);
            z += logits[u];
        }
        for (Index u = 0; u < u_count; ++u)
            out.values(k, u) = logits[u] / z;
    }
    return out;
}

double relation_divergence(const double *x, const double *y, Index size, Divergence d) {
    switch (d) {
    case Divergence::JS: return js(x, y, size);
    case Divergence::KL_ST: return kl(x, y, size);
    case Divergence::KL_TS: return kl(y, x, size);
    case Divergence::L1: {
        double s = 0.0;
        for (Index u = 0; u < size; ++u)
            s += std::abs(x[u] - y[u]);
        return s;
    }
    case Divergence::L2:
    case Divergence::RAW_DIST: {
        double s = 0.0;
        for (Index u = 0; u < size; ++u)
            s += (x[u] - y[u]) * (x[u] - y[u]);
        return std::sqrt(s);
    }
    }
    return 0.0;
}

GuidingMatrix guiding_matrix(const RelationMatrix &rs, const RelationMatrix &rt,
                             Divergence divergence) {
    require(rs.values.cols() == rt.values.cols(), ErrorCode::ShapeMismatch,
            "relation matrices refer to different numbers of keypoints");
    require(rs.mode == rt.mode, ErrorCode::IncompatibleMode,
            "source and target relations use different modes");
    const bool raw = rs.mode == RelationMode::RawDist;
    if (raw)
        require(divergence == Divergence::L2 || divergence == Divergence::RAW_DIST,
                ErrorCode::IncompatibleMode, "raw-distance relations pair only with L2");
    else
        require(divergence != Divergence::RAW_DIST, ErrorCode::IncompatibleMode,
                "RAW_DIST divergence needs raw-distance relations");

    // Row-major copies so each relation vector is contiguous.
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor xs = rs.values;
    RowMajor yt = rt.values;
    if (raw) {
        xs /= rs.scale;
        yt /= rt.scale;
    } else {
        check_simplex_rows(rs.values);
        check_simplex_rows(rt.values);
    }

    const Index u_count = xs.cols();
    Matrix g(xs.rows(), yt.rows());
    for (Index l = 0; l < yt.rows(); ++l)
        for (Index k = 0; k < xs.rows(); ++k)
            g(k, l) = relation_divergence(xs.row(k).data(), yt.row(l).data(), u_count, divergence);
    return GuidingMatrix(std::move(g));
}

GuidingMatrix guiding_from_intra(const CostMatrix &source_intra, const CostMatrix &target_intra,
                                 const KeypointPairing &kp, double rho, Divergence divergence) {
    require(!kp.empty(), ErrorCode::EmptyKeypoints, "guiding matrix needs keypoints");
    const RelationMode mode =
        divergence == Divergence::RAW_DIST ? RelationMode::RawDist : RelationMode::Softmax;
    const auto rs = relation_scores(source_intra, kp.sources(), rho, mode);
    const auto rt = relation_scores(target_intra, kp.targets(), rho, mode);
    return guiding_matrix(rs, rt, divergence);
}

} // namespace kpgot

#pragma once

#include "kpgot/core.hpp"

#include <vector>

namespace kpgot {

enum class RelationMode { Softmax, RawDist };

/// Relation of every point in a domain to that domain's keypoints, one row
/// per point and one column per keypoint.
struct RelationMatrix {
    Matrix values;
    RelationMode mode = RelationMode::Softmax;
    /// Largest intra-domain cost; RawDist rows are divided by it before
    /// they are compared.
    double scale = 1.0;
};

/// Softmax: row k is softmax_u(-C[k, i_u] / tau) with tau = rho * max(C).
/// An all-zero cost falls back to tau = rho, which yields uniform rows.
/// RawDist: row k is (C[k, i_1], ..., C[k, i_U]) verbatim.
RelationMatrix relation_scores(const CostMatrix &intra, const std::vector<Index> &keypoints,
                               double rho, RelationMode mode = RelationMode::Softmax);

/// Scalar dissimilarity between two relation rows.
double relation_divergence(const double *x, const double *y, Index size, Divergence d);

/// G[k,l] = d(Rs_k, Rt_l). RawDist relations pair only with L2 / RAW_DIST.
GuidingMatrix guiding_matrix(const RelationMatrix &rs, const RelationMatrix &rt,
                             Divergence divergence);

/// relation_scores on both domains followed by guiding_matrix, using the
/// relation mode implied by the divergence.
GuidingMatrix guiding_from_intra(const CostMatrix &source_intra, const CostMatrix &target_intra,
                                 const KeypointPairing &kp, double rho, Divergence divergence);

} // namespace kpgot

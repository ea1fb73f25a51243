#pragma once

#include "oracles.hpp"

#include "kpgot/core.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace testing_support {

using namespace kpgot;

struct Instance {
    DiscreteDistribution p;
    DiscreteDistribution q;
    KeypointPairing kp;
    CostMatrix cs;
    CostMatrix ct;
    CostMatrix cross;
};

/// Random point clouds with `pairs` keypoint pairs whose masses agree.
inline Instance random_instance(std::mt19937_64 &rng, Index m, Index n, std::size_t pairs,
                                Index dim = 2, bool uniform = false,
                                Metric metric = Metric::SqEuclidean) {
    std::vector<Index> rows(static_cast<std::size_t>(m));
    std::vector<Index> cols(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::shuffle(cols.begin(), cols.end(), rng);
    std::vector<IndexPair> kp;
    for (std::size_t u = 0; u < pairs; ++u)
        kp.emplace_back(rows[u], cols[u]);

    Vector p = uniform ? Vector(Vector::Constant(m, 1.0 / static_cast<double>(m)))
                       : oracle::random_simplex(rng, m);
    Vector q = uniform ? Vector(Vector::Constant(n, 1.0 / static_cast<double>(n)))
                       : oracle::random_simplex(rng, n);
    if (!uniform || m != n) {
        double kp_mass = 0.0;
        for (const auto &[i, j] : kp)
            kp_mass += p(i);
        std::vector<bool> is_kp(static_cast<std::size_t>(n), false);
        for (const auto &[i, j] : kp)
            is_kp[static_cast<std::size_t>(j)] = true;
        double free_q = 0.0;
        for (Index j = 0; j < n; ++j)
            if (!is_kp[static_cast<std::size_t>(j)])
                free_q += q(j);
        for (Index j = 0; j < n; ++j)
            if (!is_kp[static_cast<std::size_t>(j)])
                q(j) *= (1.0 - kp_mass) / free_q;
        for (const auto &[i, j] : kp)
            q(j) = p(i);
        // Put the rounding residue of the free block on its largest entry so
        // the totals agree to the last bit.
        Index big = -1;
        for (Index j = 0; j < n; ++j)
            if (!is_kp[static_cast<std::size_t>(j)] && (big < 0 || q(j) > q(big)))
                big = j;
        q(big) += p.sum() - q.sum();
    }
    DiscreteDistribution pd = make_distribution(oracle::random_points(rng, m, dim), p, MassMode::Raw);
    DiscreteDistribution qd = make_distribution(oracle::random_points(rng, n, dim), q, MassMode::Raw);
    Instance inst{pd, qd, KeypointPairing(kp), intra_cost(pd, metric), intra_cost(qd, metric),
                  pairwise_cost(pd, qd, metric)};
    return inst;
}

inline Matrix random_cost(std::mt19937_64 &rng, Index m, Index n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix c(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j)
            c(i, j) = u(rng);
    return c;
}

} // namespace testing_support

#pragma once

// File formats used by the command-line tool.
//
//   points:    CSV, header x0,x1,...[,weight]; uniform masses without weights
//   keypoints: JSON {"indexing": 0|1, "pairs": [[i, j], ...]}
//   plans:     dense CSV (%.17g) when min(m, n) <= 512, otherwise sparse
//              triplets under the header i,j,value

#include "kpgot/core.hpp"

#include <string>

namespace kpgot {

inline constexpr Index kDensePlanLimit = 512;

/// Weights are used as given (no normalization) when the column is present.
DiscreteDistribution read_points_csv(const std::string &path);
void write_points_csv(const std::string &path, const DiscreteDistribution &dist);

KeypointPairing read_keypoints_json(const std::string &path);

void write_plan_csv(const std::string &path, const Matrix &plan);
/// Sparse files carry no shape; pass it, or -1 to use the largest index + 1.
Matrix read_plan_csv(const std::string &path, Index rows = -1, Index cols = -1);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

} // namespace kpgot

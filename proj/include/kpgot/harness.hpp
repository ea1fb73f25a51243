#pragma once

// Gaussian-mixture toy scenarios, matching accuracy and solver comparisons.
//
// Random numbers come from std::mt19937_64 only; normal deviates are drawn
// with the Box-Muller transform on 53-bit uniforms so scenarios are
// bit-identical across standard libraries.

#include "kpgot/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kpgot {

struct ToyScenario {
    DiscreteDistribution source;
    DiscreteDistribution target;
    std::vector<int> source_labels;
    std::vector<int> target_labels;
    KeypointPairing keypoints; // grouped by class, class 0 first
    int classes = 0;
    int keypoints_per_class = 0;
    double mass_budget = 1.0; // s for the partial methods
    std::string description;
    std::uint64_t seed = 0;
};

/// Two mixtures with `classes` unit-variance components whose means sit on a
/// circle of radius `separation`, rotated independently per domain. The
/// keypoints of each class are its points nearest the component mean.
ToyScenario gen_mixture_scenario(int classes, int points_per_class, int keypoints_per_class,
                                 int dim, double separation, std::uint64_t seed);

/// Named scenarios. fig1/fig4: 3 classes, 20 points each, one keypoint per
/// class. fig5: the target lacks the last source class; every point has mass
/// 1/(3·20) and s is the target mass.
ToyScenario scenario_fig1(std::uint64_t seed);
ToyScenario scenario_fig4(std::uint64_t seed);
ToyScenario scenario_fig5(std::uint64_t seed);

/// Same problem with the roles of source and target exchanged.
ToyScenario swap_domains(const ToyScenario &scenario);

/// Σ plan_ij over same-label cells divided by Σ plan_ij.
double matching_accuracy(const Matrix &plan, const std::vector<int> &source_labels,
                         const std::vector<int> &target_labels);
double matching_accuracy(const TransportPlan &plan, const std::vector<int> &source_labels,
                         const std::vector<int> &target_labels);

enum class Method { KP, GW, KPG_RL_LP, KPG_RL_SH, KPG_RL_KP, KPG_RL_GW, PARTIAL_KP, PARTIAL_KPG_RL };

/// A method plus an optional limit on how many classes contribute keypoints
/// ("kpg-rl-kp@2" uses the keypoints of the first two classes).
struct MethodSpec {
    Method method = Method::KP;
    int keypoint_classes = -1;

    std::string name() const;
};

/// Accepts kp, gw, kpg-rl, kpg-rl-lp, kpg-rl-sh, kpg-rl-kp, kpg-rl-gw,
/// partial-kp, partial-kpg-rl, each optionally suffixed with @N.
MethodSpec parse_method(const std::string &token);
std::vector<MethodSpec> parse_method_list(const std::string &csv);
std::string valid_method_names();

struct MethodResult {
    std::string name;
    TransportPlan plan;
    double accuracy = 0.0;
    double unshared_mass = 0.0; // mass leaving source classes absent from the target
    double wall_ms = 0.0;
};

struct Comparison {
    std::vector<MethodResult> results; // in the order the methods were given
};

/// Runs every method on the scenario. Methods run concurrently, up to
/// KPG_OT_THREADS threads (0 or unset: hardware concurrency). Cross-domain
/// costs are squared Euclidean divided by their maximum; the GW methods also
/// divide each intra-domain cost by its maximum.
Comparison run_comparison(const ToyScenario &scenario, const std::vector<MethodSpec> &methods,
                          const SolverConfig &cfg);

/// Worker count derived from KPG_OT_THREADS.
unsigned thread_budget();

} // namespace kpgot

#include "kpgot/harness.hpp"

#include "kpgot/exact.hpp"
#include "kpgot/gw.hpp"
#include "kpgot/partial.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace kpgot {

namespace {

class Normal {
public:
    explicit Normal(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct Domain {
    Matrix points;
    Matrix means;
};

Domain sample_domain(int classes, int ppc, int dim, double separation, Normal &rng) {
    const double rotation = 2.0 * std::numbers::pi * rng.uniform();
    Domain d;
    d.means = Matrix::Zero(classes, dim);
    for (int c = 0; c < classes; ++c) {
        const double angle = rotation + 2.0 * std::numbers::pi * c / classes;
        d.means(c, 0) = separation * std::cos(angle);
        d.means(c, 1) = separation * std::sin(angle);
    }
    d.points.resize(static_cast<Index>(classes) * ppc, dim);
    for (int c = 0; c < classes; ++c)
        for (int k = 0; k < ppc; ++k)
            for (int x = 0; x < dim; ++x)
                d.points(static_cast<Index>(c) * ppc + k, x) = d.means(c, x) + rng();
    return d;
}

// Indices of the `count` points of class c nearest its mean, nearest first.
std::vector<Index> nearest_to_mean(const Domain &d, int c, int ppc, int count) {
    std::vector<Index> idx(static_cast<std::size_t>(ppc));
    for (int k = 0; k < ppc; ++k)
        idx[static_cast<std::size_t>(k)] = static_cast<Index>(c) * ppc + k;
    auto dist = [&](Index i) { return (d.points.row(i) - d.means.row(c)).squaredNorm(); };
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return dist(a) < dist(b); });
    idx.resize(static_cast<std::size_t>(count));
    return idx;
}

Matrix normalized(const Matrix &c) {
    const double top = c.maxCoeff();
    return top > 0.0 ? Matrix(c / top) : c;
}

KeypointPairing keypoints_for(const ToyScenario &s, const MethodSpec &spec) {
    if (spec.keypoint_classes < 0)
        return s.keypoints;
    const auto n = static_cast<std::size_t>(spec.keypoint_classes) *
                   static_cast<std::size_t>(s.keypoints_per_class);
    return s.keypoints.prefix(std::min(n, s.keypoints.size()));
}

double unshared_mass(const Matrix &plan, const std::vector<int> &source_labels,
                     const std::vector<int> &target_labels) {
    double mass = 0.0;
    for (Index i = 0; i < plan.rows(); ++i) {
        const int label = source_labels[static_cast<std::size_t>(i)];
        if (std::find(target_labels.begin(), target_labels.end(), label) == target_labels.end())
            mass += plan.row(i).sum();
    }
    return mass;
}

TransportPlan run_method(const ToyScenario &s, const MethodSpec &spec, const SolverConfig &cfg) {
    const DiscreteDistribution &p = s.source;
    const DiscreteDistribution &q = s.target;
    const KeypointPairing kp = keypoints_for(s, spec);
    const CostMatrix cross(normalized(pairwise_cost(p, q, Metric::SqEuclidean).values()));
    const CostMatrix cs = intra_cost(p, cfg.intra_metric());
    const CostMatrix ct = intra_cost(q, cfg.intra_metric());

    switch (spec.method) {
    case Method::KP:
        return lp_masked(p, q, cross, MaskMatrix::ones(p.count(), q.count()));
    case Method::GW: {
        const CostMatrix ns(normalized(cs.values()));
        const CostMatrix nt(normalized(ct.values()));
        return solve_kpg_rl_gw(p, q, ns, nt, KeypointPairing{}, 1.0, cfg).plan;
    }
    case Method::KPG_RL_LP:
        return solve_kpg_rl(p, q, cs, ct, kp, cfg, Backend::LP);
    case Method::KPG_RL_SH:
        return solve_kpg_rl(p, q, cs, ct, kp, cfg, Backend::Sinkhorn);
    case Method::KPG_RL_KP:
        return solve_kpg_rl_kp(p, q, cross, cs, ct, kp, cfg.alpha(), cfg, Backend::LP);
    case Method::KPG_RL_GW: {
        const CostMatrix ns(normalized(cs.values()));
        const CostMatrix nt(normalized(ct.values()));
        return solve_kpg_rl_gw(p, q, ns, nt, kp, cfg.alpha(), cfg).plan;
    }
    case Method::PARTIAL_KP:
        return solve_partial_ot(p, q, cross, s.mass_budget, cfg, Backend::LP);
    case Method::PARTIAL_KPG_RL:
        return solve_partial_kpg_rl(p, q, cs, ct, kp, s.mass_budget, cfg, Backend::LP);
    }
    fail(ErrorCode::InvalidConfig, "unknown method");
}

const std::vector<std::pair<std::string, Method>> &method_table() {
    static const std::vector<std::pair<std::string, Method>> table = {
        {"kp", Method::KP},
        {"gw", Method::GW},
        {"kpg-rl", Method::KPG_RL_LP},
        {"kpg-rl-lp", Method::KPG_RL_LP},
        {"kpg-rl-sh", Method::KPG_RL_SH},
        {"kpg-rl-kp", Method::KPG_RL_KP},
        {"kpg-rl-gw", Method::KPG_RL_GW},
        {"partial-kp", Method::PARTIAL_KP},
        {"partial-kpg-rl", Method::PARTIAL_KPG_RL},
    };
    return table;
}

} // namespace

ToyScenario gen_mixture_scenario(int classes, int points_per_class, int keypoints_per_class,
                                 int dim, double separation, std::uint64_t seed) {
    require(classes >= 2, ErrorCode::InvalidParameters, "need at least 2 classes");
    require(points_per_class >= 1, ErrorCode::InvalidParameters, "need at least 1 point per class");
    require(keypoints_per_class >= 0 && keypoints_per_class <= points_per_class,
            ErrorCode::InvalidParameters, "keypoints per class must lie in [0, points per class]");
    require(dim >= 2, ErrorCode::InvalidParameters, "dimension must be at least 2");
    require(std::isfinite(separation) && separation >= 0.0, ErrorCode::InvalidParameters,
            "separation must be finite and non-negative");

    Normal rng(seed);
    const Domain src = sample_domain(classes, points_per_class, dim, separation, rng);
    const Domain tgt = sample_domain(classes, points_per_class, dim, separation, rng);

    std::vector<IndexPair> pairs;
    for (int c = 0; c < classes; ++c) {
        const auto a = nearest_to_mean(src, c, points_per_class, keypoints_per_class);
        const auto b = nearest_to_mean(tgt, c, points_per_class, keypoints_per_class);
        for (std::size_t k = 0; k < a.size(); ++k)
            pairs.emplace_back(a[k], b[k]);
    }

    const auto count = static_cast<std::size_t>(classes) * static_cast<std::size_t>(points_per_class);
    std::vector<int> labels(count);
    for (std::size_t i = 0; i < count; ++i)
        labels[i] = static_cast<int>(i / static_cast<std::size_t>(points_per_class));

    ToyScenario s{make_uniform_distribution(src.points),
                  make_uniform_distribution(tgt.points),
                  labels,
                  labels,
                  KeypointPairing(std::move(pairs)),
                  classes,
                  keypoints_per_class,
                  1.0,
                  {},
                  seed};
    std::ostringstream desc;
    desc << classes << "-class mixture, " << points_per_class << " points/class, "
         << keypoints_per_class << " keypoints/class, dim " << dim << ", separation "
         << separation;
    s.description = desc.str();
    return s;
}

ToyScenario scenario_fig1(std::uint64_t seed) {
    ToyScenario s = gen_mixture_scenario(3, 20, 1, 2, 6.0, seed);
    s.description = "fig1: " + s.description;
    return s;
}

ToyScenario scenario_fig4(std::uint64_t seed) {
    ToyScenario s = gen_mixture_scenario(3, 20, 1, 2, 6.0, seed);
    s.description = "fig4: " + s.description;
    return s;
}

ToyScenario scenario_fig5(std::uint64_t seed) {
    constexpr int kClasses = 3;
    constexpr int kPpc = 20;
    const ToyScenario full = gen_mixture_scenario(kClasses, kPpc, 1, 2, 6.0, seed);
    const Index kept = static_cast<Index>(kClasses - 1) * kPpc;
    const double mass = 1.0 / (kClasses * kPpc);

    std::vector<IndexPair> pairs;
    for (const auto &pr : full.keypoints.pairs())
        if (pr.second < kept)
            pairs.push_back(pr);

    const Matrix tpoints = full.target.points().topRows(kept);
    ToyScenario s{make_distribution(full.source.points(),
                                    Vector::Constant(full.source.count(), mass), MassMode::Raw),
                  make_distribution(tpoints, Vector::Constant(kept, mass), MassMode::Raw),
                  full.source_labels,
                  std::vector<int>(full.target_labels.begin(),
                                   full.target_labels.begin() + kept),
                  KeypointPairing(std::move(pairs)),
                  kClasses,
                  1,
                  mass * static_cast<double>(kept),
                  {},
                  seed};
    s.description = "fig5: source has 3 classes, target the first 2; " + full.description;
    return s;
}

ToyScenario swap_domains(const ToyScenario &scenario) {
    std::vector<IndexPair> pairs;
    for (const auto &[i, j] : scenario.keypoints.pairs())
        pairs.emplace_back(j, i);
    ToyScenario s{scenario.target,
                  scenario.source,
                  scenario.target_labels,
                  scenario.source_labels,
                  KeypointPairing(std::move(pairs)),
                  scenario.classes,
                  scenario.keypoints_per_class,
                  scenario.mass_budget,
                  scenario.description + " (domains swapped)",
                  scenario.seed};
    return s;
}

double matching_accuracy(const Matrix &plan, const std::vector<int> &source_labels,
                         const std::vector<int> &target_labels) {
    require(static_cast<Index>(source_labels.size()) == plan.rows() &&
                static_cast<Index>(target_labels.size()) == plan.cols(),
            ErrorCode::ShapeMismatch, "label vectors do not match the plan");
    double same = 0.0;
    double other = 0.0;
    for (Index j = 0; j < plan.cols(); ++j)
        for (Index i = 0; i < plan.rows(); ++i)
            (source_labels[static_cast<std::size_t>(i)] == target_labels[static_cast<std::size_t>(j)]
                 ? same
                 : other) += plan(i, j);
    // same / (same + other) cannot round above 1.
    const double total = same + other;
    return total > 0.0 ? same / total : 0.0;
}

double matching_accuracy(const TransportPlan &plan, const std::vector<int> &source_labels,
                         const std::vector<int> &target_labels) {
    return matching_accuracy(plan.values(), source_labels, target_labels);
}

std::string MethodSpec::name() const {
    std::string base;
    switch (method) {
    case Method::KP: base = "kp"; break;
    case Method::GW: base = "gw"; break;
    case Method::KPG_RL_LP: base = "kpg-rl"; break;
    case Method::KPG_RL_SH: base = "kpg-rl-sh"; break;
    case Method::KPG_RL_KP: base = "kpg-rl-kp"; break;
    case Method::KPG_RL_GW: base = "kpg-rl-gw"; break;
    case Method::PARTIAL_KP: base = "partial-kp"; break;
    case Method::PARTIAL_KPG_RL: base = "partial-kpg-rl"; break;
    }
    if (keypoint_classes >= 0)
        base += "@" + std::to_string(keypoint_classes);
    return base;
}

std::string valid_method_names() {
    std::string out;
    for (const auto &[name, m] : method_table()) {
        if (!out.empty())
            out += ", ";
        out += name;
    }
    return out;
}

MethodSpec parse_method(const std::string &token) {
    MethodSpec spec;
    std::string base = token;
    if (const auto at = token.find('@'); at != std::string::npos) {
        base = token.substr(0, at);
        const std::string count = token.substr(at + 1);
        require(!count.empty() && count.find_first_not_of("0123456789") == std::string::npos &&
                    count.size() < 6,
                ErrorCode::InvalidConfig, "bad keypoint class count in '" + token + "'");
        spec.keypoint_classes = std::stoi(count);
    }
    for (const auto &[name, m] : method_table())
        if (name == base) {
            spec.method = m;
            return spec;
        }
    fail(ErrorCode::InvalidConfig,
         "unknown method '" + token + "'; valid methods: " + valid_method_names());
}

std::vector<MethodSpec> parse_method_list(const std::string &csv) {
    std::vector<MethodSpec> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(parse_method(item));
    return out;
}

unsigned thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("KPG_OT_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
    }
    return hw;
}

Comparison run_comparison(const ToyScenario &scenario, const std::vector<MethodSpec> &methods,
                          const SolverConfig &cfg) {
    const std::size_t count = methods.size();
    std::vector<std::optional<MethodResult>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                const auto start = std::chrono::steady_clock::now();
                TransportPlan plan = run_method(scenario, methods[k], cfg);
                const auto stop = std::chrono::steady_clock::now();
                const double acc =
                    matching_accuracy(plan, scenario.source_labels, scenario.target_labels);
                const double unshared =
                    unshared_mass(plan.values(), scenario.source_labels, scenario.target_labels);
                slots[k].emplace(MethodResult{
                    methods[k].name(), std::move(plan), acc, unshared,
                    std::chrono::duration<double, std::milli>(stop - start).count()});
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };

    const auto workers =
        static_cast<std::size_t>(std::min<std::size_t>(thread_budget(), std::max<std::size_t>(count, 1)));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();

    Comparison out;
    for (std::size_t k = 0; k < count; ++k) {
        if (errors[k])
            std::rethrow_exception(errors[k]);
        out.results.push_back(std::move(*slots[k]));
    }
    return out;
}

} // namespace kpgot

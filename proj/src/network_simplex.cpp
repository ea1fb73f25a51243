#include "kpgot/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace kpgot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Arc {
    int from;
    int to;
    double cost;
    double flow;
};

// Uncapacitated network simplex on the bipartite transport graph with an
// artificial root. Nodes [0, m) supply p, nodes [m, m+n) demand q, node m+n
// is the root. Artificial arcs connect every node to the root and carry a
// cost large enough that any plan using them is beaten by one that does not.
class TransportSimplex {
public:
    TransportSimplex(const Vector &p, const Vector &q, const Matrix &cost, const MaskMatrix &mask)
        : m_(static_cast<int>(p.size())), n_(static_cast<int>(q.size())), root_(m_ + n_),
          nodes_(m_ + n_ + 1) {
        double scale = 0.0;
        for (Index i = 0; i < m_; ++i)
            for (Index j = 0; j < n_; ++j)
                if (mask.admissible(i, j)) {
                    arcs_.push_back({static_cast<int>(i), m_ + static_cast<int>(j), cost(i, j), 0.0});
                    scale = std::max(scale, std::abs(cost(i, j)));
                }
        real_arcs_ = static_cast<int>(arcs_.size());
        const double art_cost = (scale + 1.0) * static_cast<double>(nodes_);
        eps_ = 1e-13 * art_cost;

        tree_adj_.assign(nodes_, {});
        in_tree_.assign(real_arcs_ + nodes_ - 1, false);
        for (int i = 0; i < m_; ++i) {
            if (p(i) > 0.0)
                add_tree_arc({i, root_, art_cost, p(i)});
            else
                add_tree_arc({root_, i, art_cost, 0.0});
        }
        for (int j = 0; j < n_; ++j)
            add_tree_arc({root_, m_ + j, art_cost, q(j)});

        parent_.assign(nodes_, -1);
        pred_.assign(nodes_, -1);
        up_.assign(nodes_, false);
        depth_.assign(nodes_, 0);
        pot_.assign(nodes_, 0.0);
        rebuild();
    }

    int run(long max_pivots, bool &optimal) {
        int pivots = 0;
        optimal = true;
        for (;;) {
            const int entering = find_entering();
            if (entering < 0)
                break;
            if (pivots >= max_pivots) {
                optimal = false;
                break;
            }
            pivot(entering);
            ++pivots;
        }
        return pivots;
    }

    double artificial_flow() const {
        double s = 0.0;
        for (std::size_t a = real_arcs_; a < arcs_.size(); ++a)
            s += arcs_[a].flow;
        return s;
    }

    Matrix plan() const {
        Matrix out = Matrix::Zero(m_, n_);
        for (int a = 0; a < real_arcs_; ++a)
            if (in_tree_[a])
                out(arcs_[a].from, arcs_[a].to - m_) = std::max(arcs_[a].flow, 0.0);
        return out;
    }

private:
    void add_tree_arc(Arc arc) {
        const int id = static_cast<int>(arcs_.size());
        arcs_.push_back(arc);
        in_tree_[id] = true;
        tree_adj_[arc.from].push_back(id);
        tree_adj_[arc.to].push_back(id);
    }

    // Recomputes parent/depth/potentials of the spanning tree from the root.
    void rebuild() {
        stack_.clear();
        stack_.push_back(root_);
        parent_[root_] = -1;
        pred_[root_] = -1;
        depth_[root_] = 0;
        pot_[root_] = 0.0;
        while (!stack_.empty()) {
            const int x = stack_.back();
            stack_.pop_back();
            for (int a : tree_adj_[x]) {
                if (a == pred_[x])
                    continue;
                const Arc &arc = arcs_[a];
                const int y = arc.from == x ? arc.to : arc.from;
                parent_[y] = x;
                pred_[y] = a;
                up_[y] = arc.from == y;
                depth_[y] = depth_[x] + 1;
                pot_[y] = up_[y] ? pot_[x] - arc.cost : pot_[x] + arc.cost;
                stack_.push_back(y);
            }
        }
    }

    int find_entering() const {
        const int total = static_cast<int>(arcs_.size());
        for (int a = 0; a < total; ++a) {
            if (in_tree_[a])
                continue;
            const Arc &arc = arcs_[a];
            if (arc.cost + pot_[arc.from] - pot_[arc.to] < -eps_)
                return a;
        }
        return -1;
    }

    void pivot(int entering) {
        const int first = arcs_[entering].from;
        const int second = arcs_[entering].to;

        int u = first;
        int v = second;
        while (u != v) {
            if (depth_[u] >= depth_[v])
                u = parent_[u];
            else
                v = parent_[v];
        }
        const int join = u;

        // Flow enters along first -> second and returns through the tree:
        // second up to join, then join down to first. Ties on the first path
        // keep the earliest blocking arc, ties on the second path the last,
        // which preserves strong feasibility of the tree.
        double delta = kInf;
        int leaving_node = -1;
        for (int x = first; x != join; x = parent_[x]) {
            const double d = up_[x] ? arcs_[pred_[x]].flow : kInf;
            if (d < delta) {
                delta = d;
                leaving_node = x;
            }
        }
        for (int x = second; x != join; x = parent_[x]) {
            const double d = up_[x] ? kInf : arcs_[pred_[x]].flow;
            if (d <= delta) {
                delta = d;
                leaving_node = x;
            }
        }
        if (leaving_node < 0 || !std::isfinite(delta))
            fail(ErrorCode::Infeasible, "transport problem is unbounded");

        if (delta > 0.0) {
            arcs_[entering].flow += delta;
            for (int x = first; x != join; x = parent_[x])
                arcs_[pred_[x]].flow += up_[x] ? -delta : delta;
            for (int x = second; x != join; x = parent_[x])
                arcs_[pred_[x]].flow += up_[x] ? delta : -delta;
        }

        const int leaving = pred_[leaving_node];
        arcs_[leaving].flow = 0.0;
        in_tree_[leaving] = false;
        erase_adj(arcs_[leaving].from, leaving);
        erase_adj(arcs_[leaving].to, leaving);

        in_tree_[entering] = true;
        tree_adj_[first].push_back(entering);
        tree_adj_[second].push_back(entering);
        rebuild();
    }

    void erase_adj(int node, int arc) {
        auto &list = tree_adj_[node];
        list.erase(std::find(list.begin(), list.end(), arc));
    }

    int m_;
    int n_;
    int root_;
    int nodes_;
    int real_arcs_ = 0;
    double eps_ = 0.0;
    std::vector<Arc> arcs_;
    std::vector<bool> in_tree_;
    std::vector<std::vector<int>> tree_adj_;
    std::vector<int> parent_;
    std::vector<int> pred_;
    std::vector<bool> up_;
    std::vector<int> depth_;
    std::vector<double> pot_;
    std::vector<int> stack_;
};

} // namespace

LpSolution transport_lp(const Vector &p, const Vector &q, const Matrix &cost,
                        const MaskMatrix &mask) {
    require(cost.rows() == p.size() && cost.cols() == q.size(), ErrorCode::ShapeMismatch,
            "cost shape does not match marginals");
    require(mask.rows() == p.size() && mask.cols() == q.size(), ErrorCode::ShapeMismatch,
            "mask shape does not match marginals");
    require(cost.allFinite(), ErrorCode::NonFiniteInput, "cost has non-finite entries");
    require(p.size() >= 1 && q.size() >= 1 && p.minCoeff() >= 0.0 && q.minCoeff() >= 0.0,
            ErrorCode::NonPositiveWeight, "marginals must be non-negative");
    const double total = std::max(p.sum(), q.sum());
    require(std::abs(p.sum() - q.sum()) <= kMassTolerance * std::max(1.0, total),
            ErrorCode::Infeasible, "total masses differ");

    TransportSimplex simplex(p, q, cost, mask);
    const long arcs = static_cast<long>(mask.values().sum()) + p.size() + q.size();
    LpSolution out;
    out.pivots = simplex.run(200 * arcs + 10000, out.optimal);
    if (simplex.artificial_flow() > 1e-10 * std::max(1.0, total))
        fail(ErrorCode::Infeasible, "masked polytope is empty");
    out.plan = simplex.plan();
    return out;
}

} // namespace kpgot

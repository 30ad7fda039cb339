#pragma once

/// Weighted standardized-sample sets: the adaptive interval-mass sigma-point
/// tree, plus Monte Carlo, Unscented, and Gauss-Hermite baselines.
///
/// The adaptive tree subdivides the coverage interval [-sigma_max, sigma_max]
/// in halves. A node of order p at index n sits at the center of its interval,
///     z(n, p) = sigma_max * ((2n + 1) / 2^p - 1),
/// and carries the Gaussian mass of that interval, Phi(hi) - Phi(lo). A
/// node's two children tile its interval exactly, so child weights sum to the
/// parent weight and a sample set can be refined mid-sweep without changing
/// the probability it represents. Splitting halts where a prospective child
/// would fall below w_min, and at p_max.
///
/// All generators are pure functions of their parameters; sets are immutable
/// value types safe to share across threads.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "collprob/errors.hpp"
#include "collprob/linalg.hpp"

namespace collprob {

enum class SchemeKind { adaptive, unscented, gauss_hermite, monte_carlo };

enum class Axis { x, y };

struct SigmaNode1D {
    int order = 0;        ///< p
    int index = 0;        ///< n in [0, 2^p)
    double z = 0.0;       ///< sigma_max * ((2n+1)/2^p - 1)
    double lo = 0.0;      ///< interval lower edge
    double hi = 0.0;      ///< interval upper edge
    double weight = 0.0;  ///< Phi(hi) - Phi(lo)
    bool halted = false;  ///< splitting stopped by the w_min rule
    int child0 = -1;
    int child1 = -1;

    bool has_children() const { return child0 >= 0; }
};

/// Precomputed binary tree of 1D interval-mass sigma nodes.
struct SigmaTree1D {
    double sigma_max = 0.0;
    double w_min = 0.0;
    int p_max = 0;
    std::vector<SigmaNode1D> nodes;  ///< nodes[0] is the root (p=0, n=0)
    double tail_mass = 0.0;          ///< 1 - (Phi(sigma_max) - Phi(-sigma_max))

    /// Node indices of the depth-p cut: each branch is taken at depth
    /// min(p, halt depth), left to right (ascending z).
    std::vector<int> cut(int p) const {
        std::vector<int> out;
        cut_rec(0, p, out);
        return out;
    }

private:
    void cut_rec(int id, int p, std::vector<int>& out) const {
        const SigmaNode1D& n = nodes[id];
        if (n.order == p || !n.has_children()) {
            out.push_back(id);
            return;
        }
        cut_rec(n.child0, p, out);
        cut_rec(n.child1, p, out);
    }
};

struct WeightedSample {
    double weight = 0.0;
    Vec3 z;
    int node_x = -1;  ///< index into the x tree (adaptive sets only)
    int node_y = -1;
};

/// A weighted standardized-sample set with its scheme tag; for adaptive sets
/// the per-axis orders and the tree node indices are retained so the set can
/// be split.
struct WeightedSampleSet {
    std::vector<WeightedSample> entries;
    SchemeKind scheme = SchemeKind::adaptive;
    int p_x = 0;
    int p_y = 0;
    /// Upper bound on ||(z.x, z.y)|| over the entries and any future splits.
    double max_pos_norm = 0.0;

    double weight_sum() const {
        // Kahan summation: conservation checks run at 1e-10..1e-12.
        double s = 0.0, c = 0.0;
        for (const WeightedSample& e : entries) {
            const double y = e.weight - c;
            const double t = s + y;
            c = (t - s) - y;
            s = t;
        }
        return s;
    }
};

namespace detail {

inline double interval_mass(double lo, double hi) {
    // Mirror negative-half intervals so weights are bit-exactly symmetric
    // in z; node intervals never straddle zero except the root's.
    if (hi <= 0.0) return std_normal_cdf(-lo) - std_normal_cdf(-hi);
    return std_normal_cdf(hi) - std_normal_cdf(lo);
}

/// Interval edges from the integer node address, so that a child's edges are
/// bit-identical to the corresponding parent edge and midpoint.
inline void node_geometry(double sigma_max, int p, int n, SigmaNode1D& node) {
    const double two_p = double(1u << p);
    node.order = p;
    node.index = n;
    node.z = sigma_max * ((2.0 * n + 1.0) / two_p - 1.0);
    node.lo = sigma_max * ((2.0 * n) / two_p - 1.0);
    node.hi = sigma_max * ((2.0 * (n + 1)) / two_p - 1.0);
}

inline int build_node(SigmaTree1D& tree, int p, int n) {
    SigmaNode1D node;
    node_geometry(tree.sigma_max, p, n, node);
    node.weight = interval_mass(node.lo, node.hi);
    const int id = int(tree.nodes.size());
    tree.nodes.push_back(node);

    if (p >= tree.p_max) return id;

    SigmaNode1D c0, c1;
    node_geometry(tree.sigma_max, p + 1, 2 * n, c0);
    node_geometry(tree.sigma_max, p + 1, 2 * n + 1, c1);
    const double w0 = interval_mass(c0.lo, c0.hi);
    const double w1 = interval_mass(c1.lo, c1.hi);
    if (w0 < tree.w_min || w1 < tree.w_min) {
        tree.nodes[id].halted = true;
        return id;
    }
    const int i0 = build_node(tree, p + 1, 2 * n);
    const int i1 = build_node(tree, p + 1, 2 * n + 1);
    tree.nodes[id].child0 = i0;
    tree.nodes[id].child1 = i1;
    return id;
}

}  // namespace detail

/// Precompute the 1D sigma tree for the given coverage interval, minimum
/// node weight, and maximum order. The root is always created and is never
/// subject to w_min.
inline SigmaTree1D build_sigma_tree(double sigma_max, double w_min, int p_max) {
    if (!(sigma_max > 0.0) || !(w_min >= 0.0 && w_min < 1.0) || p_max < 0 || p_max > 16)
        throw InvalidParamsError("build_sigma_tree: invalid parameters");
    SigmaTree1D tree;
    tree.sigma_max = sigma_max;
    tree.w_min = w_min;
    tree.p_max = p_max;
    tree.tail_mass = 1.0 - detail::interval_mass(-sigma_max, sigma_max);
    tree.nodes.reserve(std::size_t(2) << std::min(p_max, 12));
    detail::build_node(tree, 0, 0);
    return tree;
}

/// Cartesian product of the depth-p_x cut of tree_x with the depth-p_y cut of
/// tree_y. Samples are [z_i, z_j, 0]: no sigma-points are generated for the
/// attitude dimension.
inline WeightedSampleSet cut_at_orders(const SigmaTree1D& tree_x, const SigmaTree1D& tree_y,
                                       int p_x, int p_y) {
    if (p_x < 0 || p_x > tree_x.p_max || p_y < 0 || p_y > tree_y.p_max)
        throw InvalidParamsError("cut_at_orders: order out of range");
    const std::vector<int> cx = tree_x.cut(p_x);
    const std::vector<int> cy = tree_y.cut(p_y);
    WeightedSampleSet set;
    set.scheme = SchemeKind::adaptive;
    set.p_x = p_x;
    set.p_y = p_y;
    set.max_pos_norm = std::hypot(tree_x.sigma_max, tree_y.sigma_max);
    set.entries.reserve(cx.size() * cy.size());
    for (int ix : cx) {
        const SigmaNode1D& nx = tree_x.nodes[ix];
        for (int iy : cy) {
            const SigmaNode1D& ny = tree_y.nodes[iy];
            set.entries.push_back({nx.weight * ny.weight, {nx.z, ny.z, 0.0}, ix, iy});
        }
    }
    return set;
}

/// Replace each surviving entry whose 1D node on `axis` has children by its
/// two children (the other axis unchanged); halted or max-order nodes pass
/// through; non-survivors are dropped. Surviving weight is conserved.
inline WeightedSampleSet split_axis(const WeightedSampleSet& set, Axis axis,
                                    const std::vector<std::size_t>& survivors,
                                    const SigmaTree1D& tree_x, const SigmaTree1D& tree_y) {
    const SigmaTree1D& tree = (axis == Axis::x) ? tree_x : tree_y;
    const int order = (axis == Axis::x) ? set.p_x : set.p_y;
    if (order >= tree.p_max)
        throw InvalidParamsError("split_axis: axis already at maximum order");

    WeightedSampleSet out;
    out.scheme = set.scheme;
    out.p_x = set.p_x + (axis == Axis::x ? 1 : 0);
    out.p_y = set.p_y + (axis == Axis::y ? 1 : 0);
    out.max_pos_norm = set.max_pos_norm;
    out.entries.reserve(2 * survivors.size());
    for (std::size_t i : survivors) {
        const WeightedSample& e = set.entries[i];
        const int id = (axis == Axis::x) ? e.node_x : e.node_y;
        const SigmaNode1D& node = tree.nodes[id];
        if (!node.has_children()) {
            out.entries.push_back(e);
            continue;
        }
        for (int child : {node.child0, node.child1}) {
            WeightedSample c = e;
            const SigmaNode1D& cn = tree.nodes[child];
            if (axis == Axis::x) {
                c.node_x = child;
                c.z.x = cn.z;
                c.weight = cn.weight * tree_y.nodes[e.node_y].weight;
            } else {
                c.node_y = child;
                c.z.y = cn.z;
                c.weight = tree_x.nodes[e.node_x].weight * cn.weight;
            }
            out.entries.push_back(c);
        }
    }
    return out;
}

/// Upsampling trigger for one axis. The default form compares the physical
/// mean spacing between sigma-points, 2 sigma_max sqrt(var) / 2^p, against
/// d_max (meters). literal_spacing_rule instead uses the variance itself,
/// var / 2^p > d_max.
inline bool needs_upsample(const SymMat3& cov, Axis axis, int current_order, double d_max,
                           double sigma_max, int p_max, bool literal_spacing_rule = false) {
    if (current_order >= p_max) return false;
    const double var = std::max(0.0, (axis == Axis::x) ? cov.m00 : cov.m11);
    const double two_p = double(1u << current_order);
    if (literal_spacing_rule) return var / two_p > d_max;
    return 2.0 * sigma_max * std::sqrt(var) / two_p > d_max;
}

/// n standard-normal draws with uniform weights 1/n. Deterministic for a
/// fixed seed on a given platform.
inline WeightedSampleSet monte_carlo_set(long n, std::uint64_t seed) {
    if (n < 1) throw InvalidParamsError("monte_carlo_set: n must be >= 1");
    WeightedSampleSet set;
    set.scheme = SchemeKind::monte_carlo;
    set.entries.reserve(std::size_t(n));
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double w = 1.0 / double(n);
    double max_pos = 0.0;
    for (long i = 0; i < n; ++i) {
        Vec3 z{normal(gen), normal(gen), normal(gen)};
        max_pos = std::max(max_pos, std::hypot(z.x, z.y));
        set.entries.push_back({w, z, -1, -1});
    }
    set.max_pos_norm = max_pos;
    return set;
}

/// The 7-point unscented set for dimension 3: center weight kappa/(3+kappa),
/// axis points at +-sqrt(3+kappa) with weight 1/(2(3+kappa)).
inline WeightedSampleSet unscented_set(double kappa) {
    if (!(kappa > -3.0)) throw InvalidParamsError("unscented_set: kappa must exceed -3");
    WeightedSampleSet set;
    set.scheme = SchemeKind::unscented;
    const double spread = std::sqrt(3.0 + kappa);
    const double w_axis = 1.0 / (2.0 * (3.0 + kappa));
    set.entries.push_back({kappa / (3.0 + kappa), {0.0, 0.0, 0.0}, -1, -1});
    const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (const Vec3& e : axes) set.entries.push_back({w_axis, e * spread, -1, -1});
    for (const Vec3& e : axes) set.entries.push_back({w_axis, e * (-spread), -1, -1});
    set.max_pos_norm = spread;
    return set;
}

namespace detail {

/// Symmetric tridiagonal QL with implicit shifts. d holds the diagonal,
/// e the subdiagonal (e[i] couples i and i+1); z starts as identity and
/// accumulates eigenvectors in its columns.
inline void tridiag_ql(std::vector<double>& d, std::vector<double>& e,
                       std::vector<std::vector<double>>& z) {
    const int n = int(d.size());
    e.push_back(0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-15 * dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw InvalidParamsError("tridiag_ql: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[k][i + 1];
                        z[k][i + 1] = s * z[k][i] + c * f;
                        z[k][i] = c * z[k][i] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    e.pop_back();
}

/// 1D probabilists' Gauss-Hermite nodes and weights via Golub-Welsch:
/// Jacobi matrix with zero diagonal and off-diagonal sqrt(k). Weights come
/// from the squared first eigenvector components (total mass 1).
inline void gauss_hermite_1d(int degree, std::vector<double>& nodes,
                             std::vector<double>& weights) {
    std::vector<double> d(degree, 0.0);
    std::vector<double> e(degree > 1 ? degree - 1 : 0);
    for (int k = 1; k < degree; ++k) e[k - 1] = std::sqrt(double(k));
    std::vector<std::vector<double>> z(degree, std::vector<double>(degree, 0.0));
    for (int i = 0; i < degree; ++i) z[i][i] = 1.0;
    tridiag_ql(d, e, z);

    std::vector<int> idx(degree);
    for (int i = 0; i < degree; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    nodes.resize(degree);
    weights.resize(degree);
    for (int i = 0; i < degree; ++i) {
        nodes[i] = d[idx[i]];
        weights[i] = z[0][idx[i]] * z[0][idx[i]];
    }
}

}  // namespace detail

/// Full 3D tensor product of 1D probabilists' Gauss-Hermite rules: degree d
/// per axis gives d^3 samples (degree 8 -> 512).
inline WeightedSampleSet gauss_hermite_set(int degree) {
    if (degree < 1 || degree > 10)
        throw InvalidParamsError("gauss_hermite_set: degree must be in [1, 10]");
    std::vector<double> nodes, weights;
    detail::gauss_hermite_1d(degree, nodes, weights);
    WeightedSampleSet set;
    set.scheme = SchemeKind::gauss_hermite;
    set.entries.reserve(std::size_t(degree) * degree * degree);
    double max_abs = 0.0;
    for (double nd : nodes) max_abs = std::max(max_abs, std::abs(nd));
    set.max_pos_norm = std::hypot(max_abs, max_abs);
    for (int i = 0; i < degree; ++i)
        for (int j = 0; j < degree; ++j)
            for (int k = 0; k < degree; ++k)
                set.entries.push_back({weights[i] * weights[j] * weights[k],
                                       {nodes[i], nodes[j], nodes[k]},
                                       -1,
                                       -1});
    return set;
}

inline const char* scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::adaptive: return "adaptive";
        case SchemeKind::unscented: return "unscented";
        case SchemeKind::gauss_hermite: return "gauss_hermite";
        case SchemeKind::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

}  // namespace collprob

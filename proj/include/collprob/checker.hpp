#pragma once

/// Trajectory collision-probability estimation: forward sweep of a weighted
/// survivor set with geometric prefilters and adaptive upsampling.
///
/// Each weighted standardized sample z is realized at every timestep as
/// sqrt(Sigma_k) z + mu_k and collision-checked; once a sample collides its
/// weight moves permanently to the collision side, which realizes the
/// conditioning of later steps on earlier steps being collision-free. The
/// running collision probability is the accumulated removed weight, so the
/// reported curve is non-decreasing by construction.
///
/// Mass outside the coverage interval (the tail) is counted collision-free
/// up front. The one exception is a timestep with an exactly-zero covariance
/// square root: there every realization, tail included, coincides with the
/// mean, so a collision at the mean removes all remaining mass and the
/// result is exact for deterministic trajectories.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "collprob/errors.hpp"
#include "collprob/geometry.hpp"
#include "collprob/linalg.hpp"
#include "collprob/sigma_schemes.hpp"
#include "collprob/uncertainty.hpp"

namespace collprob {

struct SchemeSpec {
    SchemeKind kind = SchemeKind::adaptive;
    double kappa = 1.0;           ///< unscented spread parameter
    int gh_degree = 8;            ///< Gauss-Hermite 1D degree
    long mc_n = 2000;             ///< Monte Carlo sample count
    std::uint64_t mc_seed = 0;    ///< Monte Carlo seed
};

struct CheckerConfig {
    double sigma_max = 3.8;
    double w_min = 0.01;
    double d_max = 1.625;  ///< meters
    int p_max = 4;
    SchemeSpec scheme;
    bool prefilters_enabled = true;
    bool literal_spacing_rule = false;

    void validate() const {
        if (!(sigma_max > 0.0) || !(w_min >= 0.0 && w_min < 1.0) || !(d_max > 0.0) ||
            p_max < 0 || p_max > 16)
            throw InvalidParamsError("CheckerConfig: invalid parameters");
    }
};

struct CollisionResult {
    double p_collision_final = 0.0;
    /// Cumulative collision probability after each timestep (1 - free mass).
    std::vector<double> p_collision_curve;
    long samples_evaluated = 0;  ///< polygon intersection tests performed
    long prefilter_skips = 0;    ///< timesteps skipped by the ellipse prefilter
    long radius_skips = 0;       ///< per-sample radius-check skips
    double elapsed_s = 0.0;
};

/// The live weighted-sample set swept forward through time.
struct SurvivorSet {
    WeightedSampleSet samples;
    double free_mass = 1.0;  ///< surviving weight + tail mass
};

namespace detail {

/// Distance from point u to the filled axis-aligned ellipse with semi-axes
/// (a1, a2) >= 0. Degenerate axes reduce to a segment or point.
inline double dist_point_ellipse(double a1, double a2, double u1, double u2) {
    u1 = std::abs(u1);
    u2 = std::abs(u2);
    if (a1 < a2) {
        std::swap(a1, a2);
        std::swap(u1, u2);
    }
    if (a1 <= 0.0) return std::hypot(u1, u2);
    if (a2 <= 0.0) return std::hypot(std::max(u1 - a1, 0.0), u2);

    const double q = (u1 / a1) * (u1 / a1) + (u2 / a2) * (u2 / a2);
    if (q <= 1.0) return 0.0;
    const double r = std::hypot(u1, u2);
    if (r - a1 > 0.0 && q > 4.0) return r - a1;  // far field: sphere bound is enough

    // Solve f(mu) = (a1 u1/(a1^2+mu))^2 + (a2 u2/(a2^2+mu))^2 = 1, mu > 0.
    double lo = 0.0, hi = std::max(a1 * r, a1 * a1);
    auto f = [&](double mu) {
        const double t1 = a1 * u1 / (a1 * a1 + mu);
        const double t2 = a2 * u2 / (a2 * a2 + mu);
        return t1 * t1 + t2 * t2 - 1.0;
    };
    while (f(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double mu = 0.5 * (lo + hi);
    const double d1 = u1 * mu / (a1 * a1 + mu);
    const double d2 = u2 * mu / (a2 * a2 + mu);
    return std::hypot(d1, d2);
}

}  // namespace detail

/// Closed-form whole-timestep skip test: inflate the sigma_max covariance
/// ellipse by both bounding radii and test the relative mean position against
/// it. Returns true when the timestep may be skipped.
///
/// check_trajectory itself uses the exact point-to-ellipse distance with the
/// sample set's own support bound instead: the inflated ellipse is a subset
/// of the true reachable-plus-radius region, so for anisotropic covariances
/// this closed form can skip a timestep that a corner sample could still
/// reach. The exact test never can.
inline bool ellipse_prefilter(const RelativeGaussian& rel, double r1, double r2,
                              double sigma_max) {
    const EigenDecomp2 e = eig_sym2(position_block(rel.cov));
    const double d1 = sigma_max * std::sqrt(std::max(e.lambda1, 0.0)) + (r1 + r2);
    const double d2 = sigma_max * std::sqrt(std::max(e.lambda2, 0.0)) + (r1 + r2);
    if (d1 <= 0.0 || d2 <= 0.0) return false;
    const Vec2 p{rel.mean.x, rel.mean.y};
    const double u1 = e.v1.dot(p) / d1;
    const double u2 = e.v2.dot(p) / d2;
    return u1 * u1 + u2 * u2 > 1.0;
}

/// Per-sample distance check: the sample is surely collision-free when its
/// relative position lies beyond the summed bounding radii. Equality does
/// not skip (boundary contact counts as collision).
inline bool radius_prefilter(const Pose2D& sample_pose, double r1, double r2) {
    return std::hypot(sample_pose.x, sample_pose.y) > r1 + r2;
}

/// Estimate the probability that two agents' footprints collide at any
/// timestep of the relative-pose sequence.
inline CollisionResult check_trajectory(const Polygon2D& poly1, const Polygon2D& poly2,
                                        const std::vector<RelativeGaussian>& rels,
                                        const CheckerConfig& cfg) {
    cfg.validate();
    if (rels.empty()) throw EmptyTrajectoryError("check_trajectory: no timesteps");

    const auto t_start = std::chrono::steady_clock::now();

    const double r1 = poly1.bounding_radius();
    const double r2 = poly2.bounding_radius();
    const double radius_sum = r1 + r2;

    SigmaTree1D tree;  // shared by both position axes
    SurvivorSet survivors;
    WeightedSampleSet& current = survivors.samples;
    switch (cfg.scheme.kind) {
        case SchemeKind::adaptive:
            tree = build_sigma_tree(cfg.sigma_max, cfg.w_min, cfg.p_max);
            current = cut_at_orders(tree, tree, 0, 0);
            break;
        case SchemeKind::unscented:
            current = unscented_set(cfg.scheme.kappa);
            break;
        case SchemeKind::gauss_hermite:
            current = gauss_hermite_set(cfg.scheme.gh_degree);
            break;
        case SchemeKind::monte_carlo:
            current = monte_carlo_set(cfg.scheme.mc_n, cfg.scheme.mc_seed);
            break;
    }

    double tail_mass = 1.0 - current.weight_sum();

    // Removed mass only ever grows, so the curve is monotone exactly. For
    // the uniform-weight Monte Carlo scheme the removed fraction is tracked
    // by count, which keeps the all-samples-dead estimate at exactly 1.
    const bool uniform_weights = cfg.scheme.kind == SchemeKind::monte_carlo;
    double removed_weight = 0.0;
    long dead_count = 0;
    bool annihilated = false;  // a zero-covariance step collided at the mean
    auto removed_mass = [&]() {
        if (annihilated) return 1.0;
        if (uniform_weights)
            return std::min(double(dead_count) / double(cfg.scheme.mc_n), 1.0);
        return std::min(removed_weight, 1.0);
    };

    CollisionResult result;
    result.p_collision_curve.reserve(rels.size());
    auto record_step = [&] {
        const double p = removed_mass();
        survivors.free_mass = 1.0 - p;
        result.p_collision_curve.push_back(p);
    };

    std::vector<Vec2> placed1, placed2;
    std::vector<std::size_t> all_indices;

    for (const RelativeGaussian& rel : rels) {
        const Vec2 rel_pos{rel.mean.x, rel.mean.y};

        if (rel.sqrt_cov.is_zero()) {
            // Deterministic step: every realization equals the mean.
            if (cfg.prefilters_enabled && rel_pos.norm() > radius_sum) {
                ++result.prefilter_skips;
            } else if (!current.entries.empty() || tail_mass > 0.0) {
                ++result.samples_evaluated;
                if (collision_indicator(poly1, poly2, rel.mean, rel.anchor2) == 0) {
                    annihilated = true;
                    tail_mass = 0.0;
                    current.entries.clear();
                }
            }
            record_step();
            continue;
        }

        if (current.entries.empty()) {
            record_step();
            continue;
        }

        if (cfg.prefilters_enabled) {
            const EigenDecomp2 e = eig_sym2(position_block(rel.cov));
            const double a1 = current.max_pos_norm * std::sqrt(std::max(e.lambda1, 0.0));
            const double a2 = current.max_pos_norm * std::sqrt(std::max(e.lambda2, 0.0));
            const double dist =
                detail::dist_point_ellipse(a1, a2, e.v1.dot(rel_pos), e.v2.dot(rel_pos));
            if (dist - radius_sum > 1e-9 * (1.0 + radius_sum)) {
                ++result.prefilter_skips;
                record_step();
                continue;
            }
        }

        if (cfg.scheme.kind == SchemeKind::adaptive) {
            for (Axis axis : {Axis::x, Axis::y}) {
                int& order = (axis == Axis::x) ? current.p_x : current.p_y;
                while (needs_upsample(rel.cov, axis, order, cfg.d_max, cfg.sigma_max,
                                      cfg.p_max, cfg.literal_spacing_rule)) {
                    all_indices.resize(current.entries.size());
                    for (std::size_t i = 0; i < all_indices.size(); ++i) all_indices[i] = i;
                    current = split_axis(current, axis, all_indices, tree, tree);
                }
            }
        }

        bool placed2_valid = false;
        std::size_t write = 0;
        for (std::size_t i = 0; i < current.entries.size(); ++i) {
            const WeightedSample& e = current.entries[i];
            const Pose2D pose = realize(rel, e.z);
            if (cfg.prefilters_enabled && std::hypot(pose.x, pose.y) > radius_sum) {
                ++result.radius_skips;
                current.entries[write++] = e;
                continue;
            }
            if (!placed2_valid) {
                detail::place_into(poly2.vertices(), rel.anchor2, placed2);
                placed2_valid = true;
            }
            const Pose2D pose1{rel.anchor2.x + pose.x, rel.anchor2.y + pose.y,
                               rel.anchor2.theta + pose.theta};
            detail::place_into(poly1.vertices(), pose1, placed1);
            ++result.samples_evaluated;
            if (polygons_intersect(placed1, placed2)) {
                removed_weight += e.weight;
                ++dead_count;
            } else {
                current.entries[write++] = e;
            }
        }
        current.entries.resize(write);
        record_step();
    }

    result.p_collision_final = result.p_collision_curve.back();
    result.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

/// Independent per-pair evaluation against a list of other agents (pose
/// distributions between agents are assumed independent).
inline std::vector<CollisionResult> check_all_pairs(const Agent& ego,
                                                    const std::vector<Agent>& others,
                                                    const CheckerConfig& cfg) {
    std::vector<CollisionResult> results;
    results.reserve(others.size());
    for (const Agent& other : others) {
        const std::vector<RelativeGaussian> rels =
            relative_distribution(ego.trajectory, other.trajectory);
        results.push_back(check_trajectory(ego.footprint, other.footprint, rels, cfg));
    }
    return results;
}

}  // namespace collprob

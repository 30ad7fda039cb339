#pragma once

/// Gaussian trajectory model and the standardized-vector association map.
/// The relative pose at step k is N(mu1_k - mu2_k, Sigma1_k + Sigma2_k); a
/// fixed standardized vector z identifies the same quantile of that
/// distribution at every step, which is what encodes full temporal
/// correlation. realize() never needs the covariance inverse, so degenerate
/// covariances (deterministic poses) are fine everywhere except
/// standardize().

#include <cmath>
#include <string>
#include <vector>

#include "collprob/errors.hpp"
#include "collprob/geometry.hpp"
#include "collprob/linalg.hpp"

namespace collprob {

/// One trajectory sample: mean pose, covariance, and timestamp in seconds.
struct GaussianPose {
    Pose2D mean;
    SymMat3 cov;
    double time = 0.0;
};

struct GaussianTrajectory {
    std::vector<GaussianPose> poses;

    std::size_t size() const { return poses.size(); }
};

/// An agent: named footprint plus its Gaussian trajectory.
struct Agent {
    std::string name;
    Polygon2D footprint;
    GaussianTrajectory trajectory;
};

/// Relative pose distribution at one timestep, with the matrix square root
/// cached and agent 2's mean pose kept for indicator anchoring.
struct RelativeGaussian {
    Pose2D mean;
    SymMat3 cov;
    SymMat3 sqrt_cov;
    Pose2D anchor2;
};

/// Elementwise mean difference and covariance sum across two time-aligned
/// trajectories. Trajectories must have equal length and timestamps matching
/// within 1e-6 s; no interpolation is performed.
inline std::vector<RelativeGaussian> relative_distribution(const GaussianTrajectory& a,
                                                           const GaussianTrajectory& b) {
    if (a.size() != b.size())
        throw LengthMismatchError("relative_distribution: trajectories have " +
                                  std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                                  " poses");
    std::vector<RelativeGaussian> out;
    out.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const GaussianPose& pa = a.poses[k];
        const GaussianPose& pb = b.poses[k];
        if (std::abs(pa.time - pb.time) > 1e-6)
            throw TimeMismatchError("relative_distribution: timestamps differ at step " +
                                    std::to_string(k));
        RelativeGaussian rel;
        rel.mean = {pa.mean.x - pb.mean.x, pa.mean.y - pb.mean.y, pa.mean.theta - pb.mean.theta};
        rel.cov = pa.cov + pb.cov;
        rel.sqrt_cov = sqrt_sym3(rel.cov);
        rel.anchor2 = pb.mean;
        out.push_back(rel);
    }
    return out;
}

/// Map a standardized vector to a relative pose: sqrt(Sigma) z + mu.
inline Pose2D realize(const RelativeGaussian& rel, const Vec3& z) {
    const Vec3 s = rel.sqrt_cov.mul(z);
    return {rel.mean.x + s.x, rel.mean.y + s.y, rel.mean.theta + s.z};
}

/// Whiten a relative pose: sqrt(Sigma)^-1 (x - mu). Requires all covariance
/// eigenvalues > 1e-12; throws SingularCovarianceError otherwise.
inline Vec3 standardize(const RelativeGaussian& rel, const Pose2D& x) {
    const EigenDecomp3 e = eig_sym3(rel.cov);
    if (e.eigenvalues[2] <= 1e-12)
        throw SingularCovarianceError("standardize: covariance eigenvalue below 1e-12");
    const Vec3 d{x.x - rel.mean.x, x.y - rel.mean.y, x.theta - rel.mean.theta};
    Vec3 out{};
    for (int i = 0; i < 3; ++i) {
        const Vec3& v = e.vectors[i];
        const double coeff = (v.x * d.x + v.y * d.y + v.z * d.z) / std::sqrt(e.eigenvalues[i]);
        out.x += coeff * v.x;
        out.y += coeff * v.y;
        out.z += coeff * v.z;
    }
    return out;
}

}  // namespace collprob

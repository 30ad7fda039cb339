#pragma once

/// Scenario file schema (JSON, versioned) and a deterministic synthetic
/// scenario generator. See docs/scenario_schema.md for the field reference;
/// covariances are stored as the 6 upper-triangle entries row-major
/// (xx, xy, xtheta, yy, ytheta, thetatheta) and symmetrized on load.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "collprob/errors.hpp"
#include "collprob/geometry.hpp"
#include "collprob/linalg.hpp"
#include "collprob/uncertainty.hpp"

namespace collprob {

constexpr int kScenarioSchemaVersion = 1;

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    std::vector<Agent> agents;
    std::vector<std::string> warnings;  ///< non-fatal validation notes
};

enum class ScenarioTemplate { crossing, head_on, merging, creeping, overtake };

/// Parameters for the synthetic generator. Templates mirror the qualitative
/// regimes of interest: paths that cross, approach head on, merge at a
/// shallow angle, creep laterally, or run parallel during an overtake.
struct GeneratorSpec {
    ScenarioTemplate scenario_template = ScenarioTemplate::crossing;
    int K = 60;                    ///< steps
    double dt = 0.1;               ///< s
    double base_speed = 5.0;       ///< m/s
    double noise_growth = 0.02;    ///< per-step covariance inflation rate
    double pos_yaw_corr = 0.7;     ///< in [-1, 1]
    std::uint64_t seed = 0;

    void validate() const {
        if (K < 2 || !(dt > 0.0) || !(base_speed >= 0.0) || !(noise_growth >= 0.0) ||
            !(pos_yaw_corr >= -1.0 && pos_yaw_corr <= 1.0))
            throw InvalidSpecError("GeneratorSpec: invalid parameters");
    }
};

inline ScenarioTemplate scenario_template_from_string(const std::string& s) {
    if (s == "crossing") return ScenarioTemplate::crossing;
    if (s == "head_on") return ScenarioTemplate::head_on;
    if (s == "merging") return ScenarioTemplate::merging;
    if (s == "creeping") return ScenarioTemplate::creeping;
    if (s == "overtake") return ScenarioTemplate::overtake;
    throw InvalidSpecError("unknown scenario template: " + s);
}

inline const char* to_string(ScenarioTemplate t) {
    switch (t) {
        case ScenarioTemplate::crossing: return "crossing";
        case ScenarioTemplate::head_on: return "head_on";
        case ScenarioTemplate::merging: return "merging";
        case ScenarioTemplate::creeping: return "creeping";
        case ScenarioTemplate::overtake: return "overtake";
    }
    return "unknown";
}

namespace detail {

inline void validate_scenario(Scenario& sc) {
    if (sc.agents.size() < 2)
        throw ValidationError("scenario: need at least 2 agents, got " +
                              std::to_string(sc.agents.size()));
    const GaussianTrajectory& ref = sc.agents.front().trajectory;
    if (ref.size() < 1) throw ValidationError("scenario: empty trajectory for agent 0");
    for (std::size_t a = 0; a < sc.agents.size(); ++a) {
        const Agent& agent = sc.agents[a];
        const GaussianTrajectory& traj = agent.trajectory;
        if (traj.size() != ref.size())
            throw ValidationError("scenario: agent '" + agent.name +
                                  "' trajectory length differs from agent 0");
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const GaussianPose& gp = traj.poses[k];
            if (k > 0 && !(gp.time > traj.poses[k - 1].time))
                throw ValidationError("scenario: agent '" + agent.name +
                                      "' times not strictly increasing at step " +
                                      std::to_string(k));
            if (std::abs(gp.time - ref.poses[k].time) > 1e-6)
                throw ValidationError("scenario: agent '" + agent.name +
                                      "' time grid differs from agent 0 at step " +
                                      std::to_string(k));
            const EigenDecomp3 e = eig_sym3(gp.cov);
            if (e.eigenvalues[2] < -1e-12)
                throw ValidationError("scenario: agent '" + agent.name + "' covariance at step " +
                                      std::to_string(k) + " is not PSD (min eigenvalue " +
                                      std::to_string(e.eigenvalues[2]) + ")");
            if (std::sqrt(std::max(gp.cov.m22, 0.0)) > 0.5)
                sc.warnings.push_back("agent '" + agent.name + "' step " + std::to_string(k) +
                                      ": yaw standard deviation exceeds 0.5 rad");
        }
    }
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario sc;
    try {
        sc.schema_version = j.at("schema_version").get<int>();
        if (sc.schema_version != kScenarioSchemaVersion)
            throw ValidationError("scenario: unsupported schema_version " +
                                  std::to_string(sc.schema_version));
        for (const auto& ja : j.at("agents")) {
            std::vector<Vec2> verts;
            for (const auto& jv : ja.at("polygon"))
                verts.push_back({jv.at(0).get<double>(), jv.at(1).get<double>()});
            GaussianTrajectory traj;
            for (const auto& jp : ja.at("trajectory")) {
                GaussianPose gp;
                gp.time = jp.at("t").get<double>();
                const auto& jm = jp.at("mean");
                gp.mean = {jm.at(0).get<double>(), jm.at(1).get<double>(),
                           jm.at(2).get<double>()};
                const auto& jc = jp.at("cov");
                if (jc.size() != 6)
                    throw ValidationError("scenario: cov must have 6 upper-triangle entries");
                std::array<double, 6> u{};
                for (int i = 0; i < 6; ++i) u[std::size_t(i)] = jc.at(i).get<double>();
                gp.cov = SymMat3::from_upper_triangle(u);
                traj.poses.push_back(gp);
            }
            sc.agents.push_back(
                {ja.at("name").get<std::string>(), Polygon2D(std::move(verts)), std::move(traj)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    detail::validate_scenario(sc);
    return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    j["schema_version"] = sc.schema_version;
    j["agents"] = nlohmann::json::array();
    for (const Agent& agent : sc.agents) {
        nlohmann::json ja;
        ja["name"] = agent.name;
        ja["polygon"] = nlohmann::json::array();
        for (const Vec2& v : agent.footprint.vertices())
            ja["polygon"].push_back({v.x, v.y});
        ja["trajectory"] = nlohmann::json::array();
        for (const GaussianPose& gp : agent.trajectory.poses) {
            nlohmann::json jp;
            jp["t"] = gp.time;
            jp["mean"] = {gp.mean.x, gp.mean.y, gp.mean.theta};
            jp["cov"] = gp.cov.upper_triangle();
            ja["trajectory"].push_back(jp);
        }
        j["agents"].push_back(ja);
    }
    return j;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

inline void save_scenario(const std::string& path, const Scenario& sc) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open scenario file for writing: " + path);
    out << scenario_to_json(sc).dump(2) << "\n";
}

namespace detail {

/// PSD covariance with position block aligned to the heading frame and
/// position-yaw cross terms c * sigma_theta * (sqrt(Sigma_p) u_heading);
/// the Schur complement is sigma_theta^2 (1 - c^2) >= 0, so the result is
/// PSD for any |c| <= 1.
inline SymMat3 correlated_pose_cov(double var_long, double var_lat, double var_yaw,
                                   double heading, double corr) {
    const double c = std::cos(heading), s = std::sin(heading);
    const SymMat2 pos{c * c * var_long + s * s * var_lat, c * s * (var_long - var_lat),
                      s * s * var_long + c * c * var_lat};
    // sqrt of the 2x2 position block via its eigendecomposition
    const EigenDecomp2 e = eig_sym2(pos);
    const double s1 = std::sqrt(std::max(e.lambda1, 0.0));
    const double s2 = std::sqrt(std::max(e.lambda2, 0.0));
    const Vec2 u{c, s};
    const Vec2 root_u{s1 * e.v1.dot(u) * e.v1.x + s2 * e.v2.dot(u) * e.v2.x,
                      s1 * e.v1.dot(u) * e.v1.y + s2 * e.v2.dot(u) * e.v2.y};
    const double sigma_yaw = std::sqrt(var_yaw);
    const Vec2 cross = root_u * (corr * sigma_yaw);
    return {pos.m00, pos.m01, cross.x, pos.m11, cross.y, var_yaw};
}

inline Polygon2D l_shaped_footprint() {
    // truck-with-notch outline, non-convex
    return Polygon2D({{-2.6, -1.0},
                      {2.6, -1.0},
                      {2.6, 1.0},
                      {0.2, 1.0},
                      {0.2, 0.2},
                      {-2.6, 0.2}});
}

}  // namespace detail

/// Deterministic scenario synthesis. Mean paths are closed-form per
/// template; covariance at step k is Sigma_0 + k * Growth, both built PSD in
/// each agent's initial heading frame with cross terms set by pos_yaw_corr.
inline Scenario generate(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const double t_mid = 0.5 * spec.K * spec.dt;
    const double speed = spec.base_speed * (1.0 + 0.25 * unit(rng));
    const double lateral_jitter = 1.2 * unit(rng);
    const double timing_jitter = 0.6 * unit(rng);  // s, shifts the conflict point

    struct AgentDef {
        std::string name;
        Polygon2D footprint;
        double heading;
        double var_long0, var_lat0, var_yaw0;
        double growth_scale;
        std::vector<Pose2D> means;
    };

    const int K = spec.K;
    auto times = [&](int k) { return k * spec.dt; };

    AgentDef ego{"ego", Polygon2D::rectangle(4.6, 1.9), 0.0, 0.02, 0.01, 2e-4, 0.8, {}};
    const Polygon2D other_poly = Polygon2D::rectangle(4.2, 1.8);

    // Ego always drives east through the origin at t_mid; the overtake
    // template adds a sigmoid lane change on top.
    for (int k = 0; k < K; ++k) ego.means.push_back({speed * (times(k) - t_mid), 0.0, 0.0});

    AgentDef other{"", other_poly, 0.0, 0.04, 0.02, 3e-4, 2.0, {}};
    switch (spec.scenario_template) {
        case ScenarioTemplate::crossing: {
            other.name = "crossing_agent";
            other.heading = M_PI_2;
            for (int k = 0; k < K; ++k) {
                const double t = times(k);
                other.means.push_back(
                    {lateral_jitter, speed * (t - t_mid - timing_jitter), M_PI_2});
            }
            break;
        }
        case ScenarioTemplate::head_on: {
            other.name = "oncoming_agent";
            other.heading = M_PI;
            for (int k = 0; k < K; ++k) {
                const double t = times(k);
                other.means.push_back(
                    {-speed * (t - t_mid - timing_jitter), 2.4 + 1.5 * lateral_jitter, M_PI});
            }
            break;
        }
        case ScenarioTemplate::merging: {
            // straight-line approach at a shallow angle, reaching ego's lane
            // centerline at t_mid + timing_jitter
            const double angle = 0.26;
            const double t_merge = t_mid + timing_jitter;
            other.name = "merging_agent";
            other.heading = -angle;
            for (int k = 0; k < K; ++k) {
                const double t = times(k);
                other.means.push_back({speed * std::cos(angle) * (t - t_merge),
                                       speed * std::sin(angle) * (t_merge - t) +
                                           0.3 * lateral_jitter,
                                       -angle});
            }
            break;
        }
        case ScenarioTemplate::creeping: {
            other.name = "creeping_agent";
            other.footprint = detail::l_shaped_footprint();
            other.heading = -1.35;
            other.var_long0 = 0.03;
            other.var_lat0 = 0.02;
            other.var_yaw0 = 6e-4;
            other.growth_scale = 1.4;
            const double creep_speed = 0.18 * speed;
            for (int k = 0; k < K; ++k) {
                const double t = times(k);
                other.means.push_back({6.0 + lateral_jitter + 0.22 * creep_speed * t,
                                       3.6 - creep_speed * t, -1.35});
            }
            break;
        }
        case ScenarioTemplate::overtake: {
            other.name = "leading_agent";
            const double slow = 0.45 * speed;
            for (int k = 0; k < K; ++k) {
                const double t = times(k);
                other.means.push_back({8.0 + lateral_jitter + slow * (t - t_mid), 2.6, 0.0});
                const double shift =
                    2.6 / (1.0 + std::exp(-1.4 * (t - t_mid - timing_jitter)));
                ego.means[std::size_t(k)].y = shift;
            }
            break;
        }
    }

    std::vector<AgentDef> defs{std::move(ego), std::move(other)};

    Scenario sc;
    for (AgentDef& def : defs) {
        Agent agent{def.name, def.footprint, {}};
        const SymMat3 growth =
            detail::correlated_pose_cov(def.growth_scale * spec.noise_growth,
                                        0.9 * def.growth_scale * spec.noise_growth,
                                        0.01 * def.growth_scale * spec.noise_growth,
                                        def.heading, spec.pos_yaw_corr);
        const SymMat3 base = detail::correlated_pose_cov(def.var_long0, def.var_lat0,
                                                         def.var_yaw0, def.heading,
                                                         spec.pos_yaw_corr);
        for (int k = 0; k < K; ++k) {
            GaussianPose gp;
            gp.time = times(k);
            gp.mean = def.means[std::size_t(k)];
            gp.cov = base + growth * double(k);
            agent.trajectory.poses.push_back(gp);
        }
        sc.agents.push_back(std::move(agent));
    }
    detail::validate_scenario(sc);
    return sc;
}

}  // namespace collprob

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "collprob/sigma_schemes.hpp"
#include "oracles/normal_ref.hpp"

using namespace collprob;

namespace {

double coverage(double sigma_max) {
    return double(oracle::std_normal_cdf_ref(sigma_max) - oracle::std_normal_cdf_ref(-sigma_max));
}

// parameter grid shared by the conservation / child-sum property suites
struct TreeParams {
    double sigma_max, w_min;
    int p_max;
};
const std::vector<TreeParams> kGrid = [] {
    std::vector<TreeParams> grid;
    for (double sm : {2.0, 3.0, 3.8, 4.5})
        for (double wm : {0.0, 0.001, 0.01, 0.05})
            for (int pm : {0, 2, 4, 6}) grid.push_back({sm, wm, pm});
    return grid;
}();

}  // namespace

TEST_CASE("build_sigma_tree parameter validation") {
    CHECK_THROWS_AS(build_sigma_tree(0.0, 0.01, 4), InvalidParamsError);
    CHECK_THROWS_AS(build_sigma_tree(3.8, 1.0, 4), InvalidParamsError);
    CHECK_THROWS_AS(build_sigma_tree(3.8, -0.1, 4), InvalidParamsError);
    CHECK_THROWS_AS(build_sigma_tree(3.8, 0.01, 17), InvalidParamsError);
}

TEST_CASE("single-node tree at p_max = 0") {
    const SigmaTree1D tree = build_sigma_tree(3.8, 0.01, 0);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].z == 0.0);
    CHECK(tree.nodes[0].weight == Catch::Approx(coverage(3.8)).margin(1e-13));
    CHECK(tree.nodes[0].weight == Catch::Approx(0.99985530391).margin(1e-9));
    CHECK(tree.tail_mass == Catch::Approx(1.0 - coverage(3.8)).margin(1e-13));
}

TEST_CASE("order-1 nodes sit at +-sigma/2 with equal weights") {
    const SigmaTree1D tree = build_sigma_tree(3.8, 0.0, 1);
    const auto cut = tree.cut(1);
    REQUIRE(cut.size() == 2);
    CHECK(tree.nodes[cut[0]].z == Catch::Approx(-1.9).margin(1e-14));
    CHECK(tree.nodes[cut[1]].z == Catch::Approx(1.9).margin(1e-14));
    CHECK(tree.nodes[cut[0]].weight == tree.nodes[cut[1]].weight);
}

TEST_CASE("node values follow the closed form z = sigma*((2n+1)/2^p - 1)") {
    const SigmaTree1D tree = build_sigma_tree(3.0, 0.0, 6);
    for (const SigmaNode1D& n : tree.nodes) {
        const double expect = 3.0 * ((2.0 * n.index + 1.0) / double(1 << n.order) - 1.0);
        REQUIRE(n.z == expect);
    }
}

TEST_CASE("child weights sum exactly to the parent weight") {
    for (const TreeParams& tp : kGrid) {
        const SigmaTree1D tree = build_sigma_tree(tp.sigma_max, tp.w_min, tp.p_max);
        for (const SigmaNode1D& n : tree.nodes) {
            if (!n.has_children()) continue;
            const double child_sum = tree.nodes[n.child0].weight + tree.nodes[n.child1].weight;
            REQUIRE(std::abs(child_sum - n.weight) <= 1e-12);
        }
    }
}

TEST_CASE("cuts tile the coverage interval exactly") {
    for (const TreeParams& tp : kGrid) {
        const SigmaTree1D tree = build_sigma_tree(tp.sigma_max, tp.w_min, tp.p_max);
        for (int p = 0; p <= tp.p_max; ++p) {
            const auto cut = tree.cut(p);
            REQUIRE(tree.nodes[cut.front()].lo == -tp.sigma_max);
            REQUIRE(tree.nodes[cut.back()].hi == tp.sigma_max);
            for (std::size_t i = 1; i < cut.size(); ++i)
                REQUIRE(tree.nodes[cut[i]].lo == tree.nodes[cut[i - 1]].hi);
        }
    }
}

TEST_CASE("cut weight sum plus tail mass is one") {
    for (const TreeParams& tp : kGrid) {
        const SigmaTree1D tree = build_sigma_tree(tp.sigma_max, tp.w_min, tp.p_max);
        for (int p = 0; p <= tp.p_max; ++p) {
            double sum = 0.0;
            for (int id : tree.cut(p)) sum += tree.nodes[id].weight;
            REQUIRE(std::abs(sum + tree.tail_mass - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("w_min halting reproduces the hand-enumerated cut for the tuned parameters") {
    // sigma_max=3.8, w_min=0.01, p_max=4: the outermost branches stop at
    // order 2 because the outer child [2.85, 3.8] would weigh ~0.0021.
    const SigmaTree1D tree = build_sigma_tree(3.8, 0.01, 4);
    const auto cut = tree.cut(4);
    const std::vector<double> expected_z{-2.85,    -1.6625, -1.1875, -0.7125, -0.2375,
                                         0.2375,   0.7125,  1.1875,  1.6625,  2.85};
    const std::vector<int> expected_order{2, 4, 4, 4, 4, 4, 4, 4, 4, 2};
    REQUIRE(cut.size() == expected_z.size());
    for (std::size_t i = 0; i < cut.size(); ++i) {
        CHECK(tree.nodes[cut[i]].z == Catch::Approx(expected_z[i]).margin(1e-12));
        CHECK(tree.nodes[cut[i]].order == expected_order[i]);
    }
    CHECK(tree.nodes[cut[0]].halted);
    CHECK_FALSE(tree.nodes[cut[1]].halted);  // order 4 nodes simply hit p_max
}

TEST_CASE("cut_at_orders Cartesian product") {
    const SigmaTree1D tree = build_sigma_tree(3.8, 0.01, 4);
    SECTION("orders (0,0): one sample at the origin") {
        const WeightedSampleSet set = cut_at_orders(tree, tree, 0, 0);
        REQUIRE(set.entries.size() == 1);
        CHECK(set.entries[0].z.x == 0.0);
        CHECK(set.entries[0].z.y == 0.0);
        CHECK(set.entries[0].z.z == 0.0);
        const double cov = coverage(3.8);
        CHECK(set.entries[0].weight == Catch::Approx(cov * cov).margin(1e-12));
    }
    SECTION("orders (1,0): two samples at (+-1.9, 0, 0)") {
        const WeightedSampleSet set = cut_at_orders(tree, tree, 1, 0);
        REQUIRE(set.entries.size() == 2);
        CHECK(set.entries[0].z.x == Catch::Approx(-1.9).margin(1e-14));
        CHECK(set.entries[1].z.x == Catch::Approx(1.9).margin(1e-14));
        CHECK(set.entries[0].z.y == 0.0);
        CHECK(set.entries[0].z.z == 0.0);
    }
    SECTION("orders (4,4) with halting: 10 x 10 samples, all attitudes zero") {
        const WeightedSampleSet set = cut_at_orders(tree, tree, 4, 4);
        REQUIRE(set.entries.size() == 100);
        for (const WeightedSample& e : set.entries) REQUIRE(e.z.z == 0.0);
        // weight sum is the squared 1D coverage
        const double cov = coverage(3.8);
        CHECK(set.weight_sum() == Catch::Approx(cov * cov).margin(1e-10));
    }
    SECTION("orders beyond p_max are rejected") {
        CHECK_THROWS_AS(cut_at_orders(tree, tree, 5, 0), InvalidParamsError);
    }
}

TEST_CASE("split_axis") {
    const SigmaTree1D tree = build_sigma_tree(3.8, 0.01, 4);
    const WeightedSampleSet base = cut_at_orders(tree, tree, 2, 1);
    std::vector<std::size_t> all(base.entries.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    SECTION("splitting with all survivors conserves total weight") {
        const WeightedSampleSet split = split_axis(base, Axis::x, all, tree, tree);
        CHECK(std::abs(split.weight_sum() - base.weight_sum()) <= 1e-12);
        CHECK(split.p_x == base.p_x + 1);
        CHECK(split.p_y == base.p_y);
    }
    SECTION("splitting with no survivors gives an empty set") {
        const WeightedSampleSet split = split_axis(base, Axis::y, {}, tree, tree);
        CHECK(split.entries.empty());
    }
    SECTION("dropped survivors remove exactly their weight") {
        std::vector<std::size_t> some(all.begin(), all.begin() + all.size() / 2);
        double kept = 0.0;
        for (std::size_t i : some) kept += base.entries[i].weight;
        const WeightedSampleSet split = split_axis(base, Axis::x, some, tree, tree);
        CHECK(std::abs(split.weight_sum() - kept) <= 1e-12);
    }
    SECTION("splitting the x axis of an order-0 set matches cut_at_orders(1, p_y)") {
        const WeightedSampleSet from0 = cut_at_orders(tree, tree, 0, 1);
        std::vector<std::size_t> idx(from0.entries.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        WeightedSampleSet split = split_axis(from0, Axis::x, idx, tree, tree);
        WeightedSampleSet direct = cut_at_orders(tree, tree, 1, 1);
        auto key = [](const WeightedSample& a, const WeightedSample& b) {
            return a.z.x != b.z.x ? a.z.x < b.z.x : a.z.y < b.z.y;
        };
        std::sort(split.entries.begin(), split.entries.end(), key);
        std::sort(direct.entries.begin(), direct.entries.end(), key);
        REQUIRE(split.entries.size() == direct.entries.size());
        for (std::size_t i = 0; i < split.entries.size(); ++i) {
            REQUIRE(split.entries[i].z.x == direct.entries[i].z.x);
            REQUIRE(split.entries[i].z.y == direct.entries[i].z.y);
            REQUIRE(split.entries[i].weight == direct.entries[i].weight);
            REQUIRE(split.entries[i].node_x == direct.entries[i].node_x);
        }
    }
    SECTION("axis at maximum order is rejected") {
        const WeightedSampleSet maxed = cut_at_orders(tree, tree, 4, 0);
        std::vector<std::size_t> idx(maxed.entries.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        CHECK_THROWS_AS(split_axis(maxed, Axis::x, idx, tree, tree), InvalidParamsError);
    }
}

TEST_CASE("needs_upsample") {
    SECTION("zero covariance never upsamples") {
        CHECK_FALSE(needs_upsample(SymMat3::zero(), Axis::x, 0, 1.625, 3.8, 4));
    }
    SECTION("unit x-variance with tuned parameters") {
        const SymMat3 cov = SymMat3::diag(1.0, 0.0, 0.0);
        // mean spacing 2 * 3.8 * 1 / 2^0 = 7.6 > 1.625
        CHECK(needs_upsample(cov, Axis::x, 0, 1.625, 3.8, 4));
        // 7.6 / 8 = 0.95 <= 1.625
        CHECK_FALSE(needs_upsample(cov, Axis::x, 3, 1.625, 3.8, 4));
        CHECK_FALSE(needs_upsample(cov, Axis::y, 0, 1.625, 3.8, 4));
    }
    SECTION("order capped at p_max") {
        const SymMat3 cov = SymMat3::diag(100.0, 100.0, 0.0);
        CHECK_FALSE(needs_upsample(cov, Axis::x, 4, 1.625, 3.8, 4));
    }
    SECTION("literal variance rule") {
        const SymMat3 cov = SymMat3::diag(2.0, 0.0, 0.0);
        CHECK(needs_upsample(cov, Axis::x, 0, 1.625, 3.8, 4, true));   // 2 > 1.625
        CHECK_FALSE(needs_upsample(cov, Axis::x, 1, 1.625, 3.8, 4, true));  // 1 <= 1.625
    }
}

TEST_CASE("monte_carlo_set") {
    SECTION("n = 1") {
        const WeightedSampleSet set = monte_carlo_set(1, 9);
        REQUIRE(set.entries.size() == 1);
        CHECK(set.entries[0].weight == 1.0);
    }
    SECTION("weights sum to one") {
        const WeightedSampleSet set = monte_carlo_set(2000, 7);
        REQUIRE(set.entries.size() == 2000);
        CHECK(std::abs(set.weight_sum() - 1.0) <= 1e-13);
    }
    SECTION("deterministic for a fixed seed") {
        const WeightedSampleSet a = monte_carlo_set(500, 42);
        const WeightedSampleSet b = monte_carlo_set(500, 42);
        REQUIRE(a.entries.size() == b.entries.size());
        for (std::size_t i = 0; i < a.entries.size(); ++i) {
            REQUIRE(a.entries[i].z.x == b.entries[i].z.x);
            REQUIRE(a.entries[i].z.y == b.entries[i].z.y);
            REQUIRE(a.entries[i].z.z == b.entries[i].z.z);
        }
        const WeightedSampleSet c = monte_carlo_set(500, 43);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.entries.size(); ++i)
            any_diff = any_diff || a.entries[i].z.x != c.entries[i].z.x;
        CHECK(any_diff);
    }
    SECTION("max_pos_norm bounds every sample") {
        const WeightedSampleSet set = monte_carlo_set(5000, 3);
        for (const WeightedSample& e : set.entries)
            REQUIRE(std::hypot(e.z.x, e.z.y) <= set.max_pos_norm);
    }
    SECTION("invalid n rejected") { CHECK_THROWS_AS(monte_carlo_set(0, 1), InvalidParamsError); }
}

TEST_CASE("unscented_set") {
    SECTION("kappa = 1: points at +-2 e_i, center weight 1/4, axis weights 1/8") {
        const WeightedSampleSet set = unscented_set(1.0);
        REQUIRE(set.entries.size() == 7);
        CHECK(set.entries[0].weight == Catch::Approx(0.25).margin(1e-15));
        CHECK(set.entries[0].z.norm() == 0.0);
        for (std::size_t i = 1; i < 7; ++i) {
            CHECK(set.entries[i].weight == Catch::Approx(0.125).margin(1e-15));
            CHECK(set.entries[i].z.norm() == Catch::Approx(2.0).margin(1e-12));
        }
    }
    SECTION("kappa = 0 gives a zero center weight") {
        const WeightedSampleSet set = unscented_set(0.0);
        CHECK(set.entries[0].weight == 0.0);
    }
    SECTION("moment conditions hold for any kappa") {
        for (double kappa : {-0.5, 0.0, 1.0, 2.0}) {
            const WeightedSampleSet set = unscented_set(kappa);
            double w_sum = 0.0;
            double mean[3] = {0, 0, 0};
            double cov[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
            for (const WeightedSample& e : set.entries) {
                w_sum += e.weight;
                const double zz[3] = {e.z.x, e.z.y, e.z.z};
                for (int r = 0; r < 3; ++r) {
                    mean[r] += e.weight * zz[r];
                    for (int c = 0; c < 3; ++c) cov[r][c] += e.weight * zz[r] * zz[c];
                }
            }
            REQUIRE(std::abs(w_sum - 1.0) <= 1e-10);
            for (int r = 0; r < 3; ++r) {
                REQUIRE(std::abs(mean[r]) <= 1e-10);
                for (int c = 0; c < 3; ++c)
                    REQUIRE(std::abs(cov[r][c] - (r == c ? 1.0 : 0.0)) <= 1e-10);
            }
        }
    }
    SECTION("kappa <= -3 rejected") {
        CHECK_THROWS_AS(unscented_set(-3.0), InvalidParamsError);
    }
}

TEST_CASE("gauss_hermite_set") {
    SECTION("degree 1: single sample at the origin") {
        const WeightedSampleSet set = gauss_hermite_set(1);
        REQUIRE(set.entries.size() == 1);
        CHECK(set.entries[0].weight == Catch::Approx(1.0).margin(1e-12));
        CHECK(std::abs(set.entries[0].z.x) <= 1e-12);
    }
    SECTION("degree 2: 8 samples at (+-1,+-1,+-1) with weight 1/8") {
        const WeightedSampleSet set = gauss_hermite_set(2);
        REQUIRE(set.entries.size() == 8);
        for (const WeightedSample& e : set.entries) {
            CHECK(e.weight == Catch::Approx(0.125).margin(1e-12));
            CHECK(std::abs(std::abs(e.z.x) - 1.0) <= 1e-12);
            CHECK(std::abs(std::abs(e.z.y) - 1.0) <= 1e-12);
            CHECK(std::abs(std::abs(e.z.z) - 1.0) <= 1e-12);
        }
    }
    SECTION("degree 3 1D rule: nodes 0, +-sqrt(3), weights 2/3, 1/6") {
        std::vector<double> nodes, weights;
        detail::gauss_hermite_1d(3, nodes, weights);
        REQUIRE(nodes.size() == 3);
        CHECK(nodes[0] == Catch::Approx(-std::sqrt(3.0)).margin(1e-12));
        CHECK(std::abs(nodes[1]) <= 1e-12);
        CHECK(nodes[2] == Catch::Approx(std::sqrt(3.0)).margin(1e-12));
        CHECK(weights[0] == Catch::Approx(1.0 / 6.0).margin(1e-12));
        CHECK(weights[1] == Catch::Approx(2.0 / 3.0).margin(1e-12));
        CHECK(weights[2] == Catch::Approx(1.0 / 6.0).margin(1e-12));
    }
    SECTION("degree 8 yields 512 samples with unit weight sum and matched moments") {
        const WeightedSampleSet set = gauss_hermite_set(8);
        REQUIRE(set.entries.size() == 512);
        CHECK(std::abs(set.weight_sum() - 1.0) <= 1e-12);
        double mean[3] = {0, 0, 0};
        double cov[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        for (const WeightedSample& e : set.entries) {
            const double zz[3] = {e.z.x, e.z.y, e.z.z};
            for (int r = 0; r < 3; ++r) {
                mean[r] += e.weight * zz[r];
                for (int c = 0; c < 3; ++c) cov[r][c] += e.weight * zz[r] * zz[c];
            }
        }
        for (int r = 0; r < 3; ++r) {
            REQUIRE(std::abs(mean[r]) <= 1e-10);
            for (int c = 0; c < 3; ++c)
                REQUIRE(std::abs(cov[r][c] - (r == c ? 1.0 : 0.0)) <= 1e-10);
        }
    }
    SECTION("degree bounds") {
        CHECK_THROWS_AS(gauss_hermite_set(0), InvalidParamsError);
        CHECK_THROWS_AS(gauss_hermite_set(11), InvalidParamsError);
    }
}

TEST_CASE("adaptive product sets are mirror-symmetric bit for bit") {
    // the first-moment condition holds exactly because every entry has a
    // mirror partner with an identical weight and exactly negated z
    const SigmaTree1D tree = build_sigma_tree(3.8, 0.01, 4);
    const WeightedSampleSet set = cut_at_orders(tree, tree, 4, 3);
    for (const WeightedSample& e : set.entries) {
        bool found = false;
        for (const WeightedSample& m : set.entries) {
            if (m.z.x == -e.z.x && m.z.y == -e.z.y && m.weight == e.weight) {
                found = true;
                break;
            }
        }
        REQUIRE(found);
    }
}

TEST_CASE("adaptive second moment converges to the coverage-truncated value") {
    // The interval-mass scheme trades exact second moments for tiling: as
    // p_max grows (w_min = 0) the per-axis second moment approaches the
    // truncated-Gaussian integral coverage - 2 sigma phi(sigma), not 1.
    const double sigma = 3.8;
    const double phi_sigma = std::exp(-0.5 * sigma * sigma) / std::sqrt(2.0 * M_PI);
    const double limit = coverage(sigma) - 2.0 * sigma * phi_sigma;

    double prev_gap = 1e9;
    for (int pmax : {2, 4, 8, 12}) {
        const SigmaTree1D tree = build_sigma_tree(sigma, 0.0, pmax);
        double m2 = 0.0;
        for (int id : tree.cut(pmax)) m2 += tree.nodes[id].weight * tree.nodes[id].z *
                                             tree.nodes[id].z;
        const double gap = std::abs(m2 - limit);
        INFO("p_max=" << pmax << " E[z^2]=" << m2 << " limit=" << limit
                      << " distance from 1: " << std::abs(m2 - 1.0));
        REQUIRE(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 1e-3);
}

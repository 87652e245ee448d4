#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "crossproj/crossproj.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace crossproj;

namespace {

PointCloud two_points() {
    PointCloud c;
    c.positions = {Vec3(0.01, 0.01, 0.01), Vec3(0.04, 0.02, 0.03)};
    c.colors = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
    return c;
}

SparseVoxelGrid grid_of(std::vector<VoxelCoord> coords, double size = 1.0, std::vector<Label> labels = {}) {
    const std::size_t n = coords.size();
    FeatureSet3D f(n, 1);
    for (std::size_t i = 0; i < n; ++i) f.row(i)[0] = static_cast<float>(i);
    return SparseVoxelGrid(Vec3::Zero(), size, std::move(coords), std::move(f), std::move(labels));
}

}  // namespace

TEST(Voxelize, TwoPointsShareOneVoxel) {
    const SparseVoxelGrid g = voxelize(two_points(), 0.05);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g.coords()[0], (VoxelCoord{0, 0, 0}));
    EXPECT_FLOAT_EQ(g.features().row(0)[0], 0.5f);
    EXPECT_FLOAT_EQ(g.features().row(0)[1], 0.5f);
    EXPECT_FLOAT_EQ(g.features().row(0)[2], 0.0f);
}

TEST(Voxelize, EmptyCloud) {
    const SparseVoxelGrid g = voxelize(PointCloud{}, 0.05);
    EXPECT_EQ(g.size(), 0u);
    EXPECT_EQ(g.channels(), 3u);
}

TEST(Voxelize, FloorAtBoundary) {
    PointCloud c;
    c.positions = {Vec3(0.05, 0.0, -0.05)};
    c.colors = {Vec3(0, 0, 0)};
    const SparseVoxelGrid g = voxelize(c, 0.05);
    EXPECT_EQ(g.coords()[0][0], 1);
    EXPECT_EQ(g.coords()[0][1], 0);
    EXPECT_EQ(g.coords()[0][2], -1);
}

TEST(Voxelize, RejectsBadInput) {
    PointCloud c = two_points();
    EXPECT_THROW(voxelize(c, 0.0), ValidationError);
    EXPECT_THROW(voxelize(c, -1.0), ValidationError);
    c.positions[1].x() = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(voxelize(c, 0.05), ValidationError);
    c = two_points();
    c.colors[0].x() = 1.5;
    EXPECT_THROW(voxelize(c, 0.05), ValidationError);
}

TEST(Voxelize, MajorityLabelTiesToSmallest) {
    PointCloud c;
    for (Label l : {Label{7}, Label{3}, Label{7}, Label{3}, Label{9}}) {
        c.positions.emplace_back(0.5, 0.5, 0.5);
        c.colors.emplace_back(0, 0, 0);
        c.labels.push_back(l);
    }
    EXPECT_EQ(voxelize(c, 1.0).labels()[0], 3);
    c.labels.back() = 7;
    EXPECT_EQ(voxelize(c, 1.0).labels()[0], 7);
}

TEST(VoxelizeProperty, MatchesBruteForceGrouping) {
    gen::Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const double size = rng.uniform(0.05, 0.5);
        const Vec3 origin(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const PointCloud cloud = gen::random_cloud(rng, static_cast<std::size_t>(rng.integer(0, 400)), 1.0, true);
        std::vector<oracle::Vec3> pts;
        for (const auto& p : cloud.positions) pts.push_back(gen::to_array(p));
        const auto groups = oracle::group_points(pts, size, gen::to_array(origin));
        const SparseVoxelGrid g = voxelize(cloud, size, origin);
        ASSERT_EQ(g.size(), groups.size());
        EXPECT_TRUE(g.is_canonical());
        std::size_t i = 0;
        std::size_t members = 0;
        for (const auto& [key, idx] : groups) {
            const auto& c = g.coords()[i];
            EXPECT_EQ(std::get<0>(key), c[2]);
            EXPECT_EQ(std::get<1>(key), c[1]);
            EXPECT_EQ(std::get<2>(key), c[0]);
            members += idx.size();
            for (int k = 0; k < 3; ++k) {
                double mean = 0;
                for (auto j : idx) mean += cloud.colors[j][k];
                mean /= static_cast<double>(idx.size());
                EXPECT_NEAR(g.features().row(i)[static_cast<std::size_t>(k)], mean, 1e-6);
            }
            std::map<Label, int> votes;
            for (auto j : idx) ++votes[cloud.labels[j]];
            Label best = 0;
            int best_count = -1;
            for (auto [l, n] : votes)
                if (n > best_count) best = l, best_count = n;
            EXPECT_EQ(g.labels()[i], best);
            ++i;
        }
        EXPECT_EQ(members, cloud.size());
    }
}

TEST(VoxelizeProperty, PermutationInvariant) {
    gen::Rng rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        PointCloud cloud = gen::random_cloud(rng, 600, 0.3, true);
        const SparseVoxelGrid a = voxelize(cloud, 0.1);
        std::vector<std::size_t> perm(cloud.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng.engine());
        PointCloud shuffled;
        for (auto j : perm) {
            shuffled.positions.push_back(cloud.positions[j]);
            shuffled.colors.push_back(cloud.colors[j]);
            shuffled.labels.push_back(cloud.labels[j]);
        }
        EXPECT_EQ(voxelize(shuffled, 0.1), a);
    }
}

TEST(VoxelGrid, RejectsDuplicatesAndBadShapes) {
    EXPECT_THROW(grid_of({{0, 0, 0}, {0, 0, 0}}), ValidationError);
    EXPECT_THROW(SparseVoxelGrid(Vec3::Zero(), 1.0, {{0, 0, 0}}, FeatureSet3D(2, 1)), ValidationError);
    EXPECT_THROW(SparseVoxelGrid(Vec3::Zero(), 0.0, {}, FeatureSet3D(0, 1)), ValidationError);
    EXPECT_THROW(SparseVoxelGrid(Vec3::Zero(), 1.0, {{0, 0, 0}}, FeatureSet3D(1, 1), {1, 2}), ValidationError);
}

TEST(VoxelCenter, Examples) {
    const SparseVoxelGrid a = grid_of({{0, 0, 0}}, 0.05);
    EXPECT_LT((a.voxel_center(0) - Vec3(0.025, 0.025, 0.025)).norm(), 1e-15);
    const SparseVoxelGrid b = grid_of({{-1, 0, 2}}, 0.1);
    EXPECT_LT((b.voxel_center(0) - Vec3(-0.05, 0.05, 0.25)).norm(), 1e-15);
    EXPECT_THROW(b.voxel_center(1), RangeError);
}

TEST(Coarsen, StrideOneIsIdentity) {
    const SparseVoxelGrid g = grid_of({{0, 0, 0}, {1, 0, 0}, {5, -3, 2}}, 0.1, {1, 2, 3});
    const CoarsenResult r = coarsen(g, 1);
    EXPECT_EQ(r.grid, g);
    EXPECT_EQ(r.fine_to_coarse, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Coarsen, StrideTwoGroups) {
    const SparseVoxelGrid g = grid_of({{0, 0, 0}, {1, 1, 1}, {2, 0, 0}}, 0.1);
    const CoarsenResult r = coarsen(g, 2);
    ASSERT_EQ(r.grid.size(), 2u);
    EXPECT_EQ(r.grid.coords()[0], (VoxelCoord{0, 0, 0}));
    EXPECT_EQ(r.grid.coords()[1], (VoxelCoord{1, 0, 0}));
    EXPECT_EQ(r.fine_to_coarse, (std::vector<std::size_t>{0, 0, 1}));
    EXPECT_FLOAT_EQ(r.grid.features().row(0)[0], 0.5f);
    EXPECT_FLOAT_EQ(r.grid.features().row(1)[0], 2.0f);
    EXPECT_DOUBLE_EQ(r.grid.voxel_size(), 0.2);
}

TEST(Coarsen, FloorOnNegatives) {
    const CoarsenResult r = coarsen(grid_of({{-1, 0, 0}}), 2);
    EXPECT_EQ(r.grid.coords()[0], (VoxelCoord{-1, 0, 0}));
    EXPECT_THROW(coarsen(grid_of({}), 0), ValidationError);
}

TEST(CoarsenProperty, CompositionMatchesProductStride) {
    gen::Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::set<VoxelCoord> unique;
        const int n = rng.integer(0, 300);
        for (int i = 0; i < n; ++i) unique.insert({rng.integer(-40, 40), rng.integer(-40, 40), rng.integer(-40, 40)});
        const SparseVoxelGrid g = grid_of({unique.begin(), unique.end()});
        const int a = rng.integer(1, 5);
        const int b = rng.integer(1, 5);
        const auto twice = coarsen(coarsen(g, a).grid, b).grid;
        const auto once = coarsen(g, a * b).grid;
        EXPECT_EQ(twice.coords(), once.coords());
        // Every fine voxel lands in the coarse voxel containing it.
        const auto r = coarsen(g, a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto& f = g.coords()[i];
            const auto& c = r.grid.coords()[r.fine_to_coarse[i]];
            for (int k = 0; k < 3; ++k) {
                EXPECT_LE(c[k] * a, f[k]);
                EXPECT_GT((c[k] + 1) * a, f[k]);
            }
        }
    }
}

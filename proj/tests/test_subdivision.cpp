#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sylv/subdivision.hpp"

using namespace sylv;

namespace {

using PointSets = std::set<std::vector<LatticePoint>>;

Subdivision segment_pair()
{
    PointStore store({{-1}, {0}, {1}});
    return Subdivision(store, {{-1}, {1}}, CellList{{0, 1}, {1, 2}});
}

// H = {x1 = -x0}: the column region of the dual simplex one level up.
ColumnRegion region_level_two()
{
    std::vector<BigRat> coeff{BigRat(-1)};
    return {BigInt(-1), AffineFunctional(coeff, BigRat(0))};
}

HalfSpace slanted_level_two()
{
    HalfSpace h;
    h.normal = {BigRat(1), BigRat(1)};
    h.offset = 0;
    return h;
}

Subdivision glued_level_two()
{
    auto lower = pullback_restricted(segment_pair(), region_level_two());
    auto top = restrict_to_hyperplane(lower, slanted_level_two());
    auto upper = cone_subdivision({-1, 2}, top);
    return glue(lower, upper);
}

} // namespace

TEST(Cone, TwoTriangles)
{
    auto flat = embed(segment_pair(), 0).subdivision;
    auto c = cone_subdivision({0, 1}, flat);
    EXPECT_EQ(c.cells().size(), 2u);
    auto rep = verify(c);
    EXPECT_TRUE(rep.valid);
    EXPECT_TRUE(rep.unimodular);
    EXPECT_EQ(rep.volume_checksum, oracle::simplex_volume({{-1, 0}, {1, 0}, {0, 1}}));
}

TEST(Cone, ApexAtHeightTwoIsNotUnimodular)
{
    auto flat = embed(segment_pair(), 0).subdivision;
    auto rep = verify(cone_subdivision({0, 2}, flat));
    EXPECT_TRUE(rep.valid);
    EXPECT_FALSE(rep.unimodular);
    EXPECT_EQ(rep.volume_checksum, 4);
}

TEST(Cone, ApexInHyperplaneRejected)
{
    auto flat = embed(segment_pair(), 0).subdivision;
    EXPECT_THROW(cone_subdivision({5, 0}, flat), SingularityError);
}

TEST(Cone, RestrictRoundTrip)
{
    auto flat = embed(segment_pair(), 0).subdivision;
    auto c = cone_subdivision({0, 1}, flat);
    HalfSpace h{{BigRat(0), BigRat(1)}, BigRat(0)};
    EXPECT_EQ(restrict_to_hyperplane(c, h).cell_point_sets(), flat.cell_point_sets());
}

TEST(Pullback, ColumnCellsLevelTwo)
{
    auto s = pullback_restricted(segment_pair(), region_level_two());
    PointSets expect{{{-1, -1}, {-1, 1}, {0, -1}, {0, 0}}, {{0, -1}, {0, 0}, {1, -1}}};
    EXPECT_EQ(s.cell_point_sets(), expect);
    EXPECT_EQ(s.store().size(), 6u);
    auto rep = verify(s);
    EXPECT_TRUE(rep.valid);
    EXPECT_FALSE(rep.simplicial);
    // P^{<=H} = Conv((-1,-1),(1,-1),(-1,1)) has normalized area 4
    EXPECT_EQ(rep.volume_checksum, oracle::simplex_volume({{-1, -1}, {1, -1}, {-1, 1}}));
    HalfSpace bottom{{BigRat(0), BigRat(1)}, BigRat(1)};
    PointSets base{{{-1, -1}, {0, -1}}, {{0, -1}, {1, -1}}};
    EXPECT_EQ(restrict_to_hyperplane(s, bottom).cell_point_sets(), base);
}

TEST(Pullback, NonLatticeTopRejected)
{
    std::vector<BigRat> coeff{BigRat(1, 2)};
    ColumnRegion r{BigInt(-1), AffineFunctional(coeff, BigRat(1))};
    EXPECT_THROW(pullback_restricted(segment_pair(), r), VerificationError);
}

TEST(Restrict, TopFacesLevelTwo)
{
    auto s = pullback_restricted(segment_pair(), region_level_two());
    auto top = restrict_to_hyperplane(s, slanted_level_two());
    PointSets expect{{{-1, 1}, {0, 0}}, {{0, 0}, {1, -1}}};
    EXPECT_EQ(top.cell_point_sets(), expect);
    EXPECT_EQ(top.dim(), 1u);
    EXPECT_TRUE(verify(top).valid);
}

TEST(Restrict, FacetOfSingleSimplex)
{
    auto s = oracle::trivial_subdivision({{0, 0}, {2, 0}, {0, 2}});
    HalfSpace h{{BigRat(0), BigRat(1)}, BigRat(0)};
    PointSets expect{{{0, 0}, {2, 0}}};
    EXPECT_EQ(restrict_to_hyperplane(s, h).cell_point_sets(), expect);
}

TEST(Restrict, CrossingCellRejected)
{
    auto s = oracle::trivial_subdivision({{0, 0}, {2, 0}, {0, 2}});
    HalfSpace h{{BigRat(1), BigRat(0)}, BigRat(-1)};
    EXPECT_THROW(restrict_to_hyperplane(s, h), CompatibilityError);
}

TEST(Glue, SquareFromTwoTriangles)
{
    PointStore sa({{0, 0}, {1, 0}, {0, 1}});
    PointStore sb({{1, 0}, {0, 1}, {1, 1}});
    Subdivision a(sa, sa.points(), CellList{{0, 1, 2}});
    Subdivision b(sb, sb.points(), CellList{{0, 1, 2}});
    auto g = glue(a, b);
    EXPECT_EQ(g.cells().size(), 2u);
    auto rep = verify(g);
    EXPECT_TRUE(rep.valid);
    EXPECT_EQ(rep.volume_checksum, 2);
}

TEST(Glue, DualSimplexLevelTwo)
{
    auto g = glued_level_two();
    PointSets expect{{{-1, -1}, {-1, 1}, {0, -1}, {0, 0}},
                     {{0, -1}, {0, 0}, {1, -1}},
                     {{-1, 1}, {-1, 2}, {0, 0}},
                     {{-1, 2}, {0, 0}, {1, -1}}};
    EXPECT_EQ(g.cell_point_sets(), expect);
    EXPECT_EQ(g.store().size(), 7u);
    auto rep = verify(g);
    EXPECT_TRUE(rep.valid);
    EXPECT_EQ(rep.volume_checksum, oracle::simplex_volume({{-1, -1}, {1, -1}, {-1, 2}}));
}

TEST(Glue, MismatchedInterfaceRejected)
{
    PointStore sa({{0, 0}, {2, 0}, {0, 2}, {1, 1}});
    PointStore sb({{2, 0}, {0, 2}, {2, 2}, {1, 1}});
    // a splits the diagonal at (1,1), b does not
    Subdivision a(sa, {{0, 0}, {2, 0}, {0, 2}}, CellList{{0, 1, 2}, {0, 1, 3}});
    PointStore sa2({{0, 0}, {2, 0}, {0, 2}, {1, 1}});
    Subdivision a2(sa2, {{0, 0}, {2, 0}, {0, 2}}, CellList{{0, 1, 3}, {0, 2, 3}});
    Subdivision b(sb, {{2, 0}, {0, 2}, {2, 2}}, CellList{{0, 2, 3}});
    EXPECT_THROW(glue(a2, b), CompatibilityError);
    (void)a;
}

TEST(Pull, SegmentAtMidpoint)
{
    auto s = oracle::trivial_subdivision({{-1}, {1}});
    auto p = pull(s, s.store().at({0}));
    EXPECT_EQ(p.cell_point_sets(), segment_pair().cell_point_sets());
}

TEST(Pull, TriangleAtInteriorPoint)
{
    auto s = oracle::trivial_subdivision({{-1, -1}, {-1, 2}, {1, -1}});
    auto p = pull(s, s.store().at({0, 0}));
    EXPECT_EQ(p.cells().size(), 3u);
    EXPECT_TRUE(verify(p).valid);
}

TEST(Pull, VertexOfSimplicesIsNoOp)
{
    auto s = oracle::trivial_subdivision({{-1, -1}, {-1, 2}, {1, -1}});
    auto once = pull(s, s.store().at({0, 0}));
    auto again = pull(once, once.store().at({-1, -1}));
    EXPECT_EQ(again.cell_point_sets(), once.cell_point_sets());
}

TEST(Pull, PointOutsideEveryCellRejected)
{
    PointStore store({{0, 0}, {1, 0}, {0, 1}, {5, 5}});
    Subdivision s(store, {{0, 0}, {1, 0}, {0, 1}}, CellList{{0, 1, 2}});
    EXPECT_THROW(pull(s, store.at({5, 5})), DomainError);
}

TEST(Pull, Idempotent)
{
    std::mt19937 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = oracle::trivial_subdivision(oracle::random_polytope(rng, 2 + trial % 2, 7, 2));
        auto m = static_cast<PointId>(rng() % s.store().size());
        auto once = pull(s, m);
        EXPECT_EQ(pull(once, m).cell_point_sets(), once.cell_point_sets());
    }
}

TEST(Pull, MatchesLiteralDefinition)
{
    std::mt19937 rng(43);
    for (int trial = 0; trial < 15; ++trial) {
        auto s = oracle::trivial_subdivision(oracle::random_polytope(rng, 1 + trial % 3, 6, 2));
        for (std::size_t m = 0; m < s.store().size(); ++m) {
            auto expect = oracle::literal_pull(s.cell_point_sets(), s.store()[static_cast<PointId>(m)]);
            s = pull(s, static_cast<PointId>(m));
            ASSERT_EQ(s.cell_point_sets(), expect) << "trial " << trial << " point " << m;
        }
    }
}

TEST(PullAll, DualSimplexLevelTwo)
{
    auto t = pull_all(glued_level_two());
    EXPECT_EQ(t.cells().size(), 6u);
    auto rep = verify(t);
    EXPECT_TRUE(rep.valid);
    EXPECT_TRUE(rep.unimodular);
    EXPECT_EQ(rep.volume_checksum, 6);
}

TEST(PullAll, UnimodularInputUnchanged)
{
    auto t = pull_all(glued_level_two());
    EXPECT_EQ(pull_all(t).cell_point_sets(), t.cell_point_sets());
}

TEST(PullAll, RandomPolytopesConserveVolume)
{
    std::mt19937 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        auto vs = oracle::random_polytope(rng, 1 + trial % 3, 8, 3);
        auto t = pull_all(oracle::trivial_subdivision(vs));
        auto rep = verify(t);
        EXPECT_TRUE(rep.valid) << (rep.reasons.empty() ? "" : rep.reasons[0]);
        EXPECT_TRUE(rep.simplicial);
        EXPECT_EQ(rep.volume_checksum, lattice_volume_of_cell(vs));
    }
}

TEST(LatticeMap, IdentityAndShear)
{
    auto g = glued_level_two();
    EXPECT_EQ(apply_lattice_map(g, LatticeMap::identity(2)).subdivision, g);
    // (x0, x1) -> (x0, x1 + x0) flattens the slanted top onto x1 = 0
    LatticeMap shear{IntMatrix{{1, 0}, {1, 1}}, LatticePoint{0, 0}};
    auto lower = pullback_restricted(segment_pair(), region_level_two());
    auto top = restrict_to_hyperplane(apply_lattice_map(lower, shear).subdivision,
                                      HalfSpace{{BigRat(0), BigRat(1)}, BigRat(0)});
    EXPECT_EQ(top.cell_point_sets(), embed(segment_pair(), 0).subdivision.cell_point_sets());
}

TEST(LatticeMap, NonUnimodularRejected)
{
    LatticeMap twice{IntMatrix{{2, 0}, {0, 1}}, LatticePoint{0, 0}};
    EXPECT_THROW(apply_lattice_map(glued_level_two(), twice), DomainError);
}

TEST(LatticeMap, PreservesVerifyFlags)
{
    std::mt19937 rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = pull(oracle::trivial_subdivision(oracle::random_polytope(rng, 3, 7, 2)), 0);
        LatticeMap m{IntMatrix{{1, 2, 0}, {0, 1, -1}, {0, 0, 1}}, LatticePoint{3, -1, 2}};
        auto a = verify(s), b = verify(apply_lattice_map(s, m).subdivision);
        EXPECT_EQ(a.valid, b.valid);
        EXPECT_EQ(a.simplicial, b.simplicial);
        EXPECT_EQ(a.unimodular, b.unimodular);
        EXPECT_EQ(a.volume_checksum, b.volume_checksum);
    }
}

TEST(Verify, OverlappingCellsInvalid)
{
    PointStore store({{0, 0}, {2, 0}, {0, 2}, {2, 2}});
    Subdivision s(store, store.points(), CellList{{0, 1, 2}, {0, 1, 3}, {1, 2, 3}});
    for (auto mode : {IntersectionMode::pairwise, IntersectionMode::facet_keys}) {
        auto rep = verify(s, {mode});
        EXPECT_FALSE(rep.valid);
        bool named = std::any_of(rep.reasons.begin(), rep.reasons.end(), [](const std::string& r) {
            return r.find("interiors intersect") != std::string::npos;
        });
        EXPECT_TRUE(named);
    }
}

TEST(Verify, NonFaceIntersectionInvalid)
{
    // the long edge of one triangle is split by a vertex of the other side
    PointStore store({{0, 0}, {2, 0}, {1, 0}, {0, 2}, {1, -1}});
    Subdivision s(store, {{0, 0}, {2, 0}, {0, 2}, {1, -1}}, CellList{{0, 1, 3}, {0, 2, 4}, {1, 2, 4}});
    auto rep = verify(s, {IntersectionMode::pairwise});
    EXPECT_FALSE(rep.valid);
    EXPECT_FALSE(verify(s, {IntersectionMode::facet_keys}).valid);
}

#include <gtest/gtest.h>

#include <random>

#include "sylv/polytope.hpp"

using namespace sylv;

namespace {

LatticeSimplex simplex(std::vector<LatticePoint> v) { return LatticeSimplex(std::move(v)); }

// Exact convex-combination test by brute force over simplices of vertex subsets
// (Caratheodory): p is in conv(V) iff it lies in some d+1 point sub-simplex.
bool convex_combination(const std::vector<LatticePoint>& vs, const RationalPoint& p)
{
    const std::size_t d = p.dim();
    for (const auto& idx : detail::combinations(vs.size(), d + 1)) {
        std::vector<LatticePoint> sub;
        for (auto i : idx) sub.push_back(vs[i]);
        if (affine_rank(sub) != d) continue;
        Matrix a(d + 1, d + 1);
        std::vector<BigRat> b(d + 1);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c <= d; ++c) a(r, c) = BigRat(sub[c][r]);
            b[r] = p[r];
        }
        for (std::size_t c = 0; c <= d; ++c) a(d, c) = 1;
        b[d] = 1;
        auto lambda = solve(a, b);
        if (std::all_of(lambda.begin(), lambda.end(), [](const BigRat& x) { return sign(x) >= 0; })) return true;
    }
    return false;
}

} // namespace

TEST(Nvol, UnitSimplex) { EXPECT_EQ(nvol(simplex({{0, 0}, {1, 0}, {0, 1}})), 1); }

TEST(Nvol, WeightedSimplexDimensionTwo) { EXPECT_EQ(nvol(simplex({{1, 0}, {0, 1}, {-3, -2}})), 6); }

TEST(Nvol, DegenerateRejected)
{
    EXPECT_THROW(simplex({{0, 0}, {1, 1}, {2, 2}}), SingularityError);
    EXPECT_THROW(nvol(simplex({{0, 0}, {1, 1}})), SingularityError);
}

TEST(Nvol, InvariantUnderUnimodularMaps)
{
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coord(-5, 5), pick(0, 2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<LatticePoint> vs;
        for (int i = 0; i < 4; ++i) vs.push_back({coord(rng), coord(rng), coord(rng)});
        if (affine_rank(vs) != 3) continue;
        BigInt before = nvol(LatticeSimplex(vs));
        // random product of elementary shears plus a translation
        for (int step = 0; step < 6; ++step) {
            int a = pick(rng), b = (a + 1 + pick(rng) % 2) % 3;
            int k = coord(rng);
            for (auto& v : vs) v[a] += BigInt(k) * v[b];
        }
        LatticePoint shift{coord(rng), coord(rng), coord(rng)};
        for (auto& v : vs) v = v + shift;
        EXPECT_EQ(nvol(LatticeSimplex(vs)), before);
    }
}

TEST(LatticeVolume, LowerDimensionalUsesAffineLattice)
{
    EXPECT_EQ(lattice_volume(std::vector<LatticePoint>{{0, 0}, {2, 2}}), 2);
    EXPECT_EQ(lattice_volume(std::vector<LatticePoint>{{0, 0, 0}, {1, 0, 0}, {0, 1, 1}}), 1);
    EXPECT_EQ(lattice_volume_of_cell({{-1, -1}, {0, -1}, {-1, 1}, {0, 0}}), 3);
}

TEST(PolarDual, SelfDualSegment)
{
    auto d = polar_dual(simplex({{1}, {-1}}));
    ASSERT_TRUE(d.is_lattice());
    std::vector<RationalPoint> expect{RationalPoint(LatticePoint{1}), RationalPoint(LatticePoint{-1})};
    EXPECT_EQ(d.vertices, expect);
}

TEST(PolarDual, WeightedSimplexDimensionTwo)
{
    auto d = polar_dual(simplex({{1, 0}, {0, 1}, {-3, -2}}));
    ASSERT_TRUE(d.is_lattice());
    auto vs = d.lattice().vertices();
    std::sort(vs.begin(), vs.end());
    std::vector<LatticePoint> expect{{-1, -1}, {-1, 2}, {1, -1}};
    EXPECT_EQ(vs, expect);
}

TEST(PolarDual, Involution)
{
    LatticeSimplex p({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-21, -14, -6}});
    auto d = polar_dual(p);
    auto dd = polar_dual(d.vertices);
    std::vector<RationalPoint> orig(p.vertices().begin(), p.vertices().end());
    std::sort(dd.begin(), dd.end());
    std::sort(orig.begin(), orig.end());
    EXPECT_EQ(dd, orig);
}

TEST(PolarDual, PairingStructure)
{
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> coord(-4, 4);
    int done = 0;
    while (done < 40) {
        std::vector<LatticePoint> vs;
        for (int i = 0; i < 3; ++i) vs.push_back({coord(rng), coord(rng)});
        if (affine_rank(vs) != 2) continue;
        LatticeSimplex s(vs);
        if (contains(s, LatticePoint::zero(2)) != Membership::interior) continue;
        auto d = polar_dual(s);
        for (const auto& v : vs) {
            int zeros = 0;
            for (const auto& u : d.vertices) {
                BigRat val = dot(u.coords(), v) + 1;
                EXPECT_GE(sign(val), 0);
                zeros += val == 0;
            }
            EXPECT_EQ(zeros, 2);
        }
        ++done;
    }
}

TEST(PolarDual, OriginNotInteriorRejected)
{
    EXPECT_THROW(polar_dual(simplex({{0, 0}, {1, 0}, {0, 1}})), DomainError);
}

TEST(Halfspaces, Segment)
{
    auto hs = halfspaces(simplex({{1}, {-1}}));
    ASSERT_EQ(hs.size(), 2u);
    // facet opposite 1 is {x = -1}: x + 1 >= 0
    EXPECT_EQ(hs[0].normal[0], 1);
    EXPECT_EQ(hs[0].offset, 1);
    EXPECT_EQ(hs[1].normal[0], -1);
    EXPECT_EQ(hs[1].offset, 1);
}

TEST(Halfspaces, VertexSaturation)
{
    LatticeSimplex s({{-1, -1, -1}, {1, -1, -1}, {-1, 2, -1}, {-1, -1, 6}});
    auto hs = halfspaces(s);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(hs[j](s.vertices()[i]) == 0, i != j);
    for (const auto& p : lattice_points_bruteforce(s))
        for (const auto& h : hs) EXPECT_GE(sign(h(p)), 0);
}

TEST(Faces, Triangle)
{
    auto fs = faces(CellPolytope({{0, 0}, {1, 0}, {0, 1}}));
    ASSERT_EQ(fs.size(), 6u);
    EXPECT_EQ(std::count_if(fs.begin(), fs.end(), [](const CellPolytope& f) { return f.dim() == 0; }), 3);
    EXPECT_EQ(std::count_if(fs.begin(), fs.end(), [](const CellPolytope& f) { return f.dim() == 1; }), 3);
}

TEST(Faces, ColumnQuadrilateral)
{
    auto fs = faces(CellPolytope({{-1, -1}, {0, -1}, {-1, 1}, {0, 0}}));
    EXPECT_EQ(fs.size(), 8u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(fs[i].dim(), 0u);
    for (std::size_t i = 4; i < 8; ++i) EXPECT_EQ(fs[i].dim(), 1u);
}

TEST(Faces, SimplexCount)
{
    for (std::size_t d = 1; d <= 5; ++d) {
        std::vector<LatticePoint> vs{LatticePoint::zero(d)};
        for (std::size_t i = 0; i < d; ++i) vs.push_back(LatticePoint::unit(d, i));
        EXPECT_EQ(faces(CellPolytope(vs)).size(), (std::size_t{1} << (d + 1)) - 2);
    }
    EXPECT_TRUE(faces(CellPolytope({{3, 4}})).empty());
}

TEST(Faces, OctahedronAndCube)
{
    std::vector<LatticePoint> oct{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    EXPECT_EQ(faces(CellPolytope(oct)).size(), 6u + 12u + 8u);
    std::vector<LatticePoint> cube;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) cube.push_back({x, y, z});
    EXPECT_EQ(faces(CellPolytope(cube)).size(), 8u + 12u + 6u);
}

TEST(CellPolytope, RejectsNonVertex)
{
    EXPECT_THROW(CellPolytope({{0, 0}, {2, 0}, {1, 0}}), DomainError);
    auto c = CellPolytope::hull_of({{0, 0}, {2, 0}, {1, 0}, {0, 2}, {1, 1}});
    EXPECT_EQ(c.vertices(), (std::vector<LatticePoint>{{0, 0}, {0, 2}, {2, 0}}));
}

TEST(Contains, Examples)
{
    LatticeSimplex unit({{0, 0}, {1, 0}, {0, 1}});
    RationalPoint third(std::vector<BigRat>{BigRat(1, 3), BigRat(1, 3)});
    EXPECT_EQ(contains(unit, third), Membership::interior);
    EXPECT_EQ(contains(unit, LatticePoint{1, 0}), Membership::boundary);
    LatticeSimplex dual2({{-1, -1}, {1, -1}, {-1, 2}});
    EXPECT_EQ(contains(dual2, LatticePoint{1, 0}), Membership::outside);
    EXPECT_THROW(contains(unit, LatticePoint{1, 0, 0}), DimensionError);
}

TEST(Contains, LowerDimensionalCell)
{
    CellPolytope seg({{0, 0, 0}, {2, 2, 0}});
    EXPECT_EQ(contains(seg, LatticePoint{1, 1, 0}), Membership::interior);
    EXPECT_EQ(contains(seg, LatticePoint{2, 2, 0}), Membership::boundary);
    EXPECT_EQ(contains(seg, LatticePoint{1, 1, 1}), Membership::outside);
    EXPECT_EQ(contains(CellPolytope({{1, 2}}), LatticePoint{1, 2}), Membership::interior);
}

TEST(Contains, AgreesWithConvexCombination)
{
    std::mt19937 rng(29);
    std::uniform_int_distribution<int> coord(-4, 4), num(-30, 30), den(1, 6);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<LatticePoint> pts;
        for (int i = 0; i < 6; ++i) pts.push_back({coord(rng), coord(rng)});
        if (affine_rank(pts) != 2) continue;
        auto c = CellPolytope::hull_of(pts);
        for (int k = 0; k < 20; ++k) {
            RationalPoint p(std::vector<BigRat>{BigRat(num(rng), den(rng)), BigRat(num(rng), den(rng))});
            EXPECT_EQ(contains(c, p) != Membership::outside, convex_combination(c.vertices(), p));
        }
    }
}

TEST(LatticePoints, Segment)
{
    EXPECT_EQ(lattice_points_bruteforce(CellPolytope({{-1}, {1}})),
              (std::vector<LatticePoint>{{-1}, {0}, {1}}));
}

TEST(LatticePoints, DualSimplexDimensionTwo)
{
    std::vector<LatticePoint> expect{{-1, -1}, {-1, 0}, {-1, 1}, {-1, 2}, {0, -1}, {0, 0}, {1, -1}};
    EXPECT_EQ(lattice_points_bruteforce(LatticeSimplex({{-1, -1}, {1, -1}, {-1, 2}})), expect);
}

TEST(LatticePoints, SimplexP1DimensionTwo)
{
    // Conv(e0, e1, (-2,-1)); every point must satisfy every half-space
    LatticeSimplex s({{1, 0}, {0, 1}, {-2, -1}});
    auto pts = lattice_points_bruteforce(s);
    EXPECT_EQ(pts, (std::vector<LatticePoint>{{-2, -1}, {-1, 0}, {0, 0}, {0, 1}, {1, 0}}));
    for (const auto& p : pts)
        for (const auto& h : halfspaces(s)) EXPECT_GE(sign(h(p)), 0);
}

TEST(LatticePoints, RefusesHugeBox)
{
    LatticeSimplex big({{0, 0, 0}, {1000, 0, 0}, {0, 1000, 0}, {0, 0, 1000}});
    EXPECT_THROW(lattice_points_bruteforce(big), FeasibilityError);
}

TEST(LatticePoints, FiberEnumerationMatchesBoxScan)
{
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> coord(-5, 5), count(4, 8);
    int done = 0;
    while (done < 60) {
        const std::size_t d = 1 + done % 4;
        std::vector<LatticePoint> pts;
        int k = count(rng);
        for (int i = 0; i < k; ++i) {
            std::vector<BigInt> c;
            for (std::size_t j = 0; j < d; ++j) c.emplace_back(coord(rng));
            pts.emplace_back(std::move(c));
        }
        if (affine_rank(pts) != d) continue;
        auto vs = hull_vertices(pts);
        EXPECT_EQ(lattice_points_by_fibers(vs), lattice_points_bruteforce(CellPolytope(vs)));
        ++done;
    }
}

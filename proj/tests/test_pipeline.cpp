#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "sylv/pipeline.hpp"

using namespace sylv;

namespace {

// one shared pipeline so each level is built once per test binary
Pipeline& shared()
{
    static Pipeline p;
    return p;
}

std::string serialized(const PipelineArtifact& a)
{
    std::ostringstream os;
    save(a, os);
    return os.str();
}

BigInt oracle_nvol(const FamilySpec& spec) { return oracle::simplex_volume(build(spec).vertices()); }

std::size_t cells_containing(const Triangulation& t, const LatticePoint& p)
{
    auto id = t.store().find(p);
    if (!id) return 0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < t.cells().size(); ++c) {
        auto span = t.cells()[c];
        if (std::binary_search(span.begin(), span.end(), *id)) ++count;
    }
    return count;
}

void expect_certified(const PipelineArtifact& a)
{
    auto c = check_artifact(a);
    EXPECT_TRUE(c.structure.valid) << to_string(a.spec.family) << " " << a.spec.n;
    EXPECT_TRUE(c.structure.simplicial);
    EXPECT_TRUE(c.structure.unimodular);
    EXPECT_TRUE(c.volume_matches);
    EXPECT_TRUE(c.regularity.regular);
    EXPECT_EQ(c.regularity.mode, "full");
}

} // namespace

TEST(DualPipeline, BaseSegment)
{
    const auto& a = shared().p2dual(1);
    EXPECT_EQ(a.triangulation.cells().size(), 2u);
    EXPECT_EQ(a.triangulation.cell_point_sets(), (std::set<std::vector<LatticePoint>>{{{-1}, {0}}, {{0}, {1}}}));
    EXPECT_EQ(a.witness.values, (std::vector<BigRat>{BigRat(1), BigRat(0), BigRat(1)}));
}

TEST(DualPipeline, CellCountsEqualNormalizedVolume)
{
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto& a = shared().p2dual(n);
        EXPECT_EQ(BigInt(a.triangulation.cells().size()), oracle_nvol({Family::P2dual, n})) << "n=" << n;
    }
    EXPECT_EQ(shared().p2dual(2).triangulation.cells().size(), 6u);
    EXPECT_EQ(shared().p2dual(3).triangulation.cells().size(), 42u);
    EXPECT_EQ(shared().p2dual(4).triangulation.cells().size(), 1806u);
}

TEST(DualPipeline, CertifiedAtEveryLevel)
{
    for (std::size_t n = 1; n <= 4; ++n) expect_certified(shared().p2dual(n));
}

TEST(DualPipeline, UsesEveryLatticePoint)
{
    for (std::size_t n = 1; n <= 3; ++n) {
        const auto& a = shared().p2dual(n);
        auto pts = lattice_points_bruteforce(build({Family::P2dual, n}));
        std::sort(pts.begin(), pts.end());
        EXPECT_EQ(a.triangulation.store().points(), pts) << "n=" << n;
    }
    EXPECT_EQ(shared().p2dual(4).triangulation.store().size(), 353u);
}

TEST(DualPipeline, ApexCellsOnePerCellOfTheLevelBelow)
{
    for (std::size_t n = 1; n <= 3; ++n) {
        LatticePoint z(std::vector<BigInt>(n + 1, BigInt(-1)));
        z[n] = sylvester(n) - 1;
        EXPECT_EQ(cells_containing(shared().p2dual(n + 1).triangulation, z), shared().p2dual(n).triangulation.cells().size())
            << "n=" << n;
    }
}

TEST(DualPipeline, ExtendsTheLevelBelow)
{
    for (std::size_t n = 1; n <= 3; ++n) {
        HalfSpace bottom;
        bottom.normal.assign(n + 1, BigRat(0));
        bottom.normal[n] = 1;
        bottom.offset = 1;
        auto face = restrict_to_hyperplane(shared().p2dual(n + 1).triangulation, bottom);
        auto lifted = embed(shared().p2dual(n).triangulation, BigInt(-1)).subdivision;
        EXPECT_EQ(face.cell_point_sets(), lifted.cell_point_sets()) << "n=" << n;
    }
}

TEST(DualPipeline, ProvenanceRecordsConstruction)
{
    const auto& prov = shared().p2dual(3).provenance;
    std::vector<std::string> kinds;
    for (const auto& s : prov) kinds.push_back(s.at("step").get<std::string>());
    std::vector<std::string> level{"column-pullback", "slanted-restriction", "apex-cone", "glue", "pull-all", "verify"};
    std::vector<std::string> expect{"segment-base", "verify"};
    for (int i = 0; i < 2; ++i) expect.insert(expect.end(), level.begin(), level.end());
    EXPECT_EQ(kinds, expect);
    // level two: apex (-1, 2), omega one above the larger column extension
    EXPECT_EQ(prov[5].at("apex"), Json::array({"-1", "2"}));
    EXPECT_EQ(prov[5].at("omega"), "2");
    EXPECT_EQ(prov[6].at("exponents").size(), 7u);
}

TEST(DualToPrimal, TransportLevelTwo)
{
    auto a = shared().p2(2);
    EXPECT_EQ(a.triangulation.cells().size(), 6u);
    expect_certified(a);
    auto vs = build({Family::P2, 2}).vertices();
    EXPECT_EQ(vs.back(), LatticePoint({-3, -2}));
    std::vector<LatticePoint> sorted_vs(vs.begin(), vs.end());
    std::sort(sorted_vs.begin(), sorted_vs.end());
    EXPECT_EQ(a.triangulation.ambient(), sorted_vs);
    EXPECT_EQ(duality_map(2).apply_inverse({-1, -1}), w2(2));
    for (const auto& p : a.triangulation.store().points())
        EXPECT_NE(HRep(vs).classify(p), Membership::outside) << p;
}

TEST(DualToPrimal, TransportPreservesCellsAndWitness)
{
    for (std::size_t n = 1; n <= 4; ++n) {
        auto a = shared().p2(n);
        const auto& dual = shared().p2dual(n);
        auto t = duality_map(n);
        std::set<std::vector<LatticePoint>> mapped;
        for (const auto& cell : dual.triangulation.cell_point_sets()) {
            std::vector<LatticePoint> img;
            for (const auto& p : cell) img.push_back(t.apply_inverse(p));
            std::sort(img.begin(), img.end());
            mapped.insert(img);
        }
        EXPECT_EQ(a.triangulation.cell_point_sets(), mapped);
        for (PointId i = 0; i < dual.triangulation.store().size(); ++i) {
            auto j = a.triangulation.store().at(t.apply_inverse(dual.triangulation.store()[i]));
            EXPECT_EQ(a.witness[j], dual.witness[i]);
        }
        expect_certified(a);
    }
}

TEST(PrimalExtension, CellCounts)
{
    EXPECT_EQ(shared().p1(1).triangulation.cells().size(), 2u);
    EXPECT_EQ(shared().p1(2).triangulation.cells().size(), 4u);
    EXPECT_EQ(shared().p1(3).triangulation.cells().size(), 12u);
    EXPECT_EQ(shared().p1(4).triangulation.cells().size(), 84u);
    for (std::size_t n = 1; n <= 5; ++n)
        EXPECT_EQ(BigInt(shared().p1(n).triangulation.cells().size()), oracle_nvol({Family::P1, n})) << "n=" << n;
}

TEST(PrimalExtension, EveryCellHasExactlyOneApex)
{
    for (std::size_t m = 1; m <= 4; ++m) {
        auto a = shared().p1(m);
        const auto& t = a.triangulation;
        const auto e = t.store().at(LatticePoint::unit(m, m - 1));
        const auto v = t.store().at(w1(m));
        for (std::size_t c = 0; c < t.cells().size(); ++c) {
            auto span = t.cells()[c];
            bool has_e = std::binary_search(span.begin(), span.end(), e);
            bool has_v = std::binary_search(span.begin(), span.end(), v);
            EXPECT_NE(has_e, has_v) << "m=" << m << " cell " << c;
        }
        expect_certified(a);
    }
}

TEST(PrimalExtension, UsesEveryLatticePoint)
{
    for (std::size_t m = 1; m <= 4; ++m) {
        auto pts = lattice_points_P1(m);
        EXPECT_EQ(shared().p1(m).triangulation.store().points(), pts) << "m=" << m;
    }
    auto brute = lattice_points_bruteforce(build({Family::P1, 3}));
    std::sort(brute.begin(), brute.end());
    EXPECT_EQ(shared().p1(3).triangulation.store().points(), brute);
}

TEST(PrimalExtension, FreeConeValueZero)
{
    auto a = shared().p1(3);
    EXPECT_EQ(a.witness[a.triangulation.store().at({0, 0, 1})], 0);
}

TEST(Artifact, RoundTrip)
{
    for (auto spec : {FamilySpec{Family::P2dual, 3}, FamilySpec{Family::P2, 3}, FamilySpec{Family::P1, 3}}) {
        auto a = shared().get(spec);
        std::istringstream is(serialized(a));
        auto b = load(is);
        EXPECT_TRUE(a == b) << to_string(spec.family);
        EXPECT_EQ(serialized(b), serialized(a));
    }
}

TEST(Artifact, DeterministicBytes)
{
    Pipeline other;
    EXPECT_EQ(serialized(other.p2dual(4)), serialized(shared().p2dual(4)));
    EXPECT_EQ(serialized(other.p1(3)), serialized(shared().p1(3)));
}

TEST(Artifact, TamperedCellIndexRejected)
{
    auto text = serialized(shared().p2dual(2));
    auto pos = text.find("\"cells\":[\n[");
    ASSERT_NE(pos, std::string::npos);
    pos += std::string("\"cells\":[\n[").size();
    text.replace(pos, 1, "99");
    std::istringstream is(text);
    try {
        load(is);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("refers to point 99"), std::string::npos) << e.what();
    }
}

TEST(Artifact, VersionMismatchRejected)
{
    auto text = serialized(shared().p2dual(2));
    text.replace(text.find("\"version\":1"), 11, "\"version\":7");
    std::istringstream is(text);
    EXPECT_THROW(load(is), UnsupportedVersionError);
}

TEST(Artifact, MalformedJsonReportsPosition)
{
    std::istringstream is("{\"version\":1,\"family\":\"p2dual\",\"n\":1,\"points\":[[\"-1\"],");
    try {
        load(is);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
    }
}

TEST(Artifact, WitnessLengthChecked)
{
    auto text = serialized(shared().p2dual(1));
    text.replace(text.find("\"witness\":[\"1\","), 15, "\"witness\":[");
    std::istringstream is(text);
    EXPECT_THROW(load(is), ParseError);
}

TEST(Artifact, CacheDirectoryReused)
{
    auto dir = std::filesystem::temp_directory_path() / "sylv_pipeline_cache_test";
    std::filesystem::remove_all(dir);
    PipelineOptions opt;
    opt.cache_dir = dir;
    std::vector<std::string> messages;
    opt.log = [&](const std::string& m) { messages.push_back(m); };
    auto first = Pipeline(opt).p1(3);
    EXPECT_TRUE(std::filesystem::exists(dir / "p2dual_2.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "p2_2.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "p1_3.json"));
    messages.clear();
    auto second = Pipeline(opt).p1(3);
    EXPECT_TRUE(first == second);
    ASSERT_FALSE(messages.empty());
    EXPECT_NE(messages.front().find("reusing"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Replay, ReproducesArtifacts)
{
    for (auto spec : {FamilySpec{Family::P2dual, 4}, FamilySpec{Family::P2, 3}, FamilySpec{Family::P1, 4},
                      FamilySpec{Family::P1, 1}}) {
        auto a = shared().get(spec);
        auto b = replay(a.provenance);
        EXPECT_TRUE(a == b) << to_string(spec.family) << " " << spec.n;
    }
}

TEST(Replay, TamperedExponentFailsTheLocalCheck)
{
    auto prov = shared().p2dual(3).provenance;
    bool changed = false;
    for (auto& s : prov) {
        if (s.at("step") != "pull-all") continue;
        for (auto& k : s.at("exponents"))
            if (k.get<unsigned>() > 2) {
                k = 0;
                changed = true;
            }
    }
    ASSERT_TRUE(changed);
    EXPECT_THROW(replay(prov), VerificationError);
}

TEST(Replay, OmegaBelowTheMaximumFails)
{
    auto prov = shared().p2dual(2).provenance;
    for (auto& s : prov)
        if (s.at("step") == "glue") s["omega"] = "1";
    EXPECT_THROW(replay(prov), VerificationError);
}

TEST(Feasibility, BoundsEnforced)
{
    EXPECT_THROW(Pipeline().p2dual(6), FeasibilityError);
    EXPECT_THROW(Pipeline().p1(7), FeasibilityError);
    PipelineOptions small;
    small.max_cells = 100;
    EXPECT_THROW(Pipeline(small).p2dual(4), FeasibilityError);
    EXPECT_THROW(Pipeline().p2dual(0), DomainError);
}

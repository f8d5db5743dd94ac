#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sylv/error.hpp"
#include "sylv/regularity.hpp"
#include "sylv/subdivision.hpp"
#include "sylv/sylvester.hpp"

namespace sylv {

using Json = nlohmann::ordered_json;

inline constexpr int artifact_version = 1;
inline constexpr std::uint64_t default_max_cells = 5'000'000;

/// A certified triangulation together with its witness and the log of the
/// construction steps that produced it.
struct PipelineArtifact {
    FamilySpec spec;
    Triangulation triangulation;
    RegularityWitness witness;
    Json provenance = Json::array();

    friend bool operator==(const PipelineArtifact& a, const PipelineArtifact& b)
    {
        return a.spec == b.spec && static_cast<const Subdivision&>(a.triangulation) == b.triangulation &&
               a.witness == b.witness && a.provenance == b.provenance;
    }
};

struct PipelineOptions {
    std::optional<std::filesystem::path> cache_dir;
    unsigned threads = 0;
    bool verify = true;
    std::size_t max_n = default_max_family_n;
    std::uint64_t max_cells = default_max_cells;
    std::function<void(const std::string&)> log;
};

/// Number of maximal cells a unimodular triangulation of the family member has.
inline BigInt expected_cells(const FamilySpec& spec)
{
    if (spec.family == Family::P1) return spec.n == 1 ? BigInt(2) : BigInt(2 * (sylvester(spec.n - 1) - 1));
    return sylvester(spec.n) - 1;
}

/// Full (cell x point) regularity checks are used while their pair count stays
/// below this; above it the local+sampled mode is used (P2dual(5) and beyond).
inline constexpr std::uint64_t full_check_pair_limit = 500'000'000;

struct ArtifactCheck {
    VerifyReport structure;
    CertificateReport regularity;
    bool volume_matches = false;  // cell count equals the normalized volume
    bool ok() const
    {
        return structure.valid && structure.simplicial && structure.unimodular && regularity.regular && volume_matches;
    }
};

inline ArtifactCheck check_artifact(const PipelineArtifact& a, unsigned threads = 0)
{
    ArtifactCheck c;
    VerifyOptions vo;
    vo.threads = threads;
    c.structure = verify(a.triangulation, vo);
    RegularityOptions ro;
    ro.threads = threads;
    const std::uint64_t pairs = std::uint64_t(a.triangulation.cells().size()) * a.triangulation.store().size();
    ro.mode = pairs <= full_check_pair_limit ? RegularityMode::full : RegularityMode::local;
    c.regularity = verify_regularity(a.triangulation, a.witness, ro);
    c.volume_matches = BigInt(a.triangulation.cells().size()) == c.structure.ambient_volume;
    return c;
}

namespace detail {

inline Json point_json(const LatticePoint& p)
{
    Json a = Json::array();
    for (const auto& c : p) a.push_back(c.str());
    return a;
}

inline void note(const PipelineOptions& opt, const std::string& msg)
{
    if (opt.log) opt.log(msg);
}

inline std::string describe_failure(const PipelineArtifact& a, const ArtifactCheck& c)
{
    std::ostringstream os;
    os << to_string(a.spec.family) << " n=" << a.spec.n << " failed verification:";
    if (!c.structure.valid) os << " invalid subdivision";
    if (!c.structure.simplicial) os << " non-simplicial";
    if (!c.structure.unimodular) os << " non-unimodular";
    if (!c.volume_matches) os << " cell count != normalized volume";
    if (!c.regularity.regular) os << " witness violations=" << c.regularity.violations.size();
    for (const auto& r : c.structure.reasons) os << "; " << r;
    os << "; provenance: " << a.provenance.dump();
    return os.str();
}

inline void certify(const PipelineArtifact& a, const PipelineOptions& opt)
{
    if (!opt.verify) return;
    auto t0 = std::chrono::steady_clock::now();
    auto c = check_artifact(a, opt.threads);
    if (!c.ok()) throw VerificationError(describe_failure(a, c));
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    note(opt, to_string(a.spec.family) + " n=" + std::to_string(a.spec.n) + ": verified (" + c.regularity.mode + ") in " +
                 std::to_string(ms) + " ms");
}

inline Json verify_step(const PipelineArtifact& a)
{
    const std::uint64_t pairs = std::uint64_t(a.triangulation.cells().size()) * a.triangulation.store().size();
    return Json{{"step", "verify"},
                {"structure", "simplicial-unimodular"},
                {"regularity", pairs <= full_check_pair_limit ? "full" : "local+sampled"}};
}

/// P2dual(1) = [-1, 1] cut at 0, witness (1, 0, 1).
inline PipelineArtifact p2dual_base()
{
    PipelineArtifact a;
    a.spec = {Family::P2dual, 1};
    PointStore store({{-1}, {0}, {1}});
    a.triangulation = Triangulation(Subdivision(store, {{-1}, {1}}, CellList{{0, 1}, {1, 2}}));
    a.witness.values = {BigRat(1), BigRat(0), BigRat(1)};
    a.provenance.push_back(Json{{"step", "segment-base"}, {"n", 1}, {"cells", 2}, {"witness", {"1", "0", "1"}}});
    a.provenance.push_back(verify_step(a));
    return a;
}

/// Values recorded by an earlier run; replaying with them must pass every check.
struct Recorded {
    std::optional<BigRat> omega;
    std::optional<std::vector<unsigned>> exponents;
};

/// Level n -> n+1: columns over the level-n triangulation up to the slanted
/// hyperplane, the cone from (-1, ..., -1, s_n - 1) over the slanted top,
/// glued, then pulled at every lattice point in lexicographic order.
inline PipelineArtifact p2dual_step(const PipelineArtifact& prev, const PipelineOptions& opt, const Recorded& rec = {})
{
    const std::size_t n = prev.spec.n, m = n + 1;
    auto clock = std::chrono::steady_clock::now();
    auto lap = [&](const std::string& what) {
        auto now = std::chrono::steady_clock::now();
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - clock).count();
        clock = now;
        note(opt, "p2dual n=" + std::to_string(m) + ": " + what + " (" + std::to_string(ms) + " ms)");
    };

    PipelineArtifact a;
    a.spec = {Family::P2dual, m};
    a.provenance = prev.provenance;

    const BigInt top_value = sylvester(n) - 1;
    std::vector<BigRat> coeff;
    Json coeff_json = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
        coeff.emplace_back(-(top_value / sylvester(i)));
        coeff_json.push_back(to_string(coeff.back()));
    }
    auto lower = pullback_restricted(prev.triangulation, {BigInt(-1), AffineFunctional(coeff, BigRat(0))});
    auto lower_w = witness_pullback(prev.witness, prev.triangulation.store(), lower.store());
    a.provenance.push_back(Json{{"step", "column-pullback"},
                                {"n", m},
                                {"bottom", "-1"},
                                {"top_coefficients", coeff_json},
                                {"cells", lower.cells().size()}});
    lap("column pullback, " + std::to_string(lower.cells().size()) + " cells");

    HalfSpace slanted;
    for (const auto& c : coeff) slanted.normal.push_back(-c);
    slanted.normal.emplace_back(1);
    slanted.offset = 0;
    auto top = restrict_to_hyperplane(lower, slanted);
    a.provenance.push_back(Json{{"step", "slanted-restriction"}, {"cells", top.cells().size()}});

    LatticePoint z(std::vector<BigInt>(m, BigInt(-1)));
    z[n] = top_value;
    auto cone = cone_subdivision(z, top);
    a.provenance.push_back(Json{{"step", "apex-cone"}, {"apex", point_json(z)}, {"cells", cone.cells().size()}});

    auto glued = glue(lower, cone);
    RegularityWitness w;
    BigRat omega;
    if (rec.omega) {
        omega = *rec.omega;
        w = witness_cone(lower_w, lower.store(), glued.store(), z, omega);
    } else {
        std::tie(w, omega) = witness_glue(lower_w, lower, glued.store(), z);
    }
    a.provenance.push_back(Json{{"step", "glue"},
                                {"apex", point_json(z)},
                                {"omega", to_string(omega)},
                                {"cells", glued.cells().size()},
                                {"points", glued.store().size()}});
    lap("glued, " + std::to_string(glued.cells().size()) + " cells over " + std::to_string(glued.store().size()) +
        " points");

    const std::size_t np = glued.store().size();
    if (rec.exponents && rec.exponents->size() != np)
        throw VerificationError("replay: recorded pull exponents do not match the point store");
    WitnessedPulling wp(glued, std::move(w));
    std::vector<unsigned> exps;
    exps.reserve(np);
    for (std::size_t i = 0; i < np; ++i) {
        const auto id = static_cast<PointId>(i);
        exps.push_back(rec.exponents ? wp.pull(id, (*rec.exponents)[i]) : wp.pull(id));
        if (opt.log && np >= 20000 && (i + 1) % 20000 == 0)
            note(opt, "p2dual n=" + std::to_string(m) + ": pulled " + std::to_string(i + 1) + "/" + std::to_string(np) +
                         ", " + std::to_string(wp.engine().live_cells()) + " cells");
    }
    a.triangulation = Triangulation(wp.result());
    a.witness = wp.witness();
    a.provenance.push_back(Json{{"step", "pull-all"},
                                {"order", "lexicographic"},
                                {"epsilon", "2^-k"},
                                {"exponents", exps},
                                {"cells", a.triangulation.cells().size()}});
    lap("pulled, " + std::to_string(a.triangulation.cells().size()) + " cells");

    // z lies in exactly one cell per cell of the slanted top
    std::size_t apex_cells = 0;
    const PointId zid = a.triangulation.store().at(z);
    for (std::size_t c = 0; c < a.triangulation.cells().size(); ++c) {
        auto span = a.triangulation.cells()[c];
        if (std::binary_search(span.begin(), span.end(), zid)) ++apex_cells;
    }
    if (apex_cells != top.cells().size())
        throw VerificationError("p2dual n=" + std::to_string(m) + ": apex lies in " + std::to_string(apex_cells) +
                                " cells, expected " + std::to_string(top.cells().size()));
    a.provenance.push_back(verify_step(a));
    return a;
}

inline PipelineArtifact transport_to_p2(const PipelineArtifact& dual)
{
    const std::size_t n = dual.spec.n;
    DualityMap t(n);
    LatticeMap map{t.inverse_matrix(), LatticePoint::zero(n)};
    auto mapped = apply_lattice_map(dual.triangulation, map);
    PipelineArtifact a;
    a.spec = {Family::P2, n};
    a.triangulation = Triangulation(std::move(mapped.subdivision));
    a.witness.values.resize(dual.witness.size());
    for (std::size_t i = 0; i < mapped.index_map.size(); ++i) a.witness[mapped.index_map[i]] = dual.witness[static_cast<PointId>(i)];
    a.provenance = dual.provenance;
    a.provenance.push_back(Json{{"step", "duality-transport"}, {"n", n}, {"map", "inverse of the duality matrix"}});
    a.provenance.push_back(verify_step(a));
    return a;
}

/// P1(n+1): P2(n) placed at x_n = 0, coned from e_n (free value 0) and from w1
/// (value one above every extension), glued along P2(n) x {0}.
inline PipelineArtifact extend_to_p1(const PipelineArtifact& p2, const Recorded& rec = {})
{
    const std::size_t n = p2.spec.n, m = n + 1;
    PipelineArtifact a;
    a.spec = {Family::P1, m};
    a.provenance = p2.provenance;

    auto emb = embed(p2.triangulation, BigInt(0));
    RegularityWitness ew;
    ew.values.resize(p2.witness.size());
    for (std::size_t i = 0; i < emb.index_map.size(); ++i) ew[emb.index_map[i]] = p2.witness[static_cast<PointId>(i)];
    a.provenance.push_back(Json{{"step", "embed"}, {"height", "0"}, {"cells", emb.subdivision.cells().size()}});

    const LatticePoint e = LatticePoint::unit(m, n), v = w1(m);
    auto minus = cone_subdivision(e, emb.subdivision);
    auto minus_w = witness_cone(ew, emb.subdivision.store(), minus.store(), e, BigRat(0));
    a.provenance.push_back(Json{{"step", "apex-cone"}, {"apex", point_json(e)}, {"omega", "0"}, {"cells", minus.cells().size()}});

    auto plus = cone_subdivision(v, emb.subdivision);
    auto glued = glue(minus, plus);
    RegularityWitness w;
    BigRat omega;
    if (rec.omega) {
        omega = *rec.omega;
        w = witness_cone(minus_w, minus.store(), glued.store(), v, omega);
    } else {
        std::tie(w, omega) = witness_glue(minus_w, minus, glued.store(), v);
    }
    a.provenance.push_back(Json{{"step", "glue"}, {"apex", point_json(v)}, {"omega", to_string(omega)}, {"cells", glued.cells().size()}});
    a.triangulation = Triangulation(std::move(glued));
    a.witness = std::move(w);
    a.provenance.push_back(verify_step(a));
    return a;
}

/// P1(1) = [-1, 1]: the cones from 1 and from w1(1) = -1 over the point 0.
inline PipelineArtifact p1_base(const Recorded& rec = {})
{
    PipelineArtifact a;
    a.spec = {Family::P1, 1};
    PointStore minus_store({{0}, {1}});
    Subdivision minus(minus_store, {{0}, {1}}, CellList{{0, 1}});
    RegularityWitness minus_w;
    minus_w.values = {BigRat(0), BigRat(0)};
    a.provenance.push_back(Json{{"step", "apex-cone"}, {"apex", {"1"}}, {"omega", "0"}, {"cells", 1}});
    PointStore plus_store({{-1}, {0}});
    Subdivision plus(plus_store, {{-1}, {0}}, CellList{{0, 1}});
    auto glued = glue(minus, plus);
    RegularityWitness w;
    BigRat omega;
    if (rec.omega) {
        omega = *rec.omega;
        w = witness_cone(minus_w, minus.store(), glued.store(), {-1}, omega);
    } else {
        std::tie(w, omega) = witness_glue(minus_w, minus, glued.store(), {-1});
    }
    a.provenance.push_back(Json{{"step", "glue"}, {"apex", {"-1"}}, {"omega", to_string(omega)}, {"cells", 2}});
    a.triangulation = Triangulation(std::move(glued));
    a.witness = std::move(w);
    a.provenance.push_back(verify_step(a));
    return a;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Serialization

inline std::filesystem::path artifact_path(const std::filesystem::path& dir, const FamilySpec& spec)
{
    return dir / (to_string(spec.family) + "_" + std::to_string(spec.n) + ".json");
}

/// Streams the artifact as JSON; integers and rationals are decimal strings.
inline void save(const PipelineArtifact& a, std::ostream& os)
{
    const auto& t = a.triangulation;
    os << "{\"version\":" << artifact_version << ",\"family\":\"" << to_string(a.spec.family) << "\",\"n\":" << a.spec.n;
    os << ",\n\"points\":[";
    for (std::size_t i = 0; i < t.store().size(); ++i) {
        os << (i ? ",\n[" : "\n[");
        const auto& p = t.store()[static_cast<PointId>(i)];
        for (std::size_t k = 0; k < p.dim(); ++k) os << (k ? ",\"" : "\"") << p[k] << '"';
        os << ']';
    }
    os << "],\n\"cells\":[";
    for (std::size_t c = 0; c < t.cells().size(); ++c) {
        os << (c ? ",\n[" : "\n[");
        auto span = t.cells()[c];
        for (std::size_t k = 0; k < span.size(); ++k) os << (k ? "," : "") << span[k];
        os << ']';
    }
    os << "],\n\"witness\":[";
    for (std::size_t i = 0; i < a.witness.size(); ++i) os << (i ? ",\"" : "\"") << to_string(a.witness.values[i]) << '"';
    os << "],\n\"provenance\":" << a.provenance.dump() << "}\n";
    if (!os) throw std::runtime_error("artifact: write failed");
}

inline void save(const PipelineArtifact& a, const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("artifact: cannot open " + tmp.string() + " for writing");
        save(a, os);
    }
    std::filesystem::rename(tmp, path);
}

namespace detail {

/// SAX reader for the artifact layout: point, cell and witness arrays are
/// filled in place; the provenance subtree is built as a JSON value.
class ArtifactReader : public nlohmann::json_sax<Json> {
public:
    std::optional<long long> version;
    std::string family;
    std::optional<std::size_t> n;
    std::vector<LatticePoint> points;
    std::vector<std::vector<PointId>> cells;
    std::vector<BigRat> witness;
    Json provenance;
    bool have_provenance = false;

    bool null() override { return value(Json()); }
    bool boolean(bool v) override { return value(Json(v)); }
    bool number_integer(number_integer_t v) override { return integer(v); }
    bool number_unsigned(number_unsigned_t v) override
    {
        if (in("cells") && depth_ == 3) {
            if (v > UINT32_MAX) fail("cell index too large");
            cells.back().push_back(static_cast<PointId>(v));
            return true;
        }
        if (depth_ == 1 && key_ == "version") return version = static_cast<long long>(v), true;
        if (depth_ == 1 && key_ == "n") return n = static_cast<std::size_t>(v), true;
        return value(Json(v));
    }
    bool number_float(number_float_t v, const string_t&) override
    {
        if (in("provenance")) return value(Json(v));
        fail("unexpected floating-point number");
        return false;
    }
    bool string(string_t& s) override
    {
        if (in("points") && depth_ == 3) {
            coords_.push_back(parse_bigint(s));
            return true;
        }
        if (in("witness") && depth_ == 2) {
            witness.push_back(parse_bigrat(s));
            return true;
        }
        if (depth_ == 1 && key_ == "family") return family = s, true;
        return value(Json(s));
    }
    bool binary(binary_t&) override
    {
        fail("binary values are not supported");
        return false;
    }
    bool start_object(std::size_t) override
    {
        if (depth_ == 0) {
            ++depth_;
            return true;
        }
        if (!in("provenance")) fail("unexpected object under '" + key_ + "'");
        open(Json::object());
        ++depth_;
        return true;
    }
    bool key(string_t& k) override
    {
        if (depth_ == 1) {
            key_ = k;
            return true;
        }
        pending_key_ = k;
        return true;
    }
    bool end_object() override
    {
        --depth_;
        if (depth_ > 0) stack_.pop_back();
        return true;
    }
    bool start_array(std::size_t) override
    {
        if (depth_ == 1 && key_ == "provenance") {
            provenance = Json::array();
            have_provenance = true;
            stack_.push_back(&provenance);
        } else if (in("provenance")) {
            open(Json::array());
        } else if (depth_ == 2 && key_ == "points") {
            coords_.clear();
        } else if (depth_ == 2 && key_ == "cells") {
            cells.emplace_back();
        } else if (!(depth_ == 1 && (key_ == "points" || key_ == "cells" || key_ == "witness"))) {
            fail("unexpected array under '" + key_ + "'");
        }
        ++depth_;
        return true;
    }
    bool end_array() override
    {
        --depth_;
        if (in("provenance")) {
            stack_.pop_back();
        } else if (depth_ == 2 && key_ == "points") {
            points.emplace_back(std::move(coords_));
            coords_ = {};
        }
        return true;
    }
    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) override
    {
        throw ParseError("artifact: byte " + std::to_string(position) + ": " + ex.what());
    }

private:
    bool in(const char* k) const { return depth_ >= 2 && key_ == k; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("artifact: " + msg); }

    bool integer(long long v)
    {
        if (in("cells")) fail("negative cell index");
        if (depth_ == 1 && key_ == "version") return version = v, true;
        if (depth_ == 1 && key_ == "n") fail("negative n");
        return value(Json(v));
    }

    bool value(Json v)
    {
        if (!in("provenance") || stack_.empty()) {
            if (depth_ == 1) return true;  // unknown top-level scalar: ignored
            fail("unexpected value under '" + key_ + "'");
        }
        auto& top = *stack_.back();
        if (top.is_array()) top.push_back(std::move(v));
        else top[pending_key_] = std::move(v);
        return true;
    }

    void open(Json container)
    {
        if (stack_.empty()) fail("malformed provenance");
        auto& top = *stack_.back();
        if (top.is_array()) {
            top.push_back(std::move(container));
            stack_.push_back(&top.back());
        } else {
            auto& slot = top[pending_key_];
            slot = std::move(container);
            stack_.push_back(&slot);
        }
    }

    int depth_ = 0;
    std::string key_;
    std::string pending_key_;
    std::vector<BigInt> coords_;
    std::vector<Json*> stack_;
};

} // namespace detail

/// Reads and validates an artifact: version, family, dimensions, index ranges,
/// simplex sizes and witness length. Geometry is checked by check_artifact.
inline PipelineArtifact load(std::istream& is, const std::string& name = "artifact")
{
    detail::ArtifactReader r;
    try {
        Json::sax_parse(is, &r);
    } catch (const ParseError& e) {
        throw ParseError(name + ": " + e.what());
    }
    if (!r.version) throw ParseError(name + ": missing version");
    if (*r.version != artifact_version)
        throw UnsupportedVersionError(name + ": unsupported artifact version " + std::to_string(*r.version) +
                                      " (this build reads version " + std::to_string(artifact_version) + ")");
    if (!r.n) throw ParseError(name + ": missing n");
    PipelineArtifact a;
    a.spec.family = parse_family(r.family);
    a.spec.n = *r.n;
    if (a.spec.n < 1) throw ParseError(name + ": n must be at least 1");
    const std::size_t d = a.spec.n;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        if (r.points[i].dim() != d)
            throw ParseError(name + ": point " + std::to_string(i) + " has dimension " + std::to_string(r.points[i].dim()));
        if (i && !(r.points[i - 1] < r.points[i]))
            throw ParseError(name + ": points are not strictly increasing at index " + std::to_string(i));
    }
    CellList cells;
    cells.reserve(r.cells.size(), r.cells.size() * (d + 1));
    for (std::size_t c = 0; c < r.cells.size(); ++c) {
        const auto& cell = r.cells[c];
        if (cell.size() != d + 1)
            throw ParseError(name + ": cell " + std::to_string(c) + " has " + std::to_string(cell.size()) + " vertices");
        for (auto id : cell)
            if (id >= r.points.size())
                throw ParseError(name + ": cell " + std::to_string(c) + " refers to point " + std::to_string(id) +
                                 " but there are " + std::to_string(r.points.size()));
        for (std::size_t k = 1; k < cell.size(); ++k)
            if (cell[k - 1] >= cell[k]) throw ParseError(name + ": cell " + std::to_string(c) + " is not sorted");
        cells.push_back(cell);
    }
    if (r.witness.size() != r.points.size())
        throw ParseError(name + ": witness has " + std::to_string(r.witness.size()) + " values for " +
                         std::to_string(r.points.size()) + " points");
    if (!r.have_provenance) throw ParseError(name + ": missing provenance");
    auto ambient = build(a.spec).vertices();
    try {
        a.triangulation = Triangulation(Subdivision(PointStore(std::move(r.points)), std::move(ambient), std::move(cells)));
    } catch (const std::exception& e) {
        throw ParseError(name + ": " + e.what());
    }
    a.witness.values = std::move(r.witness);
    a.provenance = std::move(r.provenance);
    return a;
}

inline PipelineArtifact load(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open artifact " + path.string());
    return load(is, path.string());
}

// ---------------------------------------------------------------------------
// Orchestration

/// Builds family members level by level, keeping P2dual levels in memory and,
/// when a cache directory is set, on disk. Cached artifacts are certified
/// again on load unless verification is off.
class Pipeline {
public:
    explicit Pipeline(PipelineOptions opt = {}) : opt_(std::move(opt)) {}

    const PipelineOptions& options() const { return opt_; }

    const PipelineArtifact& p2dual(std::size_t n)
    {
        FamilySpec spec{Family::P2dual, n};
        admit(spec);
        if (auto it = dual_.find(n); it != dual_.end()) return it->second;
        PipelineArtifact a;
        if (auto cached = from_cache(spec)) {
            a = std::move(*cached);
        } else if (n == 1) {
            a = detail::p2dual_base();
            detail::certify(a, opt_);
            to_cache(a);
        } else {
            const auto& prev = p2dual(n - 1);
            a = detail::p2dual_step(prev, opt_);
            detail::certify(a, opt_);
            to_cache(a);
        }
        return dual_.emplace(n, std::move(a)).first->second;
    }

    PipelineArtifact p2(std::size_t n)
    {
        FamilySpec spec{Family::P2, n};
        admit(spec);
        if (auto cached = from_cache(spec)) return std::move(*cached);
        auto a = detail::transport_to_p2(p2dual(n));
        detail::certify(a, opt_);
        to_cache(a);
        return a;
    }

    PipelineArtifact p1(std::size_t n_plus_1)
    {
        FamilySpec spec{Family::P1, n_plus_1};
        admit(spec);
        if (auto cached = from_cache(spec)) return std::move(*cached);
        auto a = n_plus_1 == 1 ? detail::p1_base() : detail::extend_to_p1(p2(n_plus_1 - 1));
        detail::certify(a, opt_);
        to_cache(a);
        return a;
    }

    PipelineArtifact get(const FamilySpec& spec)
    {
        switch (spec.family) {
        case Family::P2dual: return p2dual(spec.n);
        case Family::P2: return p2(spec.n);
        case Family::P1: return p1(spec.n);
        }
        throw DomainError("unknown family");
    }

private:
    void admit(const FamilySpec& spec) const
    {
        spec.validate(opt_.max_n);
        BigInt cells = expected_cells(spec);
        if (cells > opt_.max_cells)
            throw FeasibilityError(to_string(spec.family) + " n=" + std::to_string(spec.n) + " needs " + cells.str() +
                                   " cells, above the limit of " + std::to_string(opt_.max_cells));
    }

    std::optional<PipelineArtifact> from_cache(const FamilySpec& spec) const
    {
        if (!opt_.cache_dir) return std::nullopt;
        auto path = artifact_path(*opt_.cache_dir, spec);
        if (!std::filesystem::exists(path)) return std::nullopt;
        try {
            auto a = load(path);
            if (!(a.spec == spec)) return std::nullopt;
            detail::note(opt_, "reusing " + path.string());
            detail::certify(a, opt_);
            return a;
        } catch (const ParseError& e) {
            detail::note(opt_, "ignoring cached " + path.string() + ": " + e.what());
            return std::nullopt;
        }
    }

    void to_cache(const PipelineArtifact& a) const
    {
        if (!opt_.cache_dir) return;
        auto path = artifact_path(*opt_.cache_dir, a.spec);
        save(a, path);
        detail::note(opt_, "wrote " + path.string());
    }

    PipelineOptions opt_;
    std::map<std::size_t, PipelineArtifact> dual_;
};

inline PipelineArtifact triangulate_p2dual(std::size_t n, PipelineOptions opt = {}) { return Pipeline(std::move(opt)).p2dual(n); }
inline PipelineArtifact triangulate_p2(std::size_t n, PipelineOptions opt = {}) { return Pipeline(std::move(opt)).p2(n); }
inline PipelineArtifact triangulate_p1(std::size_t n_plus_1, PipelineOptions opt = {}) { return Pipeline(std::move(opt)).p1(n_plus_1); }
inline PipelineArtifact triangulate(const FamilySpec& spec, PipelineOptions opt = {}) { return Pipeline(std::move(opt)).get(spec); }

/// Rebuilds an artifact from its provenance log alone, using the recorded
/// glue values and pull exponents instead of searching for them. Every
/// recorded value still has to pass the local and final checks.
inline PipelineArtifact replay(const Json& provenance, const PipelineOptions& opt = {})
{
    if (!provenance.is_array() || provenance.empty()) throw ParseError("replay: empty provenance");
    auto step_of = [](const Json& s) { return s.at("step").get<std::string>(); };
    std::optional<PipelineArtifact> state;
    detail::Recorded rec;
    std::size_t i = 0;
    while (i < provenance.size()) {
        const auto& s = provenance[i];
        const auto kind = step_of(s);
        if (kind == "segment-base") {
            state = detail::p2dual_base();
            ++i;
        } else if (kind == "column-pullback") {
            if (!state || state->spec.family != Family::P2dual) throw ParseError("replay: column pullback without a dual level");
            detail::Recorded level;
            std::size_t j = i;
            for (; j < provenance.size(); ++j) {
                const auto k = step_of(provenance[j]);
                if (k == "glue") level.omega = parse_bigrat(provenance[j].at("omega").get<std::string>());
                if (k == "pull-all") level.exponents = provenance[j].at("exponents").get<std::vector<unsigned>>();
                if (k == "verify") break;
            }
            state = detail::p2dual_step(*state, opt, level);
            detail::certify(*state, opt);
            i = j + 1;
        } else if (kind == "duality-transport") {
            if (!state || state->spec.family != Family::P2dual) throw ParseError("replay: transport without a dual level");
            state = detail::transport_to_p2(*state);
            detail::certify(*state, opt);
            i += 2;  // transport + verify
        } else if (kind == "embed" || (kind == "apex-cone" && !state)) {
            std::size_t j = i;
            detail::Recorded level;
            for (; j < provenance.size(); ++j) {
                if (step_of(provenance[j]) == "glue") level.omega = parse_bigrat(provenance[j].at("omega").get<std::string>());
                if (step_of(provenance[j]) == "verify") break;
            }
            if (kind == "embed") {
                if (!state || state->spec.family != Family::P2) throw ParseError("replay: embedding without a P2 level");
                state = detail::extend_to_p1(*state, level);
            } else {
                state = detail::p1_base(level);
            }
            detail::certify(*state, opt);
            i = j + 1;
        } else if (kind == "verify") {
            ++i;
        } else {
            throw ParseError("replay: unknown step '" + kind + "'");
        }
    }
    if (!state) throw ParseError("replay: no construction steps");
    return *state;
}

} // namespace sylv

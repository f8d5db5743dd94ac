#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "sylv/error.hpp"
#include "sylv/exact.hpp"
#include "sylv/numbers.hpp"
#include "sylv/point.hpp"
#include "sylv/polytope.hpp"

namespace sylv {

using PointId = std::uint32_t;
using CellId = std::uint32_t;

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware).
/// Exceptions from workers are rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Deduplicated, lexicographically sorted lattice points with a reverse index.
class PointStore {
public:
    PointStore() = default;
    explicit PointStore(std::vector<LatticePoint> points) : points_(std::move(points))
    {
        std::sort(points_.begin(), points_.end());
        points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
        if (points_.size() > UINT32_MAX) throw FeasibilityError("point store exceeds 2^32 entries");
        for (const auto& p : points_)
            if (p.dim() != points_[0].dim()) throw DimensionError("point store: mixed dimensions");
        index_.reserve(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) index_.emplace(points_[i], static_cast<PointId>(i));
    }

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    std::size_t dim() const { return points_.empty() ? 0 : points_[0].dim(); }
    const LatticePoint& operator[](PointId i) const { return points_[i]; }
    const std::vector<LatticePoint>& points() const { return points_; }

    std::optional<PointId> find(const LatticePoint& p) const
    {
        auto it = index_.find(p);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    PointId at(const LatticePoint& p) const
    {
        auto i = find(p);
        if (!i) throw DomainError("point " + to_string(p) + " is not in the store");
        return *i;
    }

    friend bool operator==(const PointStore& a, const PointStore& b) { return a.points_ == b.points_; }

private:
    std::vector<LatticePoint> points_;
    std::unordered_map<LatticePoint, PointId, LatticePointHash> index_;
};

/// Variable-length index lists stored back to back.
class CellList {
public:
    CellList() = default;
    CellList(std::initializer_list<std::vector<PointId>> cells)
    {
        for (const auto& c : cells) push_back(c);
    }

    void push_back(std::span<const PointId> cell)
    {
        data_.insert(data_.end(), cell.begin(), cell.end());
        offsets_.push_back(data_.size());
    }
    void push_back(const std::vector<PointId>& cell) { push_back(std::span<const PointId>(cell)); }
    void reserve(std::size_t cells, std::size_t indices)
    {
        offsets_.reserve(cells + 1);
        data_.reserve(indices);
    }

    std::size_t size() const { return offsets_.size() - 1; }
    bool empty() const { return size() == 0; }
    std::span<const PointId> operator[](std::size_t i) const
    {
        return {data_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    /// Sorts each cell's indices and the cells themselves lexicographically.
    void canonicalize()
    {
        std::vector<std::vector<PointId>> cells;
        cells.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) {
            auto c = (*this)[i];
            cells.emplace_back(c.begin(), c.end());
            std::sort(cells.back().begin(), cells.back().end());
        }
        std::sort(cells.begin(), cells.end());
        CellList out;
        out.reserve(cells.size(), data_.size());
        for (const auto& c : cells) out.push_back(c);
        *this = std::move(out);
    }

    friend bool operator==(const CellList&, const CellList&) = default;

private:
    std::vector<PointId> data_;
    std::vector<std::size_t> offsets_{0};
};

/// A polyhedral subdivision given by its maximal cells. Each cell lists exactly
/// its vertices as indices into a shared point store.
class Subdivision {
public:
    Subdivision() = default;

    Subdivision(PointStore store, std::vector<LatticePoint> ambient, CellList cells)
        : store_(std::move(store)), ambient_(std::move(ambient)), cells_(std::move(cells))
    {
        if (ambient_.empty()) throw std::invalid_argument("subdivision: empty ambient polytope");
        std::sort(ambient_.begin(), ambient_.end());
        for (const auto& v : ambient_)
            if (v.dim() != ambient_[0].dim()) throw DimensionError("subdivision: mixed ambient dimensions");
        if (!store_.empty() && store_.dim() != ambient_[0].dim()) throw DimensionError("subdivision: store dimension mismatch");
        dim_ = affine_rank(ambient_);
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            auto c = cells_[i];
            if (c.empty()) throw std::invalid_argument("subdivision: empty cell");
            for (auto id : c)
                if (id >= store_.size()) throw std::out_of_range("subdivision: cell index out of range");
        }
        cells_.canonicalize();
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            auto c = cells_[i];
            if (std::adjacent_find(c.begin(), c.end()) != c.end())
                throw std::invalid_argument("subdivision: repeated index in a cell");
        }
    }

    const PointStore& store() const { return store_; }
    const std::vector<LatticePoint>& ambient() const { return ambient_; }
    const CellList& cells() const { return cells_; }
    std::size_t dim() const { return dim_; }
    std::size_t ambient_dim() const { return ambient_.empty() ? 0 : ambient_[0].dim(); }

    std::vector<LatticePoint> cell_points(std::size_t i) const
    {
        std::vector<LatticePoint> out;
        for (auto id : cells_[i]) out.push_back(store_[id]);
        return out;
    }

    bool all_simplices() const
    {
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i].size() != dim_ + 1) return false;
        return true;
    }

    /// Cells as sets of points, for comparisons across different stores.
    std::set<std::vector<LatticePoint>> cell_point_sets() const
    {
        std::set<std::vector<LatticePoint>> out;
        for (std::size_t i = 0; i < cells_.size(); ++i) out.insert(cell_points(i));
        return out;
    }

    friend bool operator==(const Subdivision& a, const Subdivision& b)
    {
        return a.store_ == b.store_ && a.ambient_ == b.ambient_ && a.cells_ == b.cells_;
    }

private:
    PointStore store_;
    std::vector<LatticePoint> ambient_;
    CellList cells_;
    std::size_t dim_ = 0;
};

/// A subdivision all of whose cells are simplices.
class Triangulation : public Subdivision {
public:
    Triangulation() = default;
    explicit Triangulation(Subdivision s) : Subdivision(std::move(s))
    {
        if (!all_simplices()) throw DomainError("triangulation: a cell is not a simplex");
    }
};

// ---------------------------------------------------------------------------
// Constructors

/// {Conv(z, sigma)} for the cells sigma of s, where s lies in an affine
/// subspace not containing z.
inline Subdivision cone_subdivision(const LatticePoint& z, const Subdivision& s)
{
    if (z.dim() != s.ambient_dim()) throw DimensionError("cone: apex dimension mismatch");
    HRep base(s.ambient());
    if (base.in_affine_hull(z)) throw SingularityError("cone: apex lies in the base hyperplane");
    auto points = s.store().points();
    points.push_back(z);
    PointStore store(std::move(points));
    std::vector<PointId> remap(s.store().size());
    for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = store.at(s.store()[static_cast<PointId>(i)]);
    const PointId apex = store.at(z);
    CellList cells;
    for (std::size_t i = 0; i < s.cells().size(); ++i) {
        std::vector<PointId> c{apex};
        for (auto id : s.cells()[i]) c.push_back(remap[id]);
        cells.push_back(c);
    }
    auto ambient = s.ambient();
    ambient.push_back(z);
    return Subdivision(std::move(store), std::move(ambient), std::move(cells));
}

/// Region {(y, t) : y in Q, bottom <= t <= top(y)} over a base polytope Q.
struct ColumnRegion {
    BigInt bottom;
    AffineFunctional top;

    /// top(y) as an integer; a non-integral top means the clipped columns are
    /// not lattice polytopes.
    BigInt top_at(const LatticePoint& y) const
    {
        BigRat t = top(y);
        if (!is_integral(t)) throw VerificationError("column region: non-lattice column top over " + to_string(y));
        BigInt ti = numerator_of(t);
        if (ti < bottom) throw DomainError("column region: top below bottom over " + to_string(y));
        return ti;
    }
};

/// Pullback of s along the projection dropping the last coordinate, clipped to
/// the region: each cell sigma becomes Conv{(v, bottom), (v, top(v)) : v in sigma}.
/// The store holds every lattice point of every column over a store point.
inline Subdivision pullback_restricted(const Subdivision& s, const ColumnRegion& region)
{
    if (s.dim() != s.ambient_dim()) throw DimensionError("pullback: base subdivision must be full-dimensional");
    std::vector<LatticePoint> points;
    std::vector<BigInt> tops(s.store().size());
    for (std::size_t i = 0; i < s.store().size(); ++i) {
        const auto& y = s.store()[static_cast<PointId>(i)];
        tops[i] = region.top_at(y);
        for (BigInt t = region.bottom; t <= tops[i]; ++t) points.push_back(y.appended(t));
    }
    PointStore store(std::move(points));
    CellList cells;
    for (std::size_t i = 0; i < s.cells().size(); ++i) {
        std::vector<PointId> c;
        for (auto id : s.cells()[i]) {
            const auto& y = s.store()[id];
            c.push_back(store.at(y.appended(region.bottom)));
            if (tops[id] != region.bottom) c.push_back(store.at(y.appended(tops[id])));
        }
        cells.push_back(c);
    }
    std::vector<LatticePoint> corners;
    for (const auto& v : s.ambient()) {
        corners.push_back(v.appended(region.bottom));
        corners.push_back(v.appended(region.top_at(v)));
    }
    return Subdivision(std::move(store), hull_vertices(std::move(corners)), std::move(cells));
}

/// Vertices of P ∩ {h = 0} for a lattice polytope P given by its vertices.
inline std::vector<LatticePoint> hyperplane_section(const std::vector<LatticePoint>& vertices, const HalfSpace& h)
{
    std::vector<LatticePoint> pts;
    std::vector<BigRat> vals;
    for (const auto& v : vertices) vals.push_back(h(v));
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (vals[i] == 0) pts.push_back(vertices[i]);
    CellPolytope cell(vertices);
    for (const auto& f : faces(cell)) {
        if (f.dim() != 1) continue;
        const auto& a = f.vertices()[0];
        const auto& b = f.vertices()[1];
        BigRat ha = h(a), hb = h(b);
        if (sign(ha) * sign(hb) >= 0) continue;
        BigRat lambda = ha / (ha - hb);
        std::vector<BigRat> c;
        for (std::size_t k = 0; k < a.dim(); ++k) c.push_back(BigRat(a[k]) + lambda * BigRat(b[k] - a[k]));
        RationalPoint x(std::move(c));
        if (!x.is_integral()) throw DomainError("hyperplane section has a non-lattice vertex " + to_string(x));
        pts.push_back(x.to_lattice());
    }
    if (pts.empty()) throw DomainError("hyperplane misses the polytope");
    return hull_vertices(std::move(pts));
}

/// The subdivision induced on ambient ∩ {h = 0}. Every cell must meet the
/// hyperplane in a face of itself.
inline Subdivision restrict_to_hyperplane(const Subdivision& s, const HalfSpace& h)
{
    auto ambient = hyperplane_section(s.ambient(), h);
    const std::size_t target = affine_rank(ambient);
    std::vector<BigRat> vals(s.store().size());
    std::vector<LatticePoint> kept;
    for (std::size_t i = 0; i < s.store().size(); ++i) {
        vals[i] = h(s.store()[static_cast<PointId>(i)]);
        if (vals[i] == 0) kept.push_back(s.store()[static_cast<PointId>(i)]);
    }
    PointStore store(std::move(kept));
    std::set<std::vector<PointId>> found;
    for (std::size_t i = 0; i < s.cells().size(); ++i) {
        bool pos = false, neg = false;
        std::vector<LatticePoint> on;
        for (auto id : s.cells()[i]) {
            int sg = sign(vals[id]);
            pos |= sg > 0;
            neg |= sg < 0;
            if (sg == 0) on.push_back(s.store()[id]);
        }
        if (pos && neg) throw CompatibilityError("restrict: cell " + std::to_string(i) + " crosses the hyperplane");
        if (on.size() < target + 1 || affine_rank(on) != target) continue;
        std::vector<PointId> c;
        for (const auto& p : on) c.push_back(store.at(p));
        std::sort(c.begin(), c.end());
        found.insert(std::move(c));
    }
    CellList cells;
    for (const auto& c : found) cells.push_back(c);
    return Subdivision(std::move(store), std::move(ambient), std::move(cells));
}

/// Integer hyperplane <normal, x> + offset = 0 of a facet shared by two full-dimensional
/// polytopes lying on opposite sides; `normal` points into `a`.
struct SharedFacet {
    std::vector<BigInt> normal;
    BigInt offset;
    std::vector<LatticePoint> vertices;

    HalfSpace halfspace() const
    {
        HalfSpace h;
        for (const auto& x : normal) h.normal.emplace_back(x);
        h.offset = offset;
        return h;
    }
};

inline std::optional<SharedFacet> shared_facet(const std::vector<LatticePoint>& a, const std::vector<LatticePoint>& b)
{
    HRep ha(a), hb(b);
    if (ha.dim() != ha.ambient_dim() || hb.dim() != hb.ambient_dim()) return std::nullopt;
    for (const auto& fa : ha.facets()) {
        std::vector<LatticePoint> va;
        for (auto i : fa.vertices) va.push_back(a[i]);
        for (const auto& fb : hb.facets()) {
            std::vector<LatticePoint> vb;
            for (auto i : fb.vertices) vb.push_back(b[i]);
            if (va != vb) continue;
            bool opposite = true;
            for (std::size_t k = 0; k < fa.normal.size(); ++k) opposite &= fa.normal[k] == -fb.normal[k];
            if (!opposite) continue;
            return SharedFacet{fa.normal, fa.offset, va};
        }
    }
    return std::nullopt;
}

/// Union of subdivisions of two polytopes meeting in a common facet, after
/// checking that both induce the same subdivision on it.
inline Subdivision glue(const Subdivision& a, const Subdivision& b)
{
    if (a.ambient_dim() != b.ambient_dim()) throw DimensionError("glue: dimension mismatch");
    auto facet = shared_facet(a.ambient(), b.ambient());
    if (!facet) throw CompatibilityError("glue: the polytopes do not share a facet");
    auto h = facet->halfspace();
    if (restrict_to_hyperplane(a, h).cell_point_sets() != restrict_to_hyperplane(b, h).cell_point_sets())
        throw CompatibilityError("glue: the subdivisions disagree on the common facet");
    auto points = a.store().points();
    points.insert(points.end(), b.store().points().begin(), b.store().points().end());
    PointStore store(std::move(points));
    CellList cells;
    for (const Subdivision* s : {&a, &b}) {
        for (std::size_t i = 0; i < s->cells().size(); ++i) {
            std::vector<PointId> c;
            for (auto id : s->cells()[i]) c.push_back(store.at(s->store()[id]));
            cells.push_back(c);
        }
    }
    auto corners = a.ambient();
    corners.insert(corners.end(), b.ambient().begin(), b.ambient().end());
    auto ambient = hull_vertices(std::move(corners));
    if (lattice_volume_of_cell(ambient) != lattice_volume_of_cell(a.ambient()) + lattice_volume_of_cell(b.ambient()))
        throw CompatibilityError("glue: the union of the two polytopes is not convex");
    return Subdivision(std::move(store), std::move(ambient), std::move(cells));
}

/// x -> A x + b with an integer matrix.
struct LatticeMap {
    IntMatrix matrix;
    LatticePoint translation;

    static LatticeMap identity(std::size_t d) { return {IntMatrix::identity(d), LatticePoint::zero(d)}; }

    LatticePoint operator()(const LatticePoint& x) const
    {
        if (x.dim() != matrix.cols()) throw DimensionError("lattice map: dimension mismatch");
        LatticePoint y(matrix.rows());
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            BigInt s = translation[r];
            for (std::size_t c = 0; c < matrix.cols(); ++c) s += matrix(r, c) * x[c];
            y[r] = std::move(s);
        }
        return y;
    }

    bool unimodular() const { return matrix.square() && abs(det(matrix)) == 1; }
};

struct MappedSubdivision {
    Subdivision subdivision;
    std::vector<PointId> index_map;  // old store index -> new store index
};

/// Pointwise image under a unimodular affine lattice map.
inline MappedSubdivision apply_lattice_map(const Subdivision& s, const LatticeMap& map)
{
    if (map.translation.dim() != map.matrix.rows()) throw DimensionError("lattice map: translation dimension mismatch");
    if (!map.unimodular()) throw DomainError("lattice map is not unimodular");
    std::vector<LatticePoint> images;
    images.reserve(s.store().size());
    for (const auto& p : s.store().points()) images.push_back(map(p));
    PointStore store(images);
    std::vector<PointId> remap(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) remap[i] = store.at(images[i]);
    CellList cells;
    for (std::size_t i = 0; i < s.cells().size(); ++i) {
        std::vector<PointId> c;
        for (auto id : s.cells()[i]) c.push_back(remap[id]);
        cells.push_back(c);
    }
    std::vector<LatticePoint> ambient;
    for (const auto& v : s.ambient()) ambient.push_back(map(v));
    return {Subdivision(std::move(store), std::move(ambient), std::move(cells)), std::move(remap)};
}

/// x -> (x, value): the same subdivision placed in the hyperplane x_d = value.
inline MappedSubdivision embed(const Subdivision& s, const BigInt& value)
{
    std::vector<LatticePoint> images;
    for (const auto& p : s.store().points()) images.push_back(p.appended(value));
    // appending a constant preserves the lexicographic order
    std::vector<PointId> remap(images.size());
    for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = static_cast<PointId>(i);
    CellList cells;
    for (std::size_t i = 0; i < s.cells().size(); ++i) cells.push_back(s.cells()[i]);
    std::vector<LatticePoint> ambient;
    for (const auto& v : s.ambient()) ambient.push_back(v.appended(value));
    return {Subdivision(PointStore(std::move(images)), std::move(ambient), std::move(cells)), std::move(remap)};
}

// ---------------------------------------------------------------------------
// Pulling refinements

/// Mutable state for a sequence of pulling refinements of a full-dimensional
/// subdivision. Tracks, for every cell, its vertices and the other store points
/// it contains, and for every store point the cells containing it.
class PullingEngine {
public:
    explicit PullingEngine(const Subdivision& s) : store_(s.store()), ambient_(s.ambient()), dim_(s.dim())
    {
        if (s.dim() != s.ambient_dim()) throw DimensionError("pulling: subdivision must be full-dimensional");
        containing_.resize(store_.size());
        cells_.reserve(s.cells().size());
        small_coords_ok_ = true;
        small_coords_.reserve(store_.size() * dim_);
        for (const auto& p : store_.points())
            for (const auto& c : p) {
                if (abs(c) >= (1L << 24)) small_coords_ok_ = false;
                small_coords_.push_back(small_coords_ok_ ? c.convert_to<long>() : 0);
            }
        if (!small_coords_ok_) small_coords_.clear();
        for (std::size_t i = 0; i < s.cells().size(); ++i) {
            auto span = s.cells()[i];
            Cell c;
            c.vertices.assign(span.begin(), span.end());
            std::vector<LatticePoint> vs;
            for (auto id : c.vertices) vs.push_back(store_[id]);
            for (const auto& p : lattice_points_by_fibers(vs)) {
                auto id = store_.find(p);
                if (id && !std::binary_search(c.vertices.begin(), c.vertices.end(), *id)) c.inside.push_back(*id);
            }
            add_cell(std::move(c));
        }
    }

    const PointStore& store() const { return store_; }
    std::size_t dim() const { return dim_; }
    std::size_t cell_capacity() const { return cells_.size(); }
    std::size_t live_cells() const { return live_; }
    bool alive(CellId c) const { return cells_[c].alive; }
    const std::vector<PointId>& vertices(CellId c) const { return cells_[c].vertices; }
    const std::vector<PointId>& inside(CellId c) const { return cells_[c].inside; }
    const std::vector<CellId>& cells_containing(PointId p) const
    {
        compact(containing_.at(p));
        return containing_[p];
    }

    std::vector<LatticePoint> points_of(CellId c) const
    {
        std::vector<LatticePoint> out;
        for (auto id : cells_[c].vertices) out.push_back(store_[id]);
        return out;
    }

    /// The other cell having every point of `facet` as a vertex, if any.
    std::optional<CellId> neighbor(CellId c, std::span<const PointId> facet) const
    {
        const std::vector<CellId>* best = nullptr;
        for (auto p : facet)
            if (!best || containing_[p].size() < best->size()) best = &containing_[p];
        for (auto other : *best) {
            if (other == c || !cells_[other].alive) continue;
            const auto& vs = cells_[other].vertices;
            bool all = std::all_of(facet.begin(), facet.end(),
                                   [&](PointId p) { return std::binary_search(vs.begin(), vs.end(), p); });
            if (all) return other;
        }
        return std::nullopt;
    }

    /// Replaces every cell containing m by the pyramids Conv(m, F) over its
    /// facets F not containing m. Returns the cells containing m afterwards.
    /// A simplex with m as a vertex reproduces itself and is left in place.
    std::vector<CellId> pull(PointId m)
    {
        if (m >= store_.size()) throw std::out_of_range("pull: point index out of range");
        auto hits = cells_containing(m);
        if (hits.empty()) throw DomainError("pull: " + to_string(store_[m]) + " lies in no cell");
        std::sort(hits.begin(), hits.end());
        for (auto c : hits) {
            const auto& vs = cells_[c].vertices;
            bool is_vertex = std::binary_search(vs.begin(), vs.end(), m);
            if (is_vertex && vs.size() == dim_ + 1) continue;
            split(c, m);
        }
        auto out = cells_containing(m);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// The current cells as a subdivision of the same ambient polytope.
    Subdivision result() const
    {
        CellList cells;
        for (const auto& c : cells_)
            if (c.alive) cells.push_back(c.vertices);
        return Subdivision(store_, ambient_, std::move(cells));
    }

private:
    struct Cell {
        std::vector<PointId> vertices;  // sorted
        std::vector<PointId> inside;    // sorted, store points in the closed cell that are not vertices
        bool alive = true;
    };

    CellId add_cell(Cell c)
    {
        if (cells_.size() >= UINT32_MAX) throw FeasibilityError("pulling: more than 2^32 cells");
        const auto id = static_cast<CellId>(cells_.size());
        cells_.push_back(std::move(c));
        const auto& added = cells_.back();
        for (auto p : added.vertices) push_containing(p, id);
        for (auto p : added.inside) push_containing(p, id);
        ++live_;
        return id;
    }

    // Containment lists drop dead cells lazily: on read, and whenever a list
    // reaches a power-of-two length.
    void compact(std::vector<CellId>& list) const
    {
        std::erase_if(list, [&](CellId c) { return !cells_[c].alive; });
    }

    void push_containing(PointId p, CellId id)
    {
        auto& list = containing_[p];
        list.push_back(id);
        const auto n = list.size();
        if (n >= 32 && (n & (n - 1)) == 0) compact(list);
    }

    // Lazily unlisted from containing_, see compact().
    void kill(CellId id)
    {
        auto& c = cells_[id];
        c.alive = false;
        c.vertices.clear();
        c.vertices.shrink_to_fit();
        c.inside.clear();
        c.inside.shrink_to_fit();
        --live_;
    }

    void split(CellId id, PointId m)
    {
        const auto pts = points_of(id);
        HRep h(pts);
        const auto& vs = cells_[id].vertices;
        const LatticePoint& mp = store_[m];
        const auto& facets = h.facets();
        std::vector<BigInt> at_m(facets.size());
        std::vector<std::size_t> apex_facets;
        for (std::size_t f = 0; f < facets.size(); ++f) {
            at_m[f] = h.evaluate(facets[f], mp);
            if (at_m[f] > 0) apex_facets.push_back(f);
        }
        std::vector<Cell> pieces(apex_facets.size());
        for (std::size_t k = 0; k < apex_facets.size(); ++k) {
            auto& piece = pieces[k];
            piece.vertices.push_back(m);
            for (auto local : facets[apex_facets[k]].vertices) piece.vertices.push_back(vs[local]);
            std::sort(piece.vertices.begin(), piece.vertices.end());
        }
        // A contained point p goes to every pyramid whose base is where the ray
        // from m through p leaves the cell: minimal t = F(m) / (F(m) - F(p)).
        if (!redistribute_small(id, m, h, apex_facets, pieces)) {
            for (auto p : cells_[id].inside) {
                if (p == m) continue;
                const LatticePoint& pp = store_[p];
                std::vector<std::size_t> best;
                BigInt best_num = 0, best_den = 1;
                for (std::size_t k = 0; k < apex_facets.size(); ++k) {
                    const std::size_t f = apex_facets[k];
                    BigInt fp = h.evaluate(facets[f], pp);
                    if (fp >= at_m[f]) continue;
                    BigInt num = at_m[f], den = at_m[f] - fp;
                    if (best.empty()) {
                        best = {k};
                        best_num = num;
                        best_den = den;
                        continue;
                    }
                    BigInt lhs = num * best_den, rhs = best_num * den;
                    if (lhs < rhs) {
                        best = {k};
                        best_num = num;
                        best_den = den;
                    } else if (lhs == rhs) {
                        best.push_back(k);
                    }
                }
                if (best.empty()) throw VerificationError("pull: contained point has no exit facet");
                for (auto k : best) pieces[k].inside.push_back(p);
            }
        }
        kill(id);
        for (auto& piece : pieces) {
            std::sort(piece.inside.begin(), piece.inside.end());
            add_cell(std::move(piece));
        }
    }

    // The same exit-facet rule in machine integers, when coordinates and facet
    // normals are small enough that nothing can overflow. False otherwise.
    bool redistribute_small(CellId id, PointId m, const HRep& h, const std::vector<std::size_t>& apex_facets,
                            std::vector<Cell>& pieces) const
    {
        constexpr long bound = 1L << 24;
        if (!small_coords_ok_ || h.frame().size() != dim_) return false;
        const auto& facets = h.facets();
        std::vector<long> normals, offsets;
        for (auto f : apex_facets) {
            for (const auto& c : facets[f].normal) {
                if (abs(c) >= bound) return false;
                normals.push_back(c.convert_to<long>());
            }
            if (abs(facets[f].offset) >= bound) return false;
            offsets.push_back(facets[f].offset.convert_to<long>());
        }
        const auto& frame = h.frame();
        auto value = [&](std::size_t k, PointId p) {
            long v = offsets[k];
            const long* x = &small_coords_[std::size_t(p) * dim_];
            for (std::size_t i = 0; i < dim_; ++i) v += normals[k * dim_ + i] * x[frame[i]];
            return v;
        };
        std::vector<long> at_m(apex_facets.size());
        for (std::size_t k = 0; k < apex_facets.size(); ++k) at_m[k] = value(k, m);
        std::vector<std::size_t> best;
        for (auto p : cells_[id].inside) {
            if (p == m) continue;
            best.clear();
            __int128 best_num = 0, best_den = 1;
            for (std::size_t k = 0; k < apex_facets.size(); ++k) {
                const long fp = value(k, p);
                if (fp >= at_m[k]) continue;
                const __int128 num = at_m[k], den = at_m[k] - fp;
                if (best.empty() || num * best_den < best_num * den) {
                    best.assign(1, k);
                    best_num = num;
                    best_den = den;
                } else if (num * best_den == best_num * den) {
                    best.push_back(k);
                }
            }
            if (best.empty()) throw VerificationError("pull: contained point has no exit facet");
            for (auto k : best) pieces[k].inside.push_back(p);
        }
        return true;
    }

    PointStore store_;
    std::vector<LatticePoint> ambient_;
    std::vector<long> small_coords_;  // row-major copy of the store when every coordinate is small
    bool small_coords_ok_ = false;
    std::size_t dim_;
    std::vector<Cell> cells_;
    mutable std::vector<std::vector<CellId>> containing_;
    std::size_t live_ = 0;
};

/// Pulling refinement of s at the store point m.
inline Subdivision pull(const Subdivision& s, PointId m)
{
    PullingEngine e(s);
    e.pull(m);
    return e.result();
}

/// Pulls s at every store point in ascending (lexicographic) order.
inline Triangulation pull_all(const Subdivision& s)
{
    PullingEngine e(s);
    for (std::size_t m = 0; m < s.store().size(); ++m)
        if (!e.cells_containing(static_cast<PointId>(m)).empty()) e.pull(static_cast<PointId>(m));
    return Triangulation(e.result());
}

// ---------------------------------------------------------------------------
// Verification

enum class IntersectionMode { automatic, pairwise, facet_keys };

struct VerifyOptions {
    IntersectionMode mode = IntersectionMode::automatic;
    unsigned threads = 0;
    std::size_t pairwise_max_cells = 200;  // automatic mode: pairwise up to this many cells, dim <= 3
};

struct VerifyReport {
    bool valid = false;
    bool simplicial = false;
    bool unimodular = false;
    BigInt volume_checksum = 0;
    BigInt ambient_volume = 0;
    std::string mode;
    std::vector<std::string> reasons;
};

namespace detail {

/// Vertices of the intersection of two full-dimensional polytopes, by solving
/// every d-subset of their combined facet hyperplanes.
inline std::vector<RationalPoint> intersection_vertices(const HRep& a, const HRep& b)
{
    const std::size_t d = a.ambient_dim();
    std::vector<const Facet*> all;
    for (const auto& f : a.facets()) all.push_back(&f);
    for (const auto& f : b.facets()) all.push_back(&f);
    std::vector<RationalPoint> out;
    for (const auto& idx : combinations(all.size(), d)) {
        Matrix m(d, d);
        std::vector<BigRat> rhs(d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) m(r, c) = BigRat(all[idx[r]]->normal[c]);
            rhs[r] = BigRat(-all[idx[r]]->offset);
        }
        std::vector<BigRat> x;
        try {
            x = solve(std::move(m), std::move(rhs));
        } catch (const SingularityError&) {
            continue;
        }
        RationalPoint p(std::move(x));
        if (a.classify(p) == Membership::outside || b.classify(p) == Membership::outside) continue;
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
    return out;
}

/// Whether `subset` (sorted local indices) is the vertex set of a face of h.
inline bool is_face(const HRep& h, const std::vector<std::size_t>& subset, std::size_t nv)
{
    if (subset.size() == nv) return true;
    std::vector<std::size_t> closure(nv);
    std::iota(closure.begin(), closure.end(), 0);
    bool any = false;
    for (const auto& f : h.facets()) {
        if (!std::includes(f.vertices.begin(), f.vertices.end(), subset.begin(), subset.end())) continue;
        any = true;
        std::vector<std::size_t> tmp;
        std::set_intersection(closure.begin(), closure.end(), f.vertices.begin(), f.vertices.end(),
                              std::back_inserter(tmp));
        closure = std::move(tmp);
    }
    return any && closure == subset;
}

} // namespace detail

/// Checks coverage (volume checksum), proper intersections, simpliciality and
/// unimodularity. Failures are reported, not thrown.
inline VerifyReport verify(const Subdivision& s, const VerifyOptions& opt = {})
{
    VerifyReport rep;
    const std::size_t n = s.cells().size();
    const std::size_t d = s.dim();
    HRep amb(s.ambient());

    std::vector<BigInt> vols(n);
    std::vector<char> full_rank(n), simplex(n), exact_vertices(n), inside(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        auto pts = s.cell_points(i);
        full_rank[i] = affine_rank(pts) == d;
        simplex[i] = full_rank[i] && pts.size() == d + 1;
        if (!full_rank[i]) return;
        exact_vertices[i] = simplex[i] || HRep(pts).vertex_indices().size() == pts.size();
        inside[i] = std::all_of(pts.begin(), pts.end(),
                                [&](const LatticePoint& p) { return amb.classify(p) != Membership::outside; });
        vols[i] = simplex[i] ? lattice_volume(pts) : lattice_volume_of_cell(pts);
    });

    rep.ambient_volume = lattice_volume_of_cell(s.ambient());
    bool ok = n > 0;
    if (n == 0) rep.reasons.push_back("no cells");
    rep.simplicial = true;
    rep.unimodular = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!full_rank[i]) {
            ok = false;
            rep.simplicial = rep.unimodular = false;
            rep.reasons.push_back("cell " + std::to_string(i) + " is not full-dimensional");
            continue;
        }
        if (!exact_vertices[i]) {
            ok = false;
            rep.reasons.push_back("cell " + std::to_string(i) + " lists a non-vertex");
        }
        if (!inside[i]) {
            ok = false;
            rep.reasons.push_back("cell " + std::to_string(i) + " leaves the ambient polytope");
        }
        rep.volume_checksum += vols[i];
        if (!simplex[i]) rep.simplicial = false;
        if (!simplex[i] || vols[i] != 1) rep.unimodular = false;
    }
    if (rep.volume_checksum != rep.ambient_volume) {
        ok = false;
        // cells inside the ambient polytope with too much total volume must overlap
        bool contained = std::all_of(inside.begin(), inside.end(), [](char c) { return c != 0; });
        std::string what = rep.volume_checksum > rep.ambient_volume && contained ? "interiors intersect: " : "";
        rep.reasons.push_back(what + "volume checksum " + rep.volume_checksum.str() + " differs from ambient volume " +
                              rep.ambient_volume.str());
    }

    bool full_dim = d == s.ambient_dim();
    IntersectionMode mode = opt.mode;
    if (mode == IntersectionMode::automatic)
        mode = (full_dim && d <= 3 && n <= opt.pairwise_max_cells) ? IntersectionMode::pairwise
                                                                     : IntersectionMode::facet_keys;
    if (mode == IntersectionMode::pairwise && !full_dim) mode = IntersectionMode::facet_keys;

    const bool cells_ok = std::all_of(full_rank.begin(), full_rank.end(), [](char c) { return c != 0; });
    if (cells_ok && mode == IntersectionMode::pairwise) {
        rep.mode = "pairwise";
        std::vector<HRep> hs(n);
        for (std::size_t i = 0; i < n; ++i) hs[i] = HRep(s.cell_points(i));
        std::vector<std::string> found;
        for (std::size_t i = 0; i < n && found.size() < 20; ++i) {
            for (std::size_t j = i + 1; j < n && found.size() < 20; ++j) {
                auto ci = s.cells()[i], cj = s.cells()[j];
                std::vector<PointId> common;
                std::set_intersection(ci.begin(), ci.end(), cj.begin(), cj.end(), std::back_inserter(common));
                auto verts = detail::intersection_vertices(hs[i], hs[j]);
                if (verts.empty() && common.empty()) continue;
                std::vector<RationalPoint> rv(verts.begin(), verts.end());
                std::vector<LatticePoint> cpts;
                for (auto id : common) cpts.push_back(s.store()[id]);
                bool proper = !cpts.empty();
                if (proper) {
                    HRep hc(cpts);
                    for (const auto& v : verts)
                        if (hc.classify(v) == Membership::outside) proper = false;
                }
                auto local = [&](std::span<const PointId> cell) {
                    std::vector<std::size_t> idx;
                    for (std::size_t k = 0; k < cell.size(); ++k)
                        if (std::binary_search(common.begin(), common.end(), cell[k])) idx.push_back(k);
                    return idx;
                };
                if (proper) proper = detail::is_face(hs[i], local(ci), ci.size()) && detail::is_face(hs[j], local(cj), cj.size());
                if (!proper) {
                    bool overlap = !verts.empty() && affine_rank(rv) == d;
                    found.push_back("cells " + std::to_string(i) + " and " + std::to_string(j) + ": " +
                                    (overlap ? "interiors intersect" : "intersection is not a common face"));
                }
            }
        }
        if (!found.empty()) {
            ok = false;
            rep.reasons.insert(rep.reasons.end(), found.begin(), found.end());
        }
    } else if (cells_ok) {
        rep.mode = "facet-keys";
        // Every facet of a cell must either lie on the ambient boundary and
        // belong to exactly one cell, or be shared by exactly two cells lying on
        // opposite sides of it. Lower-dimensional subdivisions are checked in
        // a coordinate frame of their affine hull.
        const auto& frame = amb.frame();
        auto project = [&](const LatticePoint& p) {
            std::vector<BigInt> c;
            for (auto j : frame) c.push_back(p[j]);
            return LatticePoint(std::move(c));
        };
        struct Entry {
            std::vector<PointId> key;
            CellId cell;
            int side;  // sign of the primitive normal's first nonzero entry, inward
        };
        std::vector<std::vector<Entry>> per_cell(n);
        parallel_for(n, opt.threads, [&](std::size_t i) {
            auto span = s.cells()[i];
            std::vector<LatticePoint> pts;
            for (auto id : span) pts.push_back(project(s.store()[id]));
            HRep h(pts);
            for (const auto& f : h.facets()) {
                Entry e;
                for (auto k : f.vertices) e.key.push_back(span[k]);
                e.cell = static_cast<CellId>(i);
                auto nz = std::find_if(f.normal.begin(), f.normal.end(), [](const BigInt& x) { return x != 0; });
                e.side = *nz > 0 ? 1 : -1;
                per_cell[i].push_back(std::move(e));
            }
        });
        std::vector<Entry> entries;
        for (auto& v : per_cell)
            for (auto& e : v) entries.push_back(std::move(e));
        per_cell.clear();
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.key != b.key ? a.key < b.key : a.cell < b.cell;
        });
        // boundary test: all facet vertices saturate a common ambient facet
        auto on_boundary = [&](const std::vector<PointId>& key) {
            for (const auto& f : amb.facets()) {
                bool all = true;
                for (auto id : key)
                    if (amb.evaluate(f, s.store()[id]) != 0) {
                        all = false;
                        break;
                    }
                if (all) return true;
            }
            return false;
        };
        std::size_t bad = 0;
        for (std::size_t i = 0; i < entries.size();) {
            std::size_t j = i;
            while (j < entries.size() && entries[j].key == entries[i].key) ++j;
            const std::size_t count = j - i;
            std::string problem;
            if (on_boundary(entries[i].key)) {
                if (count != 1) problem = "boundary facet used by " + std::to_string(count) + " cells";
            } else if (count == 1) {
                problem = "interior facet has no neighbor";
            } else if (count > 2) {
                problem = "facet shared by " + std::to_string(count) + " cells";
            } else if (entries[i].side == entries[i + 1].side) {
                problem = "interiors intersect (cells on the same side of a shared facet)";
            }
            if (!problem.empty()) {
                ok = false;
                if (++bad <= 20) rep.reasons.push_back("cell " + std::to_string(entries[i].cell) + ": " + problem);
            }
            i = j;
        }
    }
    rep.valid = ok;
    return rep;
}

} // namespace sylv

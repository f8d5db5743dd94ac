#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sylv/error.hpp"
#include "sylv/exact.hpp"
#include "sylv/numbers.hpp"
#include "sylv/point.hpp"

namespace sylv {

/// {x : <normal, x> + offset >= 0}
struct HalfSpace {
    std::vector<BigRat> normal;
    BigRat offset;

    template <typename P>
    BigRat operator()(const P& x) const
    {
        return dot(std::span<const BigRat>(normal), x) + offset;
    }
    friend bool operator==(const HalfSpace&, const HalfSpace&) = default;
};

enum class Membership { outside, boundary, interior };

inline const char* to_string(Membership m)
{
    switch (m) {
    case Membership::outside: return "outside";
    case Membership::boundary: return "boundary";
    case Membership::interior: return "interior";
    }
    return "?";
}

/// Convex hull of affinely independent lattice points.
class LatticeSimplex {
public:
    LatticeSimplex() = default;
    explicit LatticeSimplex(std::vector<LatticePoint> vertices) : vertices_(std::move(vertices))
    {
        if (vertices_.empty()) throw std::invalid_argument("simplex needs at least one vertex");
        for (const auto& v : vertices_)
            if (v.dim() != vertices_[0].dim()) throw DimensionError("simplex vertices of mixed dimension");
        if (affine_rank(vertices_) + 1 != vertices_.size())
            throw SingularityError("simplex vertices are affinely dependent");
    }

    const std::vector<LatticePoint>& vertices() const { return vertices_; }
    std::size_t dim() const { return vertices_.size() - 1; }
    std::size_t ambient_dim() const { return vertices_[0].dim(); }
    bool full_dimensional() const { return dim() == ambient_dim(); }

    friend bool operator==(const LatticeSimplex&, const LatticeSimplex&) = default;

private:
    std::vector<LatticePoint> vertices_;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k)
{
    std::vector<std::vector<std::size_t>> out;
    if (k > n) return out;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        out.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

inline BigInt content(std::span<const BigInt> v)
{
    BigInt g = 0;
    for (const auto& x : v) g = gcd(g, x);
    return g;
}

/// Normal of the hyperplane through the rows (points) of `pts` inside Z^k,
/// |pts| = k. Zero vector when the points are affinely dependent.
inline std::vector<BigInt> hyperplane_normal(const std::vector<std::vector<BigInt>>& pts)
{
    const std::size_t k = pts.size();
    std::vector<BigInt> normal(k, BigInt(0));
    if (k == 1) {
        normal[0] = 1;
        return normal;
    }
    // (k-1) x k matrix of edge vectors; normal_j = (-1)^j * minor without column j.
    for (std::size_t j = 0; j < k; ++j) {
        IntMatrix m(k - 1, k - 1);
        for (std::size_t r = 1; r < k; ++r) {
            std::size_t cc = 0;
            for (std::size_t c = 0; c < k; ++c) {
                if (c == j) continue;
                m(r - 1, cc++) = pts[r][c] - pts[0][c];
            }
        }
        BigInt mn = det(std::move(m));
        normal[j] = (j % 2 == 0) ? mn : BigInt(-mn);
    }
    return normal;
}

} // namespace detail

/// Facet of a polytope, as vertex indices plus its inward inequality
/// <normal, x_J> + offset >= 0 in the polytope's frame coordinates J.
struct Facet {
    std::vector<std::size_t> vertices;
    std::vector<BigInt> normal;
    BigInt offset;
};

/// Half-space description of the convex hull of a lattice point set, computed
/// by brute force over vertex subsets with supporting-hyperplane certification.
/// Lower-dimensional sets are handled inside a coordinate frame J on which the
/// projection of the affine hull is injective (this preserves the face lattice).
class HRep {
public:
    HRep() = default;

    explicit HRep(std::span<const LatticePoint> points) : points_(points.begin(), points.end())
    {
        if (points_.empty()) throw std::invalid_argument("HRep of an empty point set");
        ambient_ = points_[0].dim();
        for (const auto& p : points_)
            if (p.dim() != ambient_) throw DimensionError("HRep: mixed dimensions");
        choose_frame();
        compute_facets();
    }
    explicit HRep(const std::vector<LatticePoint>& points) : HRep(std::span<const LatticePoint>(points)) {}

    std::size_t dim() const { return dim_; }
    std::size_t ambient_dim() const { return ambient_; }
    const std::vector<std::size_t>& frame() const { return frame_; }
    const std::vector<Facet>& facets() const { return facets_; }
    const std::vector<LatticePoint>& points() const { return points_; }

    std::vector<BigInt> project(const LatticePoint& p) const
    {
        std::vector<BigInt> r;
        r.reserve(frame_.size());
        for (auto j : frame_) r.push_back(p[j]);
        return r;
    }
    std::vector<BigRat> project(const RationalPoint& p) const
    {
        std::vector<BigRat> r;
        r.reserve(frame_.size());
        for (auto j : frame_) r.push_back(p[j]);
        return r;
    }

    /// <normal, x_J> + offset, exact.
    BigInt evaluate(const Facet& f, const LatticePoint& p) const
    {
        BigInt s = f.offset;
        for (std::size_t i = 0; i < frame_.size(); ++i) s += f.normal[i] * p[frame_[i]];
        return s;
    }
    BigRat evaluate(const Facet& f, const RationalPoint& p) const
    {
        BigRat s = BigRat(f.offset);
        for (std::size_t i = 0; i < frame_.size(); ++i) s += BigRat(f.normal[i]) * p[frame_[i]];
        return s;
    }

    bool in_affine_hull(const RationalPoint& p) const
    {
        if (p.dim() != ambient_) throw DimensionError("membership: dimension mismatch");
        if (dim_ == ambient_) return true;
        std::vector<RationalPoint> pts{RationalPoint(points_[basis_[0]])};
        for (std::size_t i = 1; i < basis_.size(); ++i) pts.emplace_back(points_[basis_[i]]);
        pts.push_back(p);
        return affine_rank(pts) == dim_;
    }

    Membership classify(const RationalPoint& p) const
    {
        if (!in_affine_hull(p)) return Membership::outside;
        bool boundary = false;
        for (const auto& f : facets_) {
            int s = sign(evaluate(f, p));
            if (s < 0) return Membership::outside;
            if (s == 0) boundary = true;
        }
        if (dim_ == 0) {
            // A single point: the frame is empty, compare coordinates directly.
            return RationalPoint(points_[0]) == p ? Membership::interior : Membership::outside;
        }
        return boundary ? Membership::boundary : Membership::interior;
    }

    /// Indices of the points that are vertices of the hull.
    std::vector<std::size_t> vertex_indices() const
    {
        std::vector<std::size_t> out;
        if (dim_ == 0) {
            out.push_back(0);
            return out;
        }
        for (std::size_t i = 0; i < points_.size(); ++i) {
            IntMatrix normals(0, 0);
            std::vector<const Facet*> incident;
            for (const auto& f : facets_)
                if (std::binary_search(f.vertices.begin(), f.vertices.end(), i)) incident.push_back(&f);
            if (incident.size() < dim_) continue;
            IntMatrix m(incident.size(), dim_);
            for (std::size_t r = 0; r < incident.size(); ++r)
                for (std::size_t c = 0; c < dim_; ++c) m(r, c) = incident[r]->normal[c];
            if (rank(std::move(m)) == dim_) out.push_back(i);
        }
        return out;
    }

private:
    void choose_frame()
    {
        // Greedy affine basis, then a set of coordinates on which it stays independent.
        basis_ = {0};
        IntMatrix rows(0, ambient_);
        std::vector<std::vector<BigInt>> edges;
        for (std::size_t i = 1; i < points_.size() && edges.size() < ambient_; ++i) {
            std::vector<BigInt> e(ambient_);
            for (std::size_t c = 0; c < ambient_; ++c) e[c] = points_[i][c] - points_[0][c];
            IntMatrix m(edges.size() + 1, ambient_);
            for (std::size_t r = 0; r < edges.size(); ++r)
                for (std::size_t c = 0; c < ambient_; ++c) m(r, c) = edges[r][c];
            for (std::size_t c = 0; c < ambient_; ++c) m(edges.size(), c) = e[c];
            if (rank(std::move(m)) == edges.size() + 1) {
                edges.push_back(std::move(e));
                basis_.push_back(i);
            }
        }
        dim_ = edges.size();
        frame_.clear();
        for (std::size_t c = 0; c < ambient_ && frame_.size() < dim_; ++c) {
            auto trial = frame_;
            trial.push_back(c);
            IntMatrix m(edges.size(), trial.size());
            for (std::size_t r = 0; r < edges.size(); ++r)
                for (std::size_t j = 0; j < trial.size(); ++j) m(r, j) = edges[r][trial[j]];
            if (rank(std::move(m)) == trial.size()) frame_ = std::move(trial);
        }
    }

    void compute_facets()
    {
        const std::size_t k = dim_;
        if (k == 0) return;
        std::vector<std::vector<BigInt>> proj;
        proj.reserve(points_.size());
        for (const auto& p : points_) proj.push_back(project(p));

        std::set<std::vector<std::size_t>> seen;
        auto consider = [&](const std::vector<std::size_t>& subset) {
            std::vector<std::vector<BigInt>> pts;
            for (auto i : subset) pts.push_back(proj[i]);
            auto normal = detail::hyperplane_normal(pts);
            BigInt g = detail::content(normal);
            if (g == 0) return;
            for (auto& x : normal) x /= g;
            BigInt offset = 0;
            for (std::size_t c = 0; c < k; ++c) offset -= normal[c] * proj[subset[0]][c];
            int side = 0;
            std::vector<std::size_t> zero;
            for (std::size_t i = 0; i < proj.size(); ++i) {
                BigInt v = offset;
                for (std::size_t c = 0; c < k; ++c) v += normal[c] * proj[i][c];
                int s = sign(v);
                if (s == 0) {
                    zero.push_back(i);
                } else if (side == 0) {
                    side = s;
                } else if (s != side) {
                    return;
                }
            }
            if (side == 0) return;  // cannot happen for a k-dimensional set
            if (!seen.insert(zero).second) return;
            if (side < 0) {
                for (auto& x : normal) x = -x;
                offset = -offset;
            }
            facets_.push_back(Facet{std::move(zero), std::move(normal), std::move(offset)});
        };

        if (points_.size() == k + 1) {
            // simplex: every k-subset is a facet
            for (std::size_t skip = 0; skip <= k; ++skip) {
                std::vector<std::size_t> subset;
                for (std::size_t i = 0; i <= k; ++i)
                    if (i != skip) subset.push_back(i);
                consider(subset);
            }
        } else {
            for (const auto& subset : detail::combinations(points_.size(), k)) {
                bool covered = false;
                for (const auto& f : facets_) {
                    if (std::includes(f.vertices.begin(), f.vertices.end(), subset.begin(), subset.end())) {
                        covered = true;
                        break;
                    }
                }
                if (!covered) consider(subset);
            }
        }
        std::sort(facets_.begin(), facets_.end(),
                  [](const Facet& a, const Facet& b) { return a.vertices < b.vertices; });
    }

    std::vector<LatticePoint> points_;
    std::size_t ambient_ = 0;
    std::size_t dim_ = 0;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> frame_;
    std::vector<Facet> facets_;
};

/// Vertices of the convex hull of `points` (duplicates removed), sorted.
inline std::vector<LatticePoint> hull_vertices(std::vector<LatticePoint> points)
{
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    HRep h(points);
    std::vector<LatticePoint> out;
    for (auto i : h.vertex_indices()) out.push_back(points[i]);
    return out;
}

/// A lattice polytope given by exactly its vertex set.
class CellPolytope {
public:
    CellPolytope() = default;

    /// Throws DomainError if some listed point is not a vertex of the hull.
    explicit CellPolytope(std::vector<LatticePoint> vertices) : vertices_(std::move(vertices))
    {
        std::sort(vertices_.begin(), vertices_.end());
        if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
            throw DomainError("cell polytope: repeated vertex");
        hrep_ = HRep(vertices_);
        if (hrep_.vertex_indices().size() != vertices_.size())
            throw DomainError("cell polytope: listed point is not a vertex");
    }

    static CellPolytope hull_of(std::vector<LatticePoint> points)
    {
        return CellPolytope(hull_vertices(std::move(points)));
    }

    const std::vector<LatticePoint>& vertices() const { return vertices_; }
    std::size_t dim() const { return hrep_.dim(); }
    std::size_t ambient_dim() const { return hrep_.ambient_dim(); }
    const HRep& hrep() const { return hrep_; }
    bool is_simplex() const { return vertices_.size() == dim() + 1; }

    friend bool operator==(const CellPolytope& a, const CellPolytope& b) { return a.vertices_ == b.vertices_; }
    friend bool operator<(const CellPolytope& a, const CellPolytope& b) { return a.vertices_ < b.vertices_; }

private:
    std::vector<LatticePoint> vertices_;
    HRep hrep_;
};

/// Normalized volume (k! vol) of a lattice k-simplex relative to the lattice of
/// its affine hull: |det| when full-dimensional, else the gcd of the maximal
/// minors of the edge matrix.
inline BigInt lattice_volume(std::span<const LatticePoint> simplex)
{
    if (simplex.empty()) throw std::invalid_argument("lattice_volume of an empty simplex");
    const std::size_t k = simplex.size() - 1;
    const std::size_t d = simplex[0].dim();
    if (k > d) throw SingularityError("too many vertices for a simplex");
    if (k == 0) return 1;
    IntMatrix edges(k, d);
    for (std::size_t r = 0; r < k; ++r) {
        if (simplex[r + 1].dim() != d) throw DimensionError("lattice_volume: mixed dimensions");
        for (std::size_t c = 0; c < d; ++c) edges(r, c) = simplex[r + 1][c] - simplex[0][c];
    }
    BigInt g = 0;
    for (const auto& cols : detail::combinations(d, k)) {
        IntMatrix m(k, k);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t j = 0; j < k; ++j) m(r, j) = edges(r, cols[j]);
        g = gcd(g, det(std::move(m)));
    }
    return g;
}

inline BigInt lattice_volume(const std::vector<LatticePoint>& simplex)
{
    return lattice_volume(std::span<const LatticePoint>(simplex));
}

/// nvol of a full-dimensional lattice simplex: |det(v_0 .. v_n ; -1 .. -1)|.
inline BigInt nvol(const LatticeSimplex& s)
{
    if (!s.full_dimensional()) throw SingularityError("nvol: simplex is not full-dimensional");
    const std::size_t n = s.ambient_dim();
    IntMatrix m(n + 1, n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i < n; ++i) m(i, j) = s.vertices()[j][i];
        m(n, j) = -1;
    }
    BigInt v = abs(det(std::move(m)));
    if (v == 0) throw SingularityError("nvol: zero volume");
    return v;
}

/// Triangulates a cell by recursive coning from its smallest vertex over the
/// facets avoiding it. Returns vertex-index simplices into cell.vertices().
inline std::vector<std::vector<std::size_t>> cone_triangulation(const std::vector<LatticePoint>& vertices)
{
    std::vector<std::vector<std::size_t>> out;
    HRep h(vertices);
    if (vertices.size() == h.dim() + 1) {
        std::vector<std::size_t> all(vertices.size());
        std::iota(all.begin(), all.end(), 0);
        out.push_back(std::move(all));
        return out;
    }
    const std::size_t apex = 0;
    for (const auto& f : h.facets()) {
        if (std::binary_search(f.vertices.begin(), f.vertices.end(), apex)) continue;
        std::vector<LatticePoint> sub;
        for (auto i : f.vertices) sub.push_back(vertices[i]);
        for (auto simplex : cone_triangulation(sub)) {
            std::vector<std::size_t> mapped{apex};
            for (auto i : simplex) mapped.push_back(f.vertices[i]);
            out.push_back(std::move(mapped));
        }
    }
    return out;
}

/// Normalized volume of a lattice polytope (relative to its affine lattice).
inline BigInt lattice_volume_of_cell(const std::vector<LatticePoint>& vertices)
{
    BigInt total = 0;
    for (const auto& simplex : cone_triangulation(vertices)) {
        std::vector<LatticePoint> pts;
        for (auto i : simplex) pts.push_back(vertices[i]);
        total += lattice_volume(pts);
    }
    return total;
}

/// The d+1 facet half-spaces of a full-dimensional simplex; entry i is the
/// facet opposite vertex i. Normalized to offset 1 when 0 is strictly inside,
/// otherwise a primitive integer normal with integer offset.
inline std::vector<HalfSpace> halfspaces(const LatticeSimplex& s)
{
    if (!s.full_dimensional()) throw SingularityError("halfspaces: simplex is not full-dimensional");
    const auto& vs = s.vertices();
    const std::size_t d = s.ambient_dim();
    std::vector<HalfSpace> out;
    std::vector<std::vector<BigInt>> normals;
    std::vector<BigInt> offsets;
    bool origin_inside = true;
    for (std::size_t skip = 0; skip <= d; ++skip) {
        std::vector<std::vector<BigInt>> pts;
        for (std::size_t i = 0; i <= d; ++i)
            if (i != skip) pts.emplace_back(vs[i].begin(), vs[i].end());
        auto normal = detail::hyperplane_normal(pts);
        BigInt g = detail::content(normal);
        for (auto& x : normal) x /= g;
        BigInt offset = -dot(std::span<const BigInt>(normal), LatticePoint(pts[0]));
        if (sign(dot(std::span<const BigInt>(normal), vs[skip]) + offset) < 0) {
            for (auto& x : normal) x = -x;
            offset = -offset;
        }
        if (sign(offset) <= 0) origin_inside = false;
        normals.push_back(std::move(normal));
        offsets.push_back(std::move(offset));
    }
    for (std::size_t i = 0; i <= d; ++i) {
        HalfSpace h;
        BigRat scale = origin_inside ? BigRat(1, offsets[i]) : BigRat(1);
        for (const auto& x : normals[i]) h.normal.push_back(BigRat(x) * scale);
        h.offset = BigRat(offsets[i]) * scale;
        out.push_back(std::move(h));
    }
    return out;
}

inline bool origin_strictly_inside(const LatticeSimplex& s)
{
    for (const auto& h : halfspaces(s))
        if (sign(h.offset) <= 0) return false;
    return true;
}

/// Polar dual {y : <x, y> + 1 >= 0 for all x in s}. Vertex i is the normal of
/// the facet opposite vertex i of s.
struct PolarDual {
    std::vector<RationalPoint> vertices;

    bool is_lattice() const
    {
        return std::all_of(vertices.begin(), vertices.end(), [](const RationalPoint& p) { return p.is_integral(); });
    }
    /// Throws DomainError when some dual vertex is not integral.
    LatticeSimplex lattice() const
    {
        std::vector<LatticePoint> pts;
        for (const auto& v : vertices) pts.push_back(v.to_lattice());
        return LatticeSimplex(std::move(pts));
    }
};

inline PolarDual polar_dual(const LatticeSimplex& s)
{
    if (!s.full_dimensional()) throw DomainError("polar_dual: simplex is not full-dimensional");
    auto hs = halfspaces(s);
    PolarDual out;
    for (const auto& h : hs) {
        if (sign(h.offset) <= 0) throw DomainError("polar_dual: 0 is not in the interior");
        out.vertices.emplace_back(h.normal);
    }
    return out;
}

/// Polar dual of a rational simplex with 0 inside (used to check the involution).
inline std::vector<RationalPoint> polar_dual(const std::vector<RationalPoint>& vertices)
{
    const std::size_t d = vertices.empty() ? 0 : vertices[0].dim();
    if (vertices.size() != d + 1) throw DomainError("polar_dual: need d+1 vertices");
    std::vector<RationalPoint> out;
    for (std::size_t skip = 0; skip <= d; ++skip) {
        // u with <u, v_i> = -1 for every i != skip
        Matrix a(d, d);
        std::size_t r = 0;
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == skip) continue;
            for (std::size_t c = 0; c < d; ++c) a(r, c) = vertices[i][c];
            ++r;
        }
        std::vector<BigRat> u;
        try {
            u = solve(std::move(a), std::vector<BigRat>(d, BigRat(-1)));
        } catch (const SingularityError&) {
            throw DomainError("polar_dual: 0 lies on a facet hyperplane");
        }
        RationalPoint up(u);
        if (sign(dot(std::span<const BigRat>(u), vertices[skip]) + 1) <= 0)
            throw DomainError("polar_dual: 0 is not in the interior");
        out.push_back(std::move(up));
    }
    return out;
}

/// All nonempty proper faces, graded by dimension (then by vertex list). Each
/// face is the closure of an intersection of facets and is certified by the
/// summed facet inequality, which vanishes exactly on it.
inline std::vector<CellPolytope> faces(const CellPolytope& c)
{
    const auto& h = c.hrep();
    const auto& fs = h.facets();
    const std::size_t nv = c.vertices().size();

    auto closure = [&](const std::vector<std::size_t>& subset) {
        std::vector<std::size_t> result(nv);
        std::iota(result.begin(), result.end(), 0);
        for (const auto& f : fs) {
            if (!std::includes(f.vertices.begin(), f.vertices.end(), subset.begin(), subset.end())) continue;
            std::vector<std::size_t> tmp;
            std::set_intersection(result.begin(), result.end(), f.vertices.begin(), f.vertices.end(),
                                  std::back_inserter(tmp));
            result = std::move(tmp);
        }
        return result;
    };

    std::set<std::vector<std::size_t>> found;
    std::vector<std::vector<std::size_t>> frontier;
    for (const auto& f : fs)
        if (found.insert(f.vertices).second) frontier.push_back(f.vertices);
    while (!frontier.empty()) {
        auto g = std::move(frontier.back());
        frontier.pop_back();
        for (const auto& f : fs) {
            std::vector<std::size_t> meet;
            std::set_intersection(g.begin(), g.end(), f.vertices.begin(), f.vertices.end(), std::back_inserter(meet));
            if (meet.empty() || meet == g) continue;
            auto cl = closure(meet);
            if (found.insert(cl).second) frontier.push_back(std::move(cl));
        }
    }

    std::vector<CellPolytope> out;
    for (const auto& vs : found) {
        // certificate: the sum of the facet inequalities containing the face
        std::vector<BigInt> normal(h.dim(), BigInt(0));
        BigInt offset = 0;
        for (const auto& f : fs) {
            if (!std::includes(f.vertices.begin(), f.vertices.end(), vs.begin(), vs.end())) continue;
            for (std::size_t i = 0; i < normal.size(); ++i) normal[i] += f.normal[i];
            offset += f.offset;
        }
        for (std::size_t i = 0; i < nv; ++i) {
            BigInt val = offset;
            auto p = h.project(c.vertices()[i]);
            for (std::size_t j = 0; j < normal.size(); ++j) val += normal[j] * p[j];
            bool on = std::binary_search(vs.begin(), vs.end(), i);
            if (on != (val == 0) || val < 0) throw VerificationError("faces: supporting hyperplane certificate failed");
        }
        std::vector<LatticePoint> pts;
        for (auto i : vs) pts.push_back(c.vertices()[i]);
        out.emplace_back(std::move(pts));
    }
    std::stable_sort(out.begin(), out.end(), [](const CellPolytope& a, const CellPolytope& b) {
        if (a.dim() != b.dim()) return a.dim() < b.dim();
        return a < b;
    });
    return out;
}

inline Membership contains(const HRep& h, const RationalPoint& p) { return h.classify(p); }
inline Membership contains(const CellPolytope& c, const RationalPoint& p) { return c.hrep().classify(p); }
inline Membership contains(const LatticeSimplex& s, const RationalPoint& p) { return HRep(s.vertices()).classify(p); }

inline constexpr std::uint64_t default_bruteforce_limit = 10'000'000;

/// Every lattice point of the polytope, by scanning its bounding box. Refuses
/// (FeasibilityError) rather than approximating when the box is too large.
inline std::vector<LatticePoint> lattice_points_bruteforce(const HRep& h,
                                                           std::uint64_t limit = default_bruteforce_limit)
{
    const auto& pts = h.points();
    const std::size_t d = h.ambient_dim();
    std::vector<BigInt> lo(d), hi(d);
    for (std::size_t c = 0; c < d; ++c) {
        lo[c] = hi[c] = pts[0][c];
        for (const auto& p : pts) {
            if (p[c] < lo[c]) lo[c] = p[c];
            if (p[c] > hi[c]) hi[c] = p[c];
        }
    }
    BigInt box = 1;
    for (std::size_t c = 0; c < d; ++c) box *= hi[c] - lo[c] + 1;
    if (box > limit)
        throw FeasibilityError("lattice_points_bruteforce: bounding box has " + box.str() +
                               " candidates, limit is " + std::to_string(limit));
    std::vector<LatticePoint> out;
    LatticePoint cur(lo);
    while (true) {
        if (h.classify(RationalPoint(cur)) != Membership::outside) out.push_back(cur);
        std::size_t c = d;
        while (c > 0) {
            --c;
            if (cur[c] < hi[c]) {
                ++cur[c];
                for (std::size_t j = c + 1; j < d; ++j) cur[j] = lo[j];
                break;
            }
            if (c == 0) return out;  // odometer exhausted; already sorted lexicographically
        }
        if (d == 0) return out;
    }
}

inline std::vector<LatticePoint> lattice_points_bruteforce(const CellPolytope& c,
                                                           std::uint64_t limit = default_bruteforce_limit)
{
    return lattice_points_bruteforce(c.hrep(), limit);
}

inline std::vector<LatticePoint> lattice_points_bruteforce(const LatticeSimplex& s,
                                                           std::uint64_t limit = default_bruteforce_limit)
{
    return lattice_points_bruteforce(HRep(s.vertices()), limit);
}

/// Every lattice point of a full-dimensional polytope, sorted. Enumerates the
/// projection dropping the last coordinate recursively, then reads the integer
/// range of each fiber off the facet inequalities, so the cost follows the
/// number of lattice points rather than the bounding box. Lower-dimensional
/// input falls back to the box scan.
inline std::vector<LatticePoint> lattice_points_by_fibers(const std::vector<LatticePoint>& vertices)
{
    HRep h(vertices);
    const std::size_t d = h.ambient_dim();
    if (h.dim() != d || d == 0) return lattice_points_bruteforce(h);
    if (d == 1) {
        BigInt lo = vertices[0][0], hi = vertices[0][0];
        for (const auto& v : vertices) {
            if (v[0] < lo) lo = v[0];
            if (v[0] > hi) hi = v[0];
        }
        std::vector<LatticePoint> out;
        for (BigInt t = lo; t <= hi; ++t) out.push_back(LatticePoint(std::vector<BigInt>{t}));
        return out;
    }
    std::vector<LatticePoint> shadow;
    shadow.reserve(vertices.size());
    for (const auto& v : vertices) shadow.push_back(v.dropped_last());
    std::vector<LatticePoint> out;
    for (const auto& y : lattice_points_by_fibers(hull_vertices(std::move(shadow)))) {
        std::optional<BigInt> lo, hi;
        bool empty = false;
        for (const auto& f : h.facets()) {
            BigInt rest = f.offset;
            for (std::size_t j = 0; j + 1 < d; ++j) rest += f.normal[j] * y[j];
            const BigInt& a = f.normal[d - 1];
            if (a == 0) {
                if (rest < 0) empty = true;
            } else if (a > 0) {
                BigInt b = ceil_div(-rest, a);
                if (!lo || b > *lo) lo = b;
            } else {
                BigInt b = floor_div(rest, -a);
                if (!hi || b < *hi) hi = b;
            }
        }
        if (empty || !lo || !hi) continue;
        for (BigInt t = *lo; t <= *hi; ++t) out.push_back(y.appended(t));
    }
    return out;
}

} // namespace sylv

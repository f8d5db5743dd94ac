#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sylv/error.hpp"
#include "sylv/exact.hpp"
#include "sylv/polytope.hpp"
#include "sylv/subdivision.hpp"
#include "sylv/sylvester.hpp"

namespace sylv {

// ---------------------------------------------------------------------------
// Fans over boundary cells

struct FanFlags {
    bool complete = false;
    bool smooth = false;
    bool crepant = false;
    bool primitive = false;  // every ray is a primitive lattice vector
};

/// Cones from the origin over the boundary facets of a triangulation.
struct ResolutionFan {
    std::vector<LatticePoint> rays;                // sorted, distinct
    std::vector<std::vector<std::size_t>> cones;   // sorted ray indices, sorted
    FanFlags flags;
    std::vector<std::string> problems;             // one line per failed check

    std::size_t dim() const { return rays.empty() ? 0 : rays[0].dim(); }
};

namespace detail {

inline bool is_primitive(const LatticePoint& p)
{
    BigInt g = 0;
    for (const auto& c : p) g = gcd(g, c);
    return g == 1;
}

inline BigInt cone_det(const std::vector<LatticePoint>& rays, const std::vector<std::size_t>& cone)
{
    const std::size_t d = rays[cone[0]].dim();
    IntMatrix m(d, d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) m(i, j) = rays[cone[j]][i];
    return abs(det(std::move(m)));
}

} // namespace detail

/// Every cell facet lying in the boundary of the ambient simplex spans a cone.
/// The flags are computed: smooth when every cone has |det| = 1, complete when
/// the cone volumes add up to nvol of the polytope, crepant when every ray
/// attains <u, r> + 1 = 0 on some facet inequality <u, x> + 1 >= 0.
/// Throws DomainError when 0 is not strictly inside the polytope.
inline ResolutionFan fan_from_triangulation(const Triangulation& t, unsigned threads = 0)
{
    const std::size_t d = t.ambient_dim();
    if (t.dim() != d) throw DimensionError("fan: triangulation is not full-dimensional");
    LatticeSimplex outer(t.ambient());
    if (!outer.full_dimensional() || t.ambient().size() != d + 1)
        throw DomainError("fan: the ambient polytope is not a full-dimensional simplex");
    if (!origin_strictly_inside(outer)) throw DomainError("fan: 0 is not in the interior of the polytope");
    const auto hs = halfspaces(outer);  // offsets normalized to 1

    auto on_facet = [&](const LatticePoint& p, std::size_t f) { return sign(hs[f](RationalPoint(p))) == 0; };

    std::map<PointId, std::size_t> ray_of;
    std::vector<std::vector<PointId>> facets;
    const auto& cells = t.cells();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto cell = cells[c];
        for (std::size_t skip = 0; skip < cell.size(); ++skip) {
            std::vector<PointId> f;
            for (std::size_t j = 0; j < cell.size(); ++j)
                if (j != skip) f.push_back(cell[j]);
            bool boundary = false;
            for (std::size_t h = 0; h < hs.size() && !boundary; ++h)
                boundary = std::all_of(f.begin(), f.end(), [&](PointId p) { return on_facet(t.store()[p], h); });
            if (!boundary) continue;
            for (auto p : f) ray_of.emplace(p, 0);
            facets.push_back(std::move(f));
        }
    }

    ResolutionFan fan;
    for (auto& [p, index] : ray_of) {
        index = fan.rays.size();
        fan.rays.push_back(t.store()[p]);
    }
    for (const auto& f : facets) {
        std::vector<std::size_t> cone;
        for (auto p : f) cone.push_back(ray_of.at(p));
        std::sort(cone.begin(), cone.end());
        fan.cones.push_back(std::move(cone));
    }
    std::sort(fan.cones.begin(), fan.cones.end());

    fan.flags.primitive = true;
    for (const auto& r : fan.rays)
        if (!detail::is_primitive(r)) {
            fan.flags.primitive = false;
            fan.problems.push_back("ray " + to_string(r) + " is not primitive");
        }

    fan.flags.crepant = true;
    for (const auto& r : fan.rays) {
        std::optional<BigRat> least;
        for (const auto& h : hs) {
            BigRat v = h(RationalPoint(r));
            if (!least || v < *least) least = v;
        }
        if (*least != 0) {
            fan.flags.crepant = false;
            fan.problems.push_back("ray " + to_string(r) + " is off the boundary (min <u, r> + 1 = " + to_string(*least) + ")");
        }
    }

    std::vector<BigInt> dets(fan.cones.size());
    parallel_for(fan.cones.size(), threads, [&](std::size_t i) { dets[i] = detail::cone_det(fan.rays, fan.cones[i]); });
    fan.flags.smooth = true;
    BigInt total = 0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        total += dets[i];
        if (dets[i] != 1) {
            if (fan.flags.smooth)
                fan.problems.push_back("cone " + std::to_string(i) + " has |det| = " + dets[i].str());
            fan.flags.smooth = false;
        }
    }
    const BigInt volume = nvol(outer);
    fan.flags.complete = total == volume;
    if (!fan.flags.complete)
        fan.problems.push_back("cone volumes add up to " + total.str() + ", the polytope has nvol " + volume.str());
    return fan;
}

inline nlohmann::ordered_json to_json(const ResolutionFan& fan)
{
    nlohmann::ordered_json j;
    j["rays"] = nlohmann::ordered_json::array();
    for (const auto& r : fan.rays) {
        auto row = nlohmann::ordered_json::array();
        for (const auto& c : r) row.push_back(c.str());
        j["rays"].push_back(std::move(row));
    }
    j["cones"] = fan.cones;
    j["flags"] = {{"complete", fan.flags.complete},
                  {"smooth", fan.flags.smooth},
                  {"crepant", fan.flags.crepant},
                  {"primitive", fan.flags.primitive}};
    return j;
}

// ---------------------------------------------------------------------------
// Closed-form invariants

/// (s_{n-1} - 1)(2 s_{n-1} - 3)
inline BigInt index_formula(std::size_t n)
{
    if (n < 1) throw DomainError("index_formula: n must be at least 1");
    const BigInt s = sylvester(n - 1);
    return (s - 1) * (2 * s - 3);
}

struct InvariantReport {
    std::size_t n = 0;
    int family = 1;
    BigInt index;
    BigInt betti_sum;
    BigInt euler;
    // middle Betti number h^n of each family; closed form for odd n only
    std::optional<BigInt> middle_hodge_i1;
    std::optional<BigInt> middle_hodge_i2;
};

namespace detail {

/// (s_0 - 1) ... (s_k - 1)
inline BigInt shifted_product(std::size_t k)
{
    BigInt p = 1;
    for (std::size_t i = 0; i <= k; ++i) p *= sylvester(i) - 1;
    return p;
}

} // namespace detail

/// Betti sum 2 (s_0 - 1) ... (s_n - 1), equal to the Euler characteristic for
/// even n. For odd n the middle number and Euler characteristic depend on the
/// family i (1 or 2), with euler = betti_sum - 2 h^n.
inline InvariantReport betti_euler(std::size_t n, int i = 1)
{
    if (n < 1) throw DomainError("betti_euler: n must be at least 1");
    if (i != 1 && i != 2) throw DomainError("betti_euler: family must be 1 or 2");
    InvariantReport r;
    r.n = n;
    r.family = i;
    r.index = index_formula(n);
    const BigInt below = detail::shifted_product(n - 1);
    const BigInt sn = sylvester(n);
    r.betti_sum = 2 * below * (sn - 1);
    if (n % 2 == 0) {
        r.euler = r.betti_sum;
        return r;
    }
    r.middle_hodge_i1 = below * (2 * sn - 4);
    r.middle_hodge_i2 = below * (sn - 1);
    r.euler = i == 1 ? BigInt(-below * (2 * sn - 6)) : BigInt(0);
    const BigInt& h = i == 1 ? *r.middle_hodge_i1 : *r.middle_hodge_i2;
    if (r.euler != r.betti_sum - 2 * h)
        throw VerificationError("betti_euler: Euler characteristic disagrees with the middle Betti number");
    return r;
}

/// h^{p,q} for 0 <= p, q <= n.
struct HodgeDiamond {
    std::size_t n = 0;
    int family = 1;
    std::vector<std::vector<BigInt>> h;

    const BigInt& at(std::size_t p, std::size_t q) const { return h.at(p).at(q); }

    BigInt total() const
    {
        BigInt s = 0;
        for (const auto& row : h)
            for (const auto& x : row) s += x;
        return s;
    }
    BigInt alternating_sum() const
    {
        BigInt s = 0;
        for (std::size_t p = 0; p <= n; ++p)
            for (std::size_t q = 0; q <= n; ++q) s += (p + q) % 2 == 0 ? h[p][q] : BigInt(-h[p][q]);
        return s;
    }

    /// Diamond layout, row k holding h^{p,q} with p + q = k from p = k down.
    std::string to_text() const
    {
        std::vector<std::vector<std::string>> rows;
        std::size_t width = 1;
        for (std::size_t k = 0; k <= 2 * n; ++k) {
            std::vector<std::string> row;
            for (std::size_t p = std::min(k, n) + 1; p-- > 0;) {
                if (k - p > n) break;
                row.push_back(h[p][k - p].str());
                width = std::max(width, row.back().size());
            }
            rows.push_back(std::move(row));
        }
        // entries sit on a grid of 2n + 1 columns, row k starting at column |n - k|
        std::ostringstream out;
        for (const auto& row : rows) {
            const std::size_t start = n + 1 - row.size();
            std::string line;
            for (std::size_t j = 0; j < row.size(); ++j) {
                const std::size_t col = start + 2 * j;
                line.resize(col * (width + 1), ' ');
                line += std::string(width - row[j].size(), ' ') + row[j];
            }
            out << line << '\n';
        }
        return out.str();
    }

    /// p,q,h rows
    std::string to_csv() const
    {
        std::ostringstream out;
        out << "p,q,h\n";
        for (std::size_t p = 0; p <= n; ++p)
            for (std::size_t q = 0; q <= n; ++q) out << p << ',' << q << ',' << h[p][q] << '\n';
        return out.str();
    }
};

namespace detail {

/// Builds h^{p,q} from h^{k,k} (k = 0..n) and the middle row h^{n,0}..h^{0,n};
/// everything else vanishes.
inline HodgeDiamond hodge_from(std::size_t n, int i, std::vector<long> diagonal, std::vector<long> middle)
{
    HodgeDiamond d;
    d.n = n;
    d.family = i;
    d.h.assign(n + 1, std::vector<BigInt>(n + 1, BigInt(0)));
    for (std::size_t k = 0; k <= n; ++k) d.h[k][k] = diagonal[k];
    for (std::size_t p = 0; p <= n; ++p) {
        const BigInt v = middle[n - p];
        if (p == n - p && d.h[p][p] != v) throw std::logic_error("hodge table: inconsistent middle entry");
        d.h[p][n - p] = v;
    }
    return d;
}

} // namespace detail

/// Tabulated diamonds of the crepant resolutions in dimensions 3 and 4,
/// checked against betti_euler before being returned.
inline HodgeDiamond hodge_diamond(std::size_t n, int i)
{
    if (i != 1 && i != 2) throw DomainError("hodge_diamond: family must be 1 or 2");
    HodgeDiamond d;
    if (n == 3 && i == 1) d = detail::hodge_from(3, 1, {1, 11, 11, 1}, {1, 491, 491, 1});
    else if (n == 3 && i == 2) d = detail::hodge_from(3, 2, {1, 251, 251, 1}, {1, 251, 251, 1});
    else if (n == 4 && i == 1) d = detail::hodge_from(4, 1, {1, 252, 1213644, 252, 1}, {1, 303148, 1213644, 303148, 1});
    else if (n == 4 && i == 2) d = detail::hodge_from(4, 2, {1, 151700, 1213644, 151700, 1}, {1, 151700, 1213644, 151700, 1});
    else throw DomainError("hodge_diamond: only n = 3 and n = 4 are tabulated (got n = " + std::to_string(n) + ")");
    auto r = betti_euler(n, i);
    if (d.total() != r.betti_sum || d.alternating_sum() != r.euler)
        throw VerificationError("hodge_diamond: table does not reconcile with betti_euler");
    return d;
}

} // namespace sylv

#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sylv/error.hpp"
#include "sylv/exact.hpp"
#include "sylv/numbers.hpp"
#include "sylv/subdivision.hpp"

namespace sylv {

/// One value per point-store entry. The subdivision is regular when the lower
/// hull of the lifted points projects onto exactly its cells.
struct RegularityWitness {
    std::vector<BigRat> values;

    const BigRat& operator[](PointId i) const { return values[i]; }
    BigRat& operator[](PointId i) { return values[i]; }
    std::size_t size() const { return values.size(); }
    friend bool operator==(const RegularityWitness&, const RegularityWitness&) = default;
};

struct Violation {
    std::size_t cell;
    PointId point;
    BigRat margin;  // w(p) - A_cell(p); must be > 0 off the cell
};

struct CertificateReport {
    bool regular = false;
    std::string mode;  // "full" or "local+sampled"
    std::uint64_t checked_pairs = 0;
    std::vector<Violation> violations;
};

enum class RegularityMode { full, local };

struct RegularityOptions {
    RegularityMode mode = RegularityMode::full;
    unsigned threads = 0;
    std::uint64_t sample_pairs = 1'000'000;  // local mode: extra random (cell, point) pairs
    std::uint64_t seed = 20240601;
    std::size_t max_violations = 50;
};

namespace detail {

/// d+1 affinely independent vertices of a full-dimensional cell (all of them
/// for a simplex), chosen greedily in order.
inline std::vector<std::size_t> affine_basis(const std::vector<LatticePoint>& pts, std::size_t d)
{
    std::vector<std::size_t> basis{0};
    if (pts.size() == d + 1) {
        basis.resize(d + 1);
        std::iota(basis.begin(), basis.end(), 0);
        return basis;
    }
    std::vector<LatticePoint> chosen{pts[0]};
    for (std::size_t i = 1; i < pts.size() && basis.size() < d + 1; ++i) {
        chosen.push_back(pts[i]);
        if (affine_rank(chosen) == basis.size()) {
            basis.push_back(i);
        } else {
            chosen.pop_back();
        }
    }
    if (basis.size() != d + 1) throw SingularityError("cell is not full-dimensional");
    return basis;
}

inline AffineFunctional cell_functional(const Subdivision& s, std::size_t cell, const RegularityWitness& w)
{
    auto span = s.cells()[cell];
    std::vector<LatticePoint> pts;
    for (auto id : span) pts.push_back(s.store()[id]);
    auto basis = affine_basis(pts, s.dim());
    std::vector<LatticePoint> vs;
    std::vector<BigRat> vals;
    for (auto k : basis) {
        vs.push_back(pts[k]);
        vals.push_back(w[span[k]]);
    }
    return affine_interpolant(vs, vals);
}

} // namespace detail

/// Checks the witness against every maximal cell: with A the affine function
/// interpolating w on the cell's vertices, every vertex must satisfy A = w,
/// other points of the closed cell A <= w, and every point outside A < w.
/// Full mode tests all (cell, point) pairs; local mode tests the strict fold
/// across every interior facet (which implies global convexity) plus a random
/// exact sample of pairs, and requires a simplicial subdivision.
inline CertificateReport verify_regularity(const Subdivision& s, const RegularityWitness& w,
                                           const RegularityOptions& opt = {})
{
    if (w.size() != s.store().size()) throw DimensionError("witness size does not match the point store");
    if (s.dim() != s.ambient_dim()) throw DimensionError("regularity: subdivision must be full-dimensional");
    CertificateReport rep;
    const std::size_t n = s.cells().size();
    const std::size_t np = s.store().size();
    std::mutex mutex;
    std::atomic<std::uint64_t> pairs{0};

    auto record = [&](std::size_t cell, PointId p, const AffineFunctional& a) {
        std::lock_guard lock(mutex);
        if (rep.violations.size() < opt.max_violations)
            rep.violations.push_back({cell, p, w[p] - a(s.store()[p])});
    };

    // pair check shared by both modes
    auto check_pair = [&](std::size_t c, const AffineFunctional& a, std::optional<HRep>& h, PointId p) {
        auto span = s.cells()[c];
        int cmp = a.compare(s.store()[p], w[p]);
        if (cmp < 0) return;
        if (std::binary_search(span.begin(), span.end(), p)) {
            if (cmp != 0) record(c, p, a);
            return;
        }
        if (!h) h.emplace(s.cell_points(c));
        if (cmp == 0 && h->classify(s.store()[p]) != Membership::outside) return;
        record(c, p, a);
    };

    if (opt.mode == RegularityMode::full) {
        rep.mode = "full";
        parallel_for(n, opt.threads, [&](std::size_t c) {
            auto a = detail::cell_functional(s, c, w);
            std::optional<HRep> h;
            for (std::size_t p = 0; p < np; ++p) check_pair(c, a, h, static_cast<PointId>(p));
            pairs += np;
        });
    } else {
        rep.mode = "local+sampled";
        if (!s.all_simplices()) throw DomainError("local regularity check needs a simplicial subdivision");
        const std::size_t d = s.dim();
        std::vector<AffineFunctional> fs(n);
        parallel_for(n, opt.threads, [&](std::size_t c) {
            fs[c] = detail::cell_functional(s, c, w);
            auto span = s.cells()[c];
            for (auto v : span)
                if (fs[c].compare(s.store()[v], w[v]) != 0) record(c, v, fs[c]);
        });
        // facets as (cell, omitted vertex position), sorted by the implied key
        std::vector<std::pair<CellId, std::uint8_t>> facets;
        facets.reserve(n * (d + 1));
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t k = 0; k <= d; ++k) facets.emplace_back(static_cast<CellId>(c), static_cast<std::uint8_t>(k));
        auto key_less = [&](const std::pair<CellId, std::uint8_t>& x, const std::pair<CellId, std::uint8_t>& y) {
            auto a = s.cells()[x.first], b = s.cells()[y.first];
            std::size_t i = 0, j = 0;
            for (std::size_t k = 0; k < d; ++k, ++i, ++j) {
                if (i == x.second) ++i;
                if (j == y.second) ++j;
                if (a[i] != b[j]) return a[i] < b[j];
            }
            return x.first < y.first;
        };
        auto same_key = [&](const std::pair<CellId, std::uint8_t>& x, const std::pair<CellId, std::uint8_t>& y) {
            auto a = s.cells()[x.first], b = s.cells()[y.first];
            std::size_t i = 0, j = 0;
            for (std::size_t k = 0; k < d; ++k, ++i, ++j) {
                if (i == x.second) ++i;
                if (j == y.second) ++j;
                if (a[i] != b[j]) return false;
            }
            return true;
        };
        std::sort(facets.begin(), facets.end(), key_less);
        for (std::size_t i = 0; i + 1 < facets.size(); ++i) {
            if (!same_key(facets[i], facets[i + 1])) continue;
            auto [c1, k1] = facets[i];
            auto [c2, k2] = facets[i + 1];
            PointId q2 = s.cells()[c2][k2], q1 = s.cells()[c1][k1];
            if (fs[c1].compare(s.store()[q2], w[q2]) >= 0) record(c1, q2, fs[c1]);
            if (fs[c2].compare(s.store()[q1], w[q1]) >= 0) record(c2, q1, fs[c2]);
            pairs += 2;
        }
        if (n > 0 && np > 0) {
            std::mt19937_64 rng(opt.seed);
            std::uniform_int_distribution<std::size_t> pick_cell(0, n - 1), pick_point(0, np - 1);
            const std::uint64_t total = std::min<std::uint64_t>(opt.sample_pairs, std::uint64_t(n) * np);
            for (std::uint64_t k = 0; k < total; ++k) {
                std::size_t c = pick_cell(rng);
                std::optional<HRep> h;
                check_pair(c, fs[c], h, static_cast<PointId>(pick_point(rng)));
            }
            pairs += total;
        }
    }
    rep.checked_pairs = pairs;
    std::sort(rep.violations.begin(), rep.violations.end(),
              [](const Violation& a, const Violation& b) { return std::tie(a.cell, a.point) < std::tie(b.cell, b.point); });
    rep.regular = rep.violations.empty();
    return rep;
}

/// w o pi: the value at (y, t) is the base value at y.
inline RegularityWitness witness_pullback(const RegularityWitness& base_w, const PointStore& base,
                                          const PointStore& lifted)
{
    RegularityWitness out;
    out.values.reserve(lifted.size());
    for (const auto& p : lifted.points()) {
        auto id = base.find(p.dropped_last());
        if (!id) throw DomainError("witness pullback: " + to_string(p) + " projects outside the base store");
        out.values.push_back(base_w[*id]);
    }
    return out;
}

/// Base values kept, omega at the apex. The cone store may not contain any
/// point other than the base points and the apex.
inline RegularityWitness witness_cone(const RegularityWitness& base_w, const PointStore& base, const PointStore& cone,
                                      const LatticePoint& z, const BigRat& omega)
{
    RegularityWitness out;
    out.values.reserve(cone.size());
    for (const auto& p : cone.points()) {
        if (p == z) {
            out.values.push_back(omega);
            continue;
        }
        auto id = base.find(p);
        if (!id) throw DomainError("witness cone: store point " + to_string(p) + " is neither a base point nor the apex");
        out.values.push_back(base_w[*id]);
    }
    return out;
}

/// Witness for the union of S- (carrying w_minus) and a cone over the common
/// facet with apex z: omega = 1 + max over cells of S- of their affine
/// extension evaluated at z.
inline std::pair<RegularityWitness, BigRat> witness_glue(const RegularityWitness& w_minus, const Subdivision& minus,
                                                         const PointStore& glued, const LatticePoint& z)
{
    std::optional<BigRat> top;
    for (std::size_t c = 0; c < minus.cells().size(); ++c) {
        BigRat v = detail::cell_functional(minus, c, w_minus)(z);
        if (!top || v > *top) top = v;
    }
    if (!top) throw DomainError("witness glue: S- has no cells");
    BigRat omega = *top + 1;
    return {witness_cone(w_minus, minus.store(), glued, z, omega), omega};
}

/// Pulling refinements that carry a witness: after each pull the value at the
/// pulled point becomes (lower hull height at the point) - 2^-k, taking the
/// first k >= 0 for which the local check passes: vertex consistency and the
/// strict fold across every facet of every cell containing the point. Each check is affine in eps, so the accepted k is read
/// off the resulting interval of admissible eps instead of trying k = 0, 1, ...
class WitnessedPulling {
public:
    WitnessedPulling(const Subdivision& s, RegularityWitness w) : engine_(s), w_(std::move(w))
    {
        if (w_.size() != s.store().size()) throw DimensionError("witness size does not match the point store");
    }

    static constexpr unsigned max_exponent = 1u << 16;

    /// Returns the exponent k used. With `forced`, that exponent is applied and
    /// must pass the local check (replay).
    unsigned pull(PointId m, std::optional<unsigned> forced = std::nullopt)
    {
        if (m >= engine_.store().size()) throw std::out_of_range("pull: point index out of range");
        // Height of the lifted lower hull above m. It equals w(m) unless an
        // earlier pull left m strictly above the hull.
        std::optional<BigRat> hull;
        const auto before = engine_.cells_containing(m);
        for (auto c : before) {
            BigRat v = functional(c)(engine_.store()[m]);
            if (!hull || v < *hull) hull = v;
        }
        auto cells = engine_.pull(m);
        for (auto c : before)
            if (!engine_.alive(c)) invalidate(c);
        for (auto c : cells) invalidate(c);
        w_[m] = hull ? *hull : w_[m];
        Window win = admissible(m, cells);
        unsigned k = forced ? *forced : first_exponent(win);
        if (!forced && k > max_exponent)
            throw VerificationError("witness pull at " + to_string(engine_.store()[m]) + ": needs eps below 2^-" +
                                    std::to_string(max_exponent));
        BigRat eps(BigInt(1), BigInt(1) << k);
        if (!win.contains(eps))
            throw VerificationError("witness pull at " + to_string(engine_.store()[m]) +
                                    (forced ? ": replayed epsilon fails the local check"
                                            : ": no epsilon = 2^-k passes the local check"));
        w_[m] -= eps;
        return k;
    }

    const PullingEngine& engine() const { return engine_; }
    const RegularityWitness& witness() const { return w_; }
    Subdivision result() const { return engine_.result(); }

private:
    // eps values satisfying every constraint a + b eps (<, <=, =) 0
    struct Window {
        bool empty = false;
        std::optional<BigRat> upper, lower;
        bool upper_strict = false, lower_strict = false;

        void add(const BigRat& a, const BigRat& b, int op)  // op: -1 "<", 0 "=", 1 "<="
        {
            if (b == 0) {
                if (op < 0 ? a >= 0 : op == 0 ? a != 0 : a > 0) empty = true;
                return;
            }
            BigRat t = -a / b;
            bool strict = op < 0;
            if (op == 0 || b > 0) bound(upper, upper_strict, t, strict, true);
            if (op == 0 || b < 0) bound(lower, lower_strict, t, strict, false);
        }

        static void bound(std::optional<BigRat>& slot, bool& slot_strict, const BigRat& t, bool strict, bool is_upper)
        {
            if (!slot || (is_upper ? t < *slot : t > *slot)) {
                slot = t;
                slot_strict = strict;
            } else if (t == *slot) {
                slot_strict = slot_strict || strict;
            }
        }

        bool below_upper(const BigRat& e) const { return !upper || (upper_strict ? e < *upper : e <= *upper); }
        bool above_lower(const BigRat& e) const { return !lower || (lower_strict ? e > *lower : e >= *lower); }
        bool contains(const BigRat& e) const { return !empty && below_upper(e) && above_lower(e); }
    };

    static unsigned first_exponent(const Window& win)
    {
        if (win.empty) return 0;
        unsigned k = 0;
        if (win.upper && *win.upper > 0) {
            // start just below log2(1/upper) and step up
            long bits = long(msb(denominator_of(*win.upper))) - long(msb(numerator_of(*win.upper))) - 2;
            k = bits > 0 ? unsigned(bits) : 0;
        }
        while (k <= max_exponent && !win.below_upper(BigRat(BigInt(1), BigInt(1) << k))) ++k;
        return k;
    }

    void invalidate(CellId c)
    {
        if (c < cache_.size()) cache_[c].reset();
    }

    const AffineFunctional& functional(CellId c)
    {
        if (cache_.size() <= c) cache_.resize(engine_.cell_capacity());
        if (!cache_[c]) cache_[c] = std::make_unique<AffineFunctional>(std::move(interpolate(c, std::nullopt).front()));
        return *cache_[c];
    }

    /// Interpolant of the current witness on cell c and, with `m`, also the
    /// interpolant of the indicator of m (how the first moves when w(m) drops).
    std::vector<AffineFunctional> interpolate(CellId c, std::optional<PointId> m) const
    {
        auto pts = engine_.points_of(c);
        const auto& ids = engine_.vertices(c);
        auto basis = detail::affine_basis(pts, engine_.dim());
        std::vector<LatticePoint> vs;
        std::vector<std::vector<BigRat>> vals(m ? 2 : 1);
        for (auto k : basis) {
            vs.push_back(pts[k]);
            vals[0].push_back(w_[ids[k]]);
            if (m) vals[1].emplace_back(ids[k] == *m ? 1 : 0);
        }
        return affine_interpolants(std::span<const LatticePoint>(vs), vals);
    }

    /// Constraints on eps with the witness at m set to (current value - eps).
    Window admissible(PointId m, const std::vector<CellId>& cells)
    {
        const auto& store = engine_.store();
        const std::size_t d = engine_.dim();
        std::unordered_map<CellId, std::pair<AffineFunctional, AffineFunctional>> star;
        for (auto c : cells) {
            auto fs = interpolate(c, m);
            star.emplace(c, std::make_pair(std::move(fs[0]), std::move(fs[1])));
        }
        Window win;
        // A_c(q) - w(q) as a + b eps
        auto term = [&](CellId c, PointId q, int op) {
            BigRat a, b = q == m ? BigRat(1) : BigRat(0);
            if (auto it = star.find(c); it != star.end()) {
                a = it->second.first(store[q]) - w_[q];
                b -= it->second.second(store[q]);
            } else {
                a = functional(c)(store[q]) - w_[q];
            }
            win.add(a, b, op);
        };
        std::vector<std::vector<std::vector<PointId>>> cell_facets;
        // facets through m are shared only among cells of the star
        std::map<std::vector<PointId>, std::vector<CellId>> through_m;
        for (auto c : cells) {
            const auto& vs = engine_.vertices(c);
            if (vs.size() != d + 1)
                for (auto v : vs) term(c, v, 0);
            // Contained points need no check: on each pyramid the interpolant
            // is the old one minus eps times a function >= 0 there.
            std::vector<std::vector<PointId>> facets;
            if (vs.size() == d + 1) {
                for (std::size_t k = 0; k <= d; ++k) {
                    std::vector<PointId> f;
                    for (std::size_t j = 0; j <= d; ++j)
                        if (j != k) f.push_back(vs[j]);
                    facets.push_back(std::move(f));
                }
            } else {
                HRep h(engine_.points_of(c));
                for (const auto& f : h.facets()) {
                    std::vector<PointId> ids;
                    for (auto local : f.vertices) ids.push_back(vs[local]);
                    facets.push_back(std::move(ids));
                }
            }
            for (const auto& f : facets)
                if (std::binary_search(f.begin(), f.end(), m)) through_m[f].push_back(c);
            cell_facets.push_back(std::move(facets));
        }
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const CellId c = cells[ci];
            const auto& vs = engine_.vertices(c);
            for (const auto& f : cell_facets[ci]) {
                std::optional<CellId> nb;
                if (auto it = through_m.find(f); it != through_m.end()) {
                    for (auto other : it->second)
                        if (other != c) nb = other;
                } else {
                    nb = engine_.neighbor(c, f);
                }
                if (!nb) continue;
                auto off_facet = [&](const std::vector<PointId>& cell) {
                    for (auto v : cell)
                        if (!std::binary_search(f.begin(), f.end(), v)) return v;
                    throw VerificationError("neighbor cell lies inside the shared facet");
                };
                term(c, off_facet(engine_.vertices(*nb)), -1);
                // star neighbors get their own pass over this facet
                if (!star.count(*nb)) term(*nb, off_facet(vs), -1);
            }
            if (win.empty) break;
        }
        return win;
    }

    PullingEngine engine_;
    RegularityWitness w_;
    std::vector<std::unique_ptr<AffineFunctional>> cache_;  // per cell id, dropped when the cell dies
};

/// A single witnessed pull; returns the new witness and epsilon.
inline std::pair<RegularityWitness, BigRat> witness_pull(const RegularityWitness& w, PointId m, const Subdivision& before)
{
    WitnessedPulling wp(before, w);
    unsigned k = wp.pull(m);
    return {wp.witness(), BigRat(BigInt(1), BigInt(1) << k)};
}

} // namespace sylv

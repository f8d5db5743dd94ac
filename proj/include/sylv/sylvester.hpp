#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "sylv/error.hpp"
#include "sylv/exact.hpp"
#include "sylv/numbers.hpp"
#include "sylv/point.hpp"
#include "sylv/polytope.hpp"

namespace sylv {

/// s_0 = 2, s_{k+1} = s_0 ... s_k + 1, with running products. Grows on demand.
class SylvesterCache {
public:
    BigInt value(std::size_t k)
    {
        std::lock_guard lock(mutex_);
        extend(k);
        return values_[k];
    }
    /// s_0 * ... * s_k
    BigInt product(std::size_t k)
    {
        std::lock_guard lock(mutex_);
        extend(k);
        return products_[k];
    }

    static SylvesterCache& global()
    {
        static SylvesterCache cache;
        return cache;
    }

private:
    void extend(std::size_t k)
    {
        if (values_.empty()) {
            values_.emplace_back(2);
            products_.emplace_back(2);
        }
        while (values_.size() <= k) {
            values_.push_back(products_.back() + 1);
            products_.push_back(products_.back() * values_.back());
        }
    }

    std::mutex mutex_;
    std::vector<BigInt> values_;
    std::vector<BigInt> products_;
};

inline BigInt sylvester(std::size_t n)
{
    // s_40 already has about 10^11 digits
    if (n > 40) throw FeasibilityError("sylvester: index " + std::to_string(n) + " is beyond the supported range");
    return SylvesterCache::global().value(n);
}

/// s_0 * ... * s_k (= s_{k+1} - 1)
inline BigInt sylvester_product(std::size_t k) { return sylvester(k + 1) - 1; }

struct Degrees {
    BigInt d1;  // 2 s_{n-1} - 2
    BigInt d2;  // s_n - 1
};

inline Degrees degrees(std::size_t n)
{
    if (n < 1) throw DomainError("degrees: n must be at least 1");
    return {2 * sylvester(n - 1) - 2, sylvester(n) - 1};
}

enum class Family { P1, P2, P2dual };

inline std::string to_string(Family f)
{
    switch (f) {
    case Family::P1: return "p1";
    case Family::P2: return "p2";
    case Family::P2dual: return "p2dual";
    }
    return "?";
}

inline Family parse_family(std::string_view s)
{
    if (s == "p1") return Family::P1;
    if (s == "p2") return Family::P2;
    if (s == "p2dual") return Family::P2dual;
    throw ParseError("unknown family '" + std::string(s) + "'");
}

/// Largest n the triangulation pipeline accepts (P2dual(5) has 3,263,442 cells).
inline constexpr std::size_t default_max_family_n = 5;

struct FamilySpec {
    Family family = Family::P2dual;
    std::size_t n = 1;

    void validate(std::size_t max_n = default_max_family_n) const
    {
        if (n < 1) throw DomainError("family index n must be at least 1");
        std::size_t bound = family == Family::P1 ? max_n + 1 : max_n;
        if (n > bound)
            throw FeasibilityError(to_string(family) + " n=" + std::to_string(n) + " exceeds the feasibility bound n<=" +
                                   std::to_string(bound));
    }
    friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

/// w1(n) = (-d1/s_0, ..., -d1/s_{n-2}, -1)
inline LatticePoint w1(std::size_t n)
{
    auto [d1, d2] = degrees(n);
    std::vector<BigInt> c;
    for (std::size_t i = 0; i + 1 < n; ++i) c.push_back(-(d1 / sylvester(i)));
    c.emplace_back(-1);
    return LatticePoint(std::move(c));
}

/// w2(n) = (-d2/s_0, ..., -d2/s_{n-1})
inline LatticePoint w2(std::size_t n)
{
    auto [d1, d2] = degrees(n);
    std::vector<BigInt> c;
    for (std::size_t i = 0; i < n; ++i) c.push_back(-(d2 / sylvester(i)));
    return LatticePoint(std::move(c));
}

/// x -> T x with T_{rc} = s_c - 1 if r = c, else -1. Sends P2(n) onto its polar
/// dual: e_i -> (-1, ..., s_i - 1, ..., -1) and w2 -> (-1, ..., -1).
class DualityMap {
public:
    explicit DualityMap(std::size_t n) : n_(n), matrix_(n, n), inverse_(n, n)
    {
        if (n < 1) throw DomainError("duality map: n must be at least 1");
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) matrix_(r, c) = r == c ? BigInt(sylvester(c) - 1) : BigInt(-1);
        if (det(matrix_) != 1) throw VerificationError("duality map: determinant is not 1");
        // Columns of the inverse by exact solves; integrality follows from det = 1.
        Matrix q(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) q(r, c) = BigRat(matrix_(r, c));
        for (std::size_t c = 0; c < n; ++c) {
            std::vector<BigRat> e(n, BigRat(0));
            e[c] = 1;
            auto col = solve(q, e);
            for (std::size_t r = 0; r < n; ++r) {
                if (!is_integral(col[r])) throw VerificationError("duality map: inverse is not integral");
                inverse_(r, c) = numerator_of(col[r]);
            }
        }
    }

    std::size_t dim() const { return n_; }
    const IntMatrix& matrix() const { return matrix_; }
    const IntMatrix& inverse_matrix() const { return inverse_; }

    LatticePoint apply(const LatticePoint& x) const { return multiply(matrix_, x); }
    LatticePoint apply_inverse(const LatticePoint& x) const { return multiply(inverse_, x); }

private:
    LatticePoint multiply(const IntMatrix& m, const LatticePoint& x) const
    {
        if (x.dim() != n_) throw DimensionError("duality map: dimension mismatch");
        LatticePoint y(n_);
        for (std::size_t r = 0; r < n_; ++r) {
            BigInt s = 0;
            for (std::size_t c = 0; c < n_; ++c) s += m(r, c) * x[c];
            y[r] = std::move(s);
        }
        return y;
    }

    std::size_t n_;
    IntMatrix matrix_;
    IntMatrix inverse_;
};

inline DualityMap duality_map(std::size_t n) { return DualityMap(n); }

/// Vertices in canonical order: images of e_0, ..., e_{n-1}, then the special
/// vertex (w1, w2, or (-1, ..., -1) respectively).
inline LatticeSimplex build(const FamilySpec& spec)
{
    if (spec.n < 1) throw DomainError("build: n must be at least 1");
    const std::size_t n = spec.n;
    std::vector<LatticePoint> vs;
    switch (spec.family) {
    case Family::P1:
        for (std::size_t i = 0; i < n; ++i) vs.push_back(LatticePoint::unit(n, i));
        vs.push_back(w1(n));
        break;
    case Family::P2:
        for (std::size_t i = 0; i < n; ++i) vs.push_back(LatticePoint::unit(n, i));
        vs.push_back(w2(n));
        break;
    case Family::P2dual: {
        LatticePoint minus_ones(std::vector<BigInt>(n, BigInt(-1)));
        for (std::size_t i = 0; i < n; ++i) {
            auto v = minus_ones;
            v[i] = sylvester(i) - 1;
            vs.push_back(std::move(v));
        }
        vs.push_back(std::move(minus_ones));
        break;
    }
    }
    return LatticeSimplex(std::move(vs));
}

namespace detail {

inline bool is_all_minus_one(const LatticePoint& y)
{
    return std::all_of(y.begin(), y.end(), [](const BigInt& c) { return c == -1; });
}

/// -sum_{i<n} (s_n - 1)/s_i * y_i
inline BigInt slanted_height(const LatticePoint& y)
{
    const std::size_t n = y.dim();
    const BigInt d = sylvester(n) - 1;
    BigInt h = 0;
    for (std::size_t i = 0; i < n; ++i) h -= (d / sylvester(i)) * y[i];
    return h;
}

} // namespace detail

/// Membership in the dual simplex of dimension y.dim(): every y_i >= -1 and
/// sum (s_n - 1)/s_i y_i <= 1.
inline bool in_p2dual(const LatticePoint& y)
{
    for (const auto& c : y)
        if (c < -1) return false;
    return detail::slanted_height(y) >= -1;
}

/// Largest last coordinate t with (y, t) a lattice point of P2dual(n_plus_1),
/// for y a lattice point of P2dual(n_plus_1 - 1).
inline BigInt column_height(std::size_t n_plus_1, const LatticePoint& y)
{
    if (n_plus_1 < 2 || y.dim() + 1 != n_plus_1) throw DimensionError("column_height: y must have dimension n");
    if (!in_p2dual(y)) throw DomainError("column_height: " + to_string(y) + " is not in the dual simplex");
    if (detail::is_all_minus_one(y)) return sylvester(y.dim()) - 1;
    return detail::slanted_height(y);
}

inline constexpr std::uint64_t default_point_limit = 20'000'000;

/// Lattice points of P2dual(n), sorted, built column by column from level n-1.
inline std::vector<LatticePoint> lattice_points_P2dual(std::size_t n, std::uint64_t limit = default_point_limit)
{
    if (n < 1) throw DomainError("lattice_points_P2dual: n must be at least 1");
    std::vector<LatticePoint> level{{-1}, {0}, {1}};
    for (std::size_t k = 2; k <= n; ++k) {
        BigInt count = 0;
        std::vector<BigInt> tops;
        tops.reserve(level.size());
        for (const auto& y : level) {
            tops.push_back(column_height(k, y));
            count += tops.back() + 2;
        }
        if (count > limit)
            throw FeasibilityError("lattice_points_P2dual: level " + std::to_string(k) + " has " + count.str() +
                                   " points, limit is " + std::to_string(limit));
        std::vector<LatticePoint> next;
        next.reserve(count.convert_to<std::size_t>());
        for (std::size_t i = 0; i < level.size(); ++i)
            for (BigInt t = -1; t <= tops[i]; ++t) next.push_back(level[i].appended(t));
        level = std::move(next);
    }
    return level;
}

/// Lattice points of P2(n): the dual points pulled back through the duality map.
inline std::vector<LatticePoint> lattice_points_P2(std::size_t n, std::uint64_t limit = default_point_limit)
{
    DualityMap t(n);
    std::vector<LatticePoint> out;
    for (const auto& y : lattice_points_P2dual(n, limit)) out.push_back(t.apply_inverse(y));
    std::sort(out.begin(), out.end());
    return out;
}

/// Lattice points of P1(n+1) = Conv(P2(n) x {0}, e_n, w1(n+1)).
inline std::vector<LatticePoint> lattice_points_P1(std::size_t n_plus_1, std::uint64_t limit = default_point_limit)
{
    if (n_plus_1 < 1) throw DomainError("lattice_points_P1: n must be at least 1");
    if (n_plus_1 == 1) return {{-1}, {0}, {1}};
    const std::size_t n = n_plus_1 - 1;
    std::vector<LatticePoint> out;
    for (const auto& p : lattice_points_P2(n, limit)) out.push_back(p.appended(0));
    out.push_back(LatticePoint::unit(n_plus_1, n));
    out.push_back(w1(n_plus_1));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace sylv

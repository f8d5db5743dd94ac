#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sylv/numbers.hpp"

namespace sylv {

namespace detail {

template <typename T>
class PointBase {
public:
    PointBase() = default;
    explicit PointBase(std::vector<T> coords) : coords_(std::move(coords)) {}
    explicit PointBase(std::size_t dim) : coords_(dim) {}

    std::size_t dim() const { return coords_.size(); }
    const T& operator[](std::size_t i) const { return coords_[i]; }
    T& operator[](std::size_t i) { return coords_[i]; }
    std::span<const T> coords() const { return coords_; }
    auto begin() const { return coords_.begin(); }
    auto end() const { return coords_.end(); }

    friend bool operator==(const PointBase& a, const PointBase& b) { return a.coords_ == b.coords_; }
    friend bool operator<(const PointBase& a, const PointBase& b)
    {
        return std::lexicographical_compare(a.coords_.begin(), a.coords_.end(), b.coords_.begin(),
                                            b.coords_.end());
    }

protected:
    std::vector<T> coords_;
};

} // namespace detail

/// A point of Z^d. Ordered lexicographically.
class LatticePoint : public detail::PointBase<BigInt> {
public:
    using PointBase::PointBase;
    LatticePoint(std::initializer_list<long> values)
    {
        coords_.reserve(values.size());
        for (long v : values) coords_.emplace_back(v);
    }

    static LatticePoint zero(std::size_t dim) { return LatticePoint(std::vector<BigInt>(dim, BigInt(0))); }
    static LatticePoint unit(std::size_t dim, std::size_t i)
    {
        auto p = zero(dim);
        p[i] = 1;
        return p;
    }

    /// (x, value)
    LatticePoint appended(const BigInt& value) const
    {
        auto c = coords_;
        c.push_back(value);
        return LatticePoint(std::move(c));
    }
    /// x without its last coordinate
    LatticePoint dropped_last() const
    {
        return LatticePoint(std::vector<BigInt>(coords_.begin(), coords_.end() - 1));
    }

    friend LatticePoint operator+(const LatticePoint& a, const LatticePoint& b)
    {
        check_dims(a, b);
        LatticePoint r(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
        return r;
    }
    friend LatticePoint operator-(const LatticePoint& a, const LatticePoint& b)
    {
        check_dims(a, b);
        LatticePoint r(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
        return r;
    }
    friend LatticePoint operator*(const BigInt& k, const LatticePoint& a)
    {
        LatticePoint r(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) r[i] = k * a[i];
        return r;
    }

private:
    static void check_dims(const LatticePoint& a, const LatticePoint& b)
    {
        if (a.dim() != b.dim()) throw DimensionError("lattice point dimension mismatch");
    }
};

/// A point of Q^d.
class RationalPoint : public detail::PointBase<BigRat> {
public:
    using PointBase::PointBase;
    RationalPoint(const LatticePoint& p)  // NOLINT: lattice points embed implicitly
    {
        coords_.reserve(p.dim());
        for (const auto& c : p) coords_.emplace_back(c);
    }

    bool is_integral() const
    {
        return std::all_of(coords_.begin(), coords_.end(), [](const BigRat& q) { return sylv::is_integral(q); });
    }
    /// Throws DomainError unless every coordinate is an integer.
    LatticePoint to_lattice() const
    {
        std::vector<BigInt> c;
        c.reserve(dim());
        for (const auto& q : coords_) {
            if (!sylv::is_integral(q)) throw DomainError("point is not integral");
            c.push_back(numerator_of(q));
        }
        return LatticePoint(std::move(c));
    }
};

struct LatticePointHash {
    std::size_t operator()(const LatticePoint& p) const
    {
        std::size_t h = 0x9e3779b97f4a7c15ULL;
        for (const auto& c : p) h ^= hash_value(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

template <typename T>
std::string to_string(const detail::PointBase<T>& p)
{
    std::string s = "(";
    for (std::size_t i = 0; i < p.dim(); ++i) {
        if (i) s += ", ";
        s += to_string(p[i]);
    }
    return s + ")";
}

inline std::ostream& operator<<(std::ostream& os, const LatticePoint& p) { return os << to_string(p); }
inline std::ostream& operator<<(std::ostream& os, const RationalPoint& p) { return os << to_string(p); }

template <typename P>
BigRat dot(std::span<const BigRat> u, const P& x)
{
    if (u.size() != x.dim()) throw DimensionError("dot product dimension mismatch");
    BigRat s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * x[i];
    return s;
}

inline BigInt dot(std::span<const BigInt> u, const LatticePoint& x)
{
    if (u.size() != x.dim()) throw DimensionError("dot product dimension mismatch");
    BigInt s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * x[i];
    return s;
}

} // namespace sylv

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sylv/error.hpp"
#include "sylv/numbers.hpp"
#include "sylv/point.hpp"

namespace sylv {

/// Dense row-major matrix over an exact scalar.
template <typename T>
class BasicMatrix {
public:
    BasicMatrix() = default;
    BasicMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
    BasicMatrix(std::initializer_list<std::initializer_list<long>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError("ragged matrix literal");
            for (long v : r) data_.emplace_back(v);
        }
    }

    static BasicMatrix identity(std::size_t n)
    {
        BasicMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_.at(r * cols_ + c); }
    const T& operator()(std::size_t r, std::size_t c) const { return data_.at(r * cols_ + c); }

    void swap_rows(std::size_t a, std::size_t b)
    {
        if (a == b) return;
        for (std::size_t c = 0; c < cols_; ++c) std::swap(data_[a * cols_ + c], data_[b * cols_ + c]);
    }

    friend BasicMatrix operator*(const BasicMatrix& a, const BasicMatrix& b)
    {
        if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
        BasicMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = BasicMatrix<BigRat>;
using IntMatrix = BasicMatrix<BigInt>;

/// Fraction-free (Bareiss) determinant. Every division is exact.
inline BigInt det(IntMatrix m)
{
    if (!m.square()) throw DimensionError("determinant of a non-square matrix");
    const std::size_t n = m.rows();
    if (n == 0) return 1;
    int sgn = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && m(p, k) == 0) ++p;
            if (p == n) return 0;
            m.swap_rows(k, p);
            sgn = -sgn;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                BigInt v = m(i, j) * m(k, k) - m(i, k) * m(k, j);
                mpz_divexact(v.backend().data(), v.backend().data(), prev.backend().data());
                m(i, j) = std::move(v);
            }
            m(i, k) = 0;
        }
        prev = m(k, k);
    }
    return sgn < 0 ? BigInt(-m(n - 1, n - 1)) : m(n - 1, n - 1);
}

/// Exact determinant of a rational matrix: each row is scaled to integers, the
/// integer determinant is taken with Bareiss, and the scale is divided back out.
inline BigRat det(const Matrix& m)
{
    if (!m.square()) throw DimensionError("determinant of a non-square matrix");
    const std::size_t n = m.rows();
    IntMatrix im(n, n);
    BigInt scale = 1;
    for (std::size_t r = 0; r < n; ++r) {
        BigInt l = 1;
        for (std::size_t c = 0; c < n; ++c) l = lcm(l, denominator_of(m(r, c)));
        for (std::size_t c = 0; c < n; ++c) im(r, c) = numerator_of(m(r, c)) * (l / denominator_of(m(r, c)));
        scale *= l;
    }
    return BigRat(det(std::move(im)), scale);
}

/// Rank by fraction-free elimination.
inline std::size_t rank(IntMatrix m)
{
    std::size_t r = 0;
    BigInt prev = 1;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && m(p, c) == 0) ++p;
        if (p == m.rows()) continue;
        m.swap_rows(r, p);
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            for (std::size_t j = c + 1; j < m.cols(); ++j) {
                BigInt v = m(i, j) * m(r, c) - m(i, c) * m(r, j);
                mpz_divexact(v.backend().data(), v.backend().data(), prev.backend().data());
                m(i, j) = std::move(v);
            }
            m(i, c) = 0;
        }
        prev = m(r, c);
        ++r;
    }
    return r;
}

inline std::size_t rank(const Matrix& m)
{
    IntMatrix im(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        BigInt l = 1;
        for (std::size_t c = 0; c < m.cols(); ++c) l = lcm(l, denominator_of(m(r, c)));
        for (std::size_t c = 0; c < m.cols(); ++c) im(r, c) = numerator_of(m(r, c)) * (l / denominator_of(m(r, c)));
    }
    return rank(std::move(im));
}

/// Unique solution of a square system. Throws SingularityError when det = 0.
inline std::vector<BigRat> solve(Matrix a, std::vector<BigRat> b)
{
    if (!a.square() || a.rows() != b.size()) throw DimensionError("solve: shape mismatch");
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && a(p, k) == 0) ++p;
        if (p == n) throw SingularityError("solve: singular system");
        a.swap_rows(k, p);
        std::swap(b[k], b[p]);
        BigRat inv = 1 / a(k, k);
        for (std::size_t j = k; j < n; ++j) a(k, j) *= inv;
        b[k] *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k || a(i, k) == 0) continue;
            BigRat f = a(i, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    return b;
}

/// Dimension of the affine hull; 0 for a single point.
template <typename P>
std::size_t affine_rank(std::span<const P> points)
{
    if (points.empty()) throw std::invalid_argument("affine_rank of an empty point list");
    const std::size_t d = points[0].dim();
    Matrix m(points.size() - 1, d);
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].dim() != d) throw DimensionError("affine_rank: mixed dimensions");
        for (std::size_t c = 0; c < d; ++c) m(i - 1, c) = BigRat(points[i][c]) - BigRat(points[0][c]);
    }
    return rank(m);
}

inline std::size_t affine_rank(std::span<const LatticePoint> points)
{
    if (points.empty()) throw std::invalid_argument("affine_rank of an empty point list");
    const std::size_t d = points[0].dim();
    IntMatrix m(points.size() - 1, d);
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].dim() != d) throw DimensionError("affine_rank: mixed dimensions");
        for (std::size_t c = 0; c < d; ++c) m(i - 1, c) = points[i][c] - points[0][c];
    }
    return rank(std::move(m));
}

inline std::size_t affine_rank(const std::vector<LatticePoint>& points)
{
    return affine_rank(std::span<const LatticePoint>(points));
}

inline std::size_t affine_rank(const std::vector<RationalPoint>& points)
{
    return affine_rank(std::span<const RationalPoint>(points));
}

/// x -> <c, x> + c0, stored over a common positive denominator so that
/// evaluating at lattice points is integer arithmetic.
class AffineFunctional {
public:
    AffineFunctional() = default;

    AffineFunctional(std::span<const BigRat> coefficients, const BigRat& constant)
    {
        den_ = denominator_of(constant);
        for (const auto& c : coefficients) den_ = lcm(den_, denominator_of(c));
        num_.reserve(coefficients.size());
        for (const auto& c : coefficients) num_.push_back(numerator_of(c) * (den_ / denominator_of(c)));
        num0_ = numerator_of(constant) * (den_ / denominator_of(constant));
    }

    /// x -> (<num, x> + num0) / den, reduced to lowest terms with den > 0.
    static AffineFunctional from_scaled(std::vector<BigInt> num, BigInt num0, BigInt den)
    {
        if (den == 0) throw SingularityError("affine functional: zero denominator");
        BigInt g = gcd(den, num0);
        for (const auto& c : num) g = gcd(g, c);
        if (den < 0) g = -g;
        AffineFunctional f;
        for (auto& c : num) mpz_divexact(c.backend().data(), c.backend().data(), g.backend().data());
        mpz_divexact(num0.backend().data(), num0.backend().data(), g.backend().data());
        mpz_divexact(den.backend().data(), den.backend().data(), g.backend().data());
        f.num_ = std::move(num);
        f.num0_ = std::move(num0);
        f.den_ = std::move(den);
        return f;
    }

    std::size_t dim() const { return num_.size(); }
    BigRat coefficient(std::size_t i) const { return BigRat(num_.at(i), den_); }
    BigRat constant() const { return BigRat(num0_, den_); }
    const BigInt& denominator() const { return den_; }

    /// den * A(p)
    BigInt scaled_at(const LatticePoint& p) const
    {
        if (p.dim() != dim()) throw DimensionError("affine functional: dimension mismatch");
        BigInt s = num0_;
        for (std::size_t i = 0; i < num_.size(); ++i) s += num_[i] * p[i];
        return s;
    }

    BigRat operator()(const LatticePoint& p) const { return BigRat(scaled_at(p), den_); }

    BigRat operator()(const RationalPoint& p) const
    {
        if (p.dim() != dim()) throw DimensionError("affine functional: dimension mismatch");
        BigRat s = BigRat(num0_);
        for (std::size_t i = 0; i < num_.size(); ++i) s += BigRat(num_[i]) * p[i];
        return s / BigRat(den_);
    }

    /// sign(A(p) - value) without building intermediate rationals.
    int compare(const LatticePoint& p, const BigRat& value) const
    {
        BigInt lhs = scaled_at(p) * denominator_of(value);
        BigInt rhs = numerator_of(value) * den_;
        return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }

    friend bool operator==(const AffineFunctional&, const AffineFunctional&) = default;

private:
    std::vector<BigInt> num_;
    BigInt num0_ = 0;
    BigInt den_ = 1;
};

/// The unique affine function taking `values[i]` at `vertices[i]`; the vertices
/// must be d+1 affinely independent points of Q^d.
template <typename P>
AffineFunctional affine_interpolant(std::span<const P> vertices, std::span<const BigRat> values)
{
    if (vertices.empty() || vertices.size() != values.size())
        throw DimensionError("affine_interpolant: need one value per vertex");
    const std::size_t d = vertices[0].dim();
    if (vertices.size() != d + 1) throw DimensionError("affine_interpolant: need exactly d+1 vertices");
    Matrix a(d + 1, d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
        if (vertices[i].dim() != d) throw DimensionError("affine_interpolant: mixed dimensions");
        for (std::size_t c = 0; c < d; ++c) a(i, c) = BigRat(vertices[i][c]);
        a(i, d) = 1;
    }
    std::vector<BigRat> x;
    try {
        x = solve(std::move(a), std::vector<BigRat>(values.begin(), values.end()));
    } catch (const SingularityError&) {
        throw SingularityError("affine_interpolant: vertices are affinely dependent");
    }
    return AffineFunctional(std::span<const BigRat>(x.data(), d), x[d]);
}

/// Fraction-free Gauss-Jordan on [m | rhs...]: returns D = +-det(m) and the
/// columns D * m^{-1} rhs_j, all exact integers.
inline std::pair<BigInt, std::vector<std::vector<BigInt>>> fraction_free_solve(IntMatrix m,
                                                                              std::vector<std::vector<BigInt>> rhs)
{
    if (!m.square()) throw DimensionError("fraction_free_solve: non-square matrix");
    const std::size_t n = m.rows();
    for (const auto& r : rhs)
        if (r.size() != n) throw DimensionError("fraction_free_solve: right-hand side length mismatch");
    BigInt prev = 1, t;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && m(p, k) == 0) ++p;
        if (p == n) throw SingularityError("fraction_free_solve: singular system");
        if (p != k) {
            m.swap_rows(k, p);
            for (auto& r : rhs) std::swap(r[k], r[p]);
        }
        const BigInt pivot = m(k, k);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const BigInt f = m(i, k);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == k) continue;
                t = pivot * m(i, j) - f * m(k, j);
                mpz_divexact(t.backend().data(), t.backend().data(), prev.backend().data());
                m(i, j) = t;
            }
            for (auto& r : rhs) {
                t = pivot * r[i] - f * r[k];
                mpz_divexact(t.backend().data(), t.backend().data(), prev.backend().data());
                r[i] = t;
            }
            m(i, k) = 0;
        }
        prev = pivot;
    }
    // every diagonal entry now equals the last pivot; the pivot row itself was
    // never rescaled, so bring each solution entry to that common multiplier
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (m(i, i) == prev) continue;
        for (auto& r : rhs) {
            t = r[i] * prev;
            mpz_divexact(t.backend().data(), t.backend().data(), m(i, i).backend().data());
            r[i] = t;
        }
    }
    return {prev, std::move(rhs)};
}

/// Interpolants through d+1 affinely independent lattice points for several
/// value vectors at once, by one integer elimination.
inline std::vector<AffineFunctional> affine_interpolants(std::span<const LatticePoint> vertices,
                                                         const std::vector<std::vector<BigRat>>& values)
{
    if (vertices.empty()) throw DimensionError("affine_interpolant: no vertices");
    const std::size_t d = vertices[0].dim();
    if (vertices.size() != d + 1) throw DimensionError("affine_interpolant: need exactly d+1 vertices");
    IntMatrix m(d, d);
    for (std::size_t i = 1; i <= d; ++i) {
        if (vertices[i].dim() != d) throw DimensionError("affine_interpolant: mixed dimensions");
        for (std::size_t c = 0; c < d; ++c) m(i - 1, c) = vertices[i][c] - vertices[0][c];
    }
    std::vector<std::vector<BigInt>> rhs;
    std::vector<BigInt> scales, base;
    for (const auto& vals : values) {
        if (vals.size() != d + 1) throw DimensionError("affine_interpolant: need one value per vertex");
        BigInt l = 1;
        for (const auto& v : vals) l = lcm(l, denominator_of(v));
        std::vector<BigInt> w(d + 1);
        for (std::size_t i = 0; i <= d; ++i) w[i] = numerator_of(vals[i]) * (l / denominator_of(vals[i]));
        std::vector<BigInt> r(d);
        for (std::size_t i = 1; i <= d; ++i) r[i - 1] = w[i] - w[0];
        rhs.push_back(std::move(r));
        scales.push_back(std::move(l));
        base.push_back(std::move(w[0]));
    }
    std::pair<BigInt, std::vector<std::vector<BigInt>>> sol;
    try {
        sol = fraction_free_solve(std::move(m), std::move(rhs));
    } catch (const SingularityError&) {
        throw SingularityError("affine_interpolant: vertices are affinely dependent");
    }
    const BigInt& det = sol.first;
    std::vector<AffineFunctional> out;
    out.reserve(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        auto& x = sol.second[j];
        BigInt num0 = base[j] * det;
        for (std::size_t c = 0; c < d; ++c) num0 -= x[c] * vertices[0][c];
        out.push_back(AffineFunctional::from_scaled(std::move(x), std::move(num0), det * scales[j]));
    }
    return out;
}

inline AffineFunctional affine_interpolant(const std::vector<LatticePoint>& vertices,
                                           const std::vector<BigRat>& values)
{
    return std::move(affine_interpolants(std::span<const LatticePoint>(vertices), {values}).front());
}

inline AffineFunctional affine_interpolant(const std::vector<RationalPoint>& vertices,
                                           const std::vector<BigRat>& values)
{
    return affine_interpolant(std::span<const RationalPoint>(vertices), std::span<const BigRat>(values));
}

} // namespace sylv

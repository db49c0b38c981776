#pragma once

// Truncated multivariate Taylor arithmetic ("jets") of total order <= 3.
//
// A jet stores the Taylor coefficients of a smooth function at a point:
// coeff(alpha) = d^alpha f / alpha!  for every multi-index alpha with
// |alpha| <= order. Arithmetic on jets propagates exact derivatives (to
// rounding) through every composed expression, which is what the rest of
// the library uses to obtain gradients, Hessians and third derivatives
// without symbolic or numeric differentiation.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gdeform/errors.hpp"

namespace gdeform {

inline constexpr int kMaxJetOrder = 3;
inline constexpr int kMaxJetDim = 16;

namespace detail {

// A monomial of degree <= 3 as a sorted tuple of variable indices.
struct Mono {
    std::uint8_t deg = 0;
    std::array<std::uint8_t, 3> v{};
};

inline int pair_count(int m) { return m * (m + 1) / 2; }
inline int triple_count(int m) { return m * (m + 1) * (m + 2) / 6; }

// Index of pair (i,j), i <= j, within the degree-2 block.
inline int pair_index(int i, int j, int m) { return i * m - i * (i - 1) / 2 + (j - i); }

// Index of triple (i,j,k), i <= j <= k, within the degree-3 block.
inline int triple_index(int i, int j, int k, int m) {
    int off = 0;
    for (int t = 0; t < i; ++t) off += pair_count(m - t);
    return off + pair_index(j - i, k - i, m - i);
}

inline int coeff_count(int m, int order) {
    int n = 1;
    if (order >= 1) n += m;
    if (order >= 2) n += pair_count(m);
    if (order >= 3) n += triple_count(m);
    return n;
}

// All monomials of degree 0..3 in storage order, cached per dimension.
inline const std::vector<Mono>& monomials(int m) {
    static const auto tables = [] {
        std::array<std::vector<Mono>, kMaxJetDim + 1> t;
        for (int d = 1; d <= kMaxJetDim; ++d) {
            auto& list = t[d];
            list.push_back({});
            for (std::uint8_t i = 0; i < d; ++i) list.push_back({1, {i}});
            for (std::uint8_t i = 0; i < d; ++i)
                for (std::uint8_t j = i; j < d; ++j) list.push_back({2, {i, j}});
            for (std::uint8_t i = 0; i < d; ++i)
                for (std::uint8_t j = i; j < d; ++j)
                    for (std::uint8_t k = j; k < d; ++k) list.push_back({3, {i, j, k}});
        }
        return t;
    }();
    return tables[m];
}

inline int mono_index(const Mono& a, int m) {
    switch (a.deg) {
        case 0: return 0;
        case 1: return 1 + a.v[0];
        case 2: return 1 + m + pair_index(a.v[0], a.v[1], m);
        default: return 1 + m + pair_count(m) + triple_index(a.v[0], a.v[1], a.v[2], m);
    }
}

inline Mono mono_merge(const Mono& a, const Mono& b) {
    Mono out;
    out.deg = static_cast<std::uint8_t>(a.deg + b.deg);
    int ia = 0, ib = 0, k = 0;
    while (ia < a.deg && ib < b.deg)
        out.v[k++] = a.v[ia] <= b.v[ib] ? a.v[ia++] : b.v[ib++];
    while (ia < a.deg) out.v[k++] = a.v[ia++];
    while (ib < b.deg) out.v[k++] = b.v[ib++];
    return out;
}

}  // namespace detail

class Jet {
  public:
    Jet() = default;

    Jet(int dim, int order) : dim_(dim), order_(order) {
        if (dim < 1 || dim > kMaxJetDim)
            throw EvalError("jet dimension must be in [1," + std::to_string(kMaxJetDim) +
                            "], got " + std::to_string(dim));
        if (order < 0 || order > kMaxJetOrder)
            throw EvalError("jet order must be in [0,3], got " + std::to_string(order));
        c_.assign(detail::coeff_count(dim, order), 0.0);
    }

    static Jet constant(double v, int dim, int order) {
        Jet j(dim, order);
        j.c_[0] = v;
        return j;
    }

    // The coordinate function x_i as a jet at value `v`.
    static Jet variable(int i, double v, int dim, int order) {
        if (i < 0 || i >= dim)
            throw EvalError("jet variable index " + std::to_string(i) + " out of range [0," +
                            std::to_string(dim) + ")");
        Jet j(dim, order);
        j.c_[0] = v;
        if (order >= 1) j.c_[1 + i] = 1.0;
        return j;
    }

    int dim() const { return dim_; }
    int order() const { return order_; }
    const std::vector<double>& coeffs() const { return c_; }

    double value() const { return c_[0]; }

    // True partial derivatives (Taylor coefficient times multiplicity).
    double d1(int i) const { return order_ >= 1 ? c_[1 + i] : 0.0; }

    double d2(int i, int j) const {
        if (order_ < 2) return 0.0;
        double c = c_[1 + dim_ + detail::pair_index(std::min(i, j), std::max(i, j), dim_)];
        return i == j ? 2.0 * c : c;
    }

    double d3(int i, int j, int k) const {
        if (order_ < 3) return 0.0;
        int a = i, b = j, c = k;
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        double w = c_[1 + dim_ + detail::pair_count(dim_) + detail::triple_index(a, b, c, dim_)];
        if (a == b && b == c) return 6.0 * w;
        if (a == b || b == c) return 2.0 * w;
        return w;
    }

    // Jet of d f / d x_i, one order lower.
    Jet partial(int i) const {
        if (order_ < 1)
            throw EvalError("jet partial derivative requires order >= 1");
        Jet out(dim_, order_ - 1);
        const auto& monos = detail::monomials(dim_);
        for (const auto& beta : monos) {
            if (beta.deg > order_ - 1) continue;
            detail::Mono src = detail::mono_merge(beta, detail::Mono{1, {static_cast<std::uint8_t>(i)}});
            int mult = 0;  // beta_i + 1
            for (int t = 0; t < src.deg; ++t)
                if (src.v[t] == i) ++mult;
            out.c_[detail::mono_index(beta, dim_)] = mult * c_[detail::mono_index(src, dim_)];
        }
        return out;
    }

    Jet truncated(int order) const {
        if (order >= order_) return *this;
        Jet out(dim_, order);
        for (std::size_t t = 0; t < out.c_.size(); ++t) out.c_[t] = c_[t];
        return out;
    }

    Jet operator-() const {
        Jet out = *this;
        for (auto& x : out.c_) x = -x;
        return out;
    }

    Jet& operator+=(const Jet& rhs) {
        check_shape(rhs);
        for (std::size_t t = 0; t < c_.size(); ++t) c_[t] += rhs.c_[t];
        return *this;
    }

    Jet& operator-=(const Jet& rhs) {
        check_shape(rhs);
        for (std::size_t t = 0; t < c_.size(); ++t) c_[t] -= rhs.c_[t];
        return *this;
    }

    Jet& operator+=(double rhs) {
        c_[0] += rhs;
        return *this;
    }

    Jet& operator-=(double rhs) {
        c_[0] -= rhs;
        return *this;
    }

    Jet& operator*=(double rhs) {
        for (auto& x : c_) x *= rhs;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double b) { return a += b; }
    friend Jet operator+(double a, Jet b) { return b += a; }
    friend Jet operator-(Jet a, double b) { return a -= b; }
    friend Jet operator-(double a, const Jet& b) { return -b + a; }
    friend Jet operator*(Jet a, double b) { return a *= b; }
    friend Jet operator*(double a, Jet b) { return b *= a; }
    friend Jet operator/(Jet a, double b) { return a *= 1.0 / b; }

    // Truncated Leibniz convolution over monomial pairs.
    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check_shape(b);
        Jet out(a.dim_, a.order_);
        const auto& monos = detail::monomials(a.dim_);
        for (const auto& ma : monos) {
            if (ma.deg > a.order_) continue;
            double ca = a.c_[detail::mono_index(ma, a.dim_)];
            if (ca == 0.0) continue;
            for (const auto& mb : monos) {
                if (ma.deg + mb.deg > a.order_) continue;
                double cb = b.c_[detail::mono_index(mb, a.dim_)];
                if (cb == 0.0) continue;
                out.c_[detail::mono_index(detail::mono_merge(ma, mb), a.dim_)] += ca * cb;
            }
        }
        out.check_finite("mul");
        return out;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
    friend Jet operator/(double a, const Jet& b) { return recip(b) * a; }

    // f(u) where f has Taylor coefficients (c0..c3) at u.value().
    Jet compose_univariate(const char* name, double c0, double c1, double c2, double c3) const {
        Jet w = *this;
        w.c_[0] = 0.0;
        Jet out = Jet::constant(c0, dim_, order_);
        if (order_ >= 1) out += c1 * w;
        if (order_ >= 2) {
            Jet w2 = w * w;
            out += c2 * w2;
            if (order_ >= 3) out += c3 * (w2 * w);
        }
        out.check_finite(name);
        return out;
    }

    friend Jet recip(const Jet& a) {
        double v = a.value();
        if (std::abs(v) <= 1e-300)
            throw EvalError("division by (near-)zero value " + std::to_string(v));
        double iv = 1.0 / v;
        return a.compose_univariate("recip", iv, -iv * iv, iv * iv * iv, -iv * iv * iv * iv);
    }

    friend Jet sin(const Jet& a) {
        double s = std::sin(a.value()), c = std::cos(a.value());
        return a.compose_univariate("sin", s, c, -s / 2.0, -c / 6.0);
    }

    friend Jet cos(const Jet& a) {
        double s = std::sin(a.value()), c = std::cos(a.value());
        return a.compose_univariate("cos", c, -s, -c / 2.0, s / 6.0);
    }

    friend Jet tan(const Jet& a) {
        double c = std::cos(a.value());
        if (std::abs(c) <= 1e-14)
            throw EvalError("tan: argument " + std::to_string(a.value()) + " too close to a pole");
        double t = std::tan(a.value()), sec2 = 1.0 + t * t;
        return a.compose_univariate("tan", t, sec2, t * sec2, sec2 * (3.0 * t * t + 1.0) / 3.0);
    }

    friend Jet exp(const Jet& a) {
        double e = std::exp(a.value());
        return a.compose_univariate("exp", e, e, e / 2.0, e / 6.0);
    }

    friend Jet log(const Jet& a) {
        double v = a.value();
        if (!(v > 0.0))
            throw EvalError("log: requires positive value, got " + std::to_string(v));
        double iv = 1.0 / v;
        return a.compose_univariate("log", std::log(v), iv, -iv * iv / 2.0, iv * iv * iv / 3.0);
    }

    friend Jet sqrt(const Jet& a) {
        double v = a.value();
        if (!(v > 0.0))
            throw EvalError("sqrt: requires positive value, got " + std::to_string(v));
        double r = std::sqrt(v);
        return a.compose_univariate("sqrt", r, 0.5 / r, -1.0 / (8.0 * v * r), 1.0 / (16.0 * v * v * r));
    }

    // x^r for constant non-integer r; requires positive base.
    friend Jet pow(const Jet& a, double r) {
        double v = a.value();
        if (!(v > 0.0))
            throw EvalError("pow: non-integer exponent requires positive base, got " +
                            std::to_string(v));
        double p = std::pow(v, r);
        return a.compose_univariate("pow", p, r * p / v, r * (r - 1.0) / 2.0 * p / (v * v),
                                    r * (r - 1.0) * (r - 2.0) / 6.0 * p / (v * v * v));
    }

    // Integer powers by repeated multiplication (exact for polynomials).
    friend Jet powi(const Jet& a, int n) {
        if (n < 0) return recip(powi(a, -n));
        Jet out = Jet::constant(1.0, a.dim_, a.order_);
        Jet base = a;
        int e = n;
        while (e > 0) {
            if (e & 1) out = out * base;
            base = e > 1 ? base * base : base;
            e >>= 1;
        }
        return out;
    }

  private:
    void check_shape(const Jet& rhs) const {
        if (dim_ != rhs.dim_ || order_ != rhs.order_)
            throw EvalError("jet dimension/order mismatch: (" + std::to_string(dim_) + "," +
                            std::to_string(order_) + ") vs (" + std::to_string(rhs.dim_) + "," +
                            std::to_string(rhs.order_) + ")");
    }

    void check_finite(const char* op) const {
        for (double x : c_)
            if (!std::isfinite(x))
                throw EvalError(std::string(op) + ": produced a non-finite coefficient");
    }

    int dim_ = 1;
    int order_ = 0;
    std::vector<double> c_{0.0};
};

/// Coordinate seed x_i = value at slot i, unit first derivative.
inline Jet seed_variable(int i, double value, int dim, int order) {
    return Jet::variable(i, value, dim, order);
}

}  // namespace gdeform

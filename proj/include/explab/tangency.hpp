#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "explab/errors.hpp"

namespace explab {

/// Real polynomial, coefficients in ascending degree, trailing zeros trimmed.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    const std::vector<double>& coeffs() const noexcept { return c_; }
    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }  // -1 for the zero polynomial
    bool is_zero() const noexcept { return c_.empty(); }
    double coeff(int k) const noexcept { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(k)] : 0.0; }

    double operator()(double x) const noexcept {
        double v = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + *it;
        return v;
    }

    Polynomial derivative() const {
        std::vector<double> d;
        for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(static_cast<double>(k) * c_[k]);
        return Polynomial(std::move(d));
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<double> d(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = a.coeff(static_cast<int>(k)) - b.coeff(static_cast<int>(k));
        return Polynomial(std::move(d));
    }
    friend Polynomial operator*(double s, const Polynomial& p) {
        std::vector<double> d = p.c_;
        for (auto& v : d) v *= s;
        return Polynomial(std::move(d));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<double> d(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) d[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(d));
    }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }
    std::vector<double> c_;
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;
using RationalPoly = std::vector<Rational>;  // ascending, trimmed

inline void trim(RationalPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

// Every finite double is a dyadic rational, so this conversion is exact.
inline Rational to_rational(double v) {
    int e = 0;
    double m = std::frexp(v, &e);
    auto mant = static_cast<long long>(std::ldexp(m, 53));
    e -= 53;
    Rational r(mant);
    boost::multiprecision::cpp_int two(1);
    if (e > 0) r *= Rational(two << e);
    if (e < 0) r /= Rational(two << -e);
    return r;
}

inline RationalPoly to_rational(const Polynomial& p) {
    RationalPoly r;
    for (double c : p.coeffs()) r.push_back(to_rational(c));
    trim(r);
    return r;
}

inline RationalPoly derivative(const RationalPoly& p) {
    RationalPoly d;
    for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<long long>(k));
    trim(d);
    return d;
}

/// Remainder of a divided by b (b nonzero).
inline RationalPoly remainder(RationalPoly a, const RationalPoly& b) {
    while (!a.empty() && a.size() >= b.size()) {
        Rational q = a.back() / b.back();
        std::size_t shift = a.size() - b.size();
        for (std::size_t k = 0; k < b.size(); ++k) a[k + shift] -= q * b[k];
        a.pop_back();  // leading term cancels exactly
        trim(a);
    }
    return a;
}

inline std::vector<RationalPoly> sturm_chain(const RationalPoly& p) {
    std::vector<RationalPoly> chain{p, derivative(p)};
    while (!chain.back().empty()) {
        auto r = remainder(chain[chain.size() - 2], chain.back());
        for (auto& c : r) c = -c;
        if (r.empty()) break;
        chain.push_back(std::move(r));
    }
    if (chain.back().empty()) chain.pop_back();
    return chain;
}

inline int sign_at(const RationalPoly& p, const Rational& x) {
    Rational v = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

inline int sign_changes(const std::vector<RationalPoly>& chain, const Rational& x) {
    int changes = 0, last = 0;
    for (const auto& q : chain) {
        int s = sign_at(q, x);
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

inline double eval(const std::vector<double>& p, double x) {
    double v = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
    return v;
}

}  // namespace detail

/// Number of distinct real roots of p in [a, b], by exact rational Sturm sequences.
/// An endpoint that is itself a root is first moved outward by 1e-12.
inline int sturm_root_count(const Polynomial& p, double a, double b) {
    if (p.is_zero()) throw std::domain_error("sturm_root_count: zero polynomial");
    if (!(a <= b)) throw std::domain_error("sturm_root_count: empty interval");
    if (p.degree() == 0) return 0;
    auto rp = detail::to_rational(p);
    auto chain = detail::sturm_chain(rp);
    detail::Rational ra = detail::to_rational(a), rb = detail::to_rational(b);
    if (detail::sign_at(rp, ra) == 0) ra -= detail::to_rational(1e-12);
    if (detail::sign_at(rp, rb) == 0) rb += detail::to_rational(1e-12);
    return detail::sign_changes(chain, ra) - detail::sign_changes(chain, rb);
}

/// Floating-point Sturm count.  Aborts with accuracy_error when a remainder's leading
/// coefficient falls below 1e-10 relative to its largest coefficient, where signs stop being
/// trustworthy.  Kept as a cross-check of the exact path.
inline int sturm_root_count_double(const Polynomial& p, double a, double b) {
    if (p.is_zero()) throw std::domain_error("sturm_root_count_double: zero polynomial");
    if (p.degree() == 0) return 0;
    std::vector<std::vector<double>> chain{p.coeffs(), p.derivative().coeffs()};
    auto trim = [](std::vector<double>& v, double scale) {
        while (!v.empty() && std::fabs(v.back()) <= 1e-14 * scale) v.pop_back();
    };
    while (!chain.back().empty() && chain.back().size() > 1) {
        auto a2 = chain[chain.size() - 2];
        const auto& bq = chain.back();
        double scale = 0.0;
        for (double v : a2) scale = std::max(scale, std::fabs(v));
        while (!a2.empty() && a2.size() >= bq.size()) {
            double q = a2.back() / bq.back();
            std::size_t shift = a2.size() - bq.size();
            for (std::size_t k = 0; k < bq.size(); ++k) a2[k + shift] -= q * bq[k];
            a2.pop_back();
            trim(a2, scale);
        }
        if (a2.empty()) break;
        double big = 0.0;
        for (double v : a2) big = std::max(big, std::fabs(v));
        if (std::fabs(a2.back()) < 1e-10 * big)
            throw accuracy_error("sturm_root_count_double: leading coefficient below guard", std::fabs(a2.back()));
        for (auto& v : a2) v = -v;
        chain.push_back(std::move(a2));
    }
    if (detail::eval(p.coeffs(), a) == 0.0) a -= 1e-12;
    if (detail::eval(p.coeffs(), b) == 0.0) b += 1e-12;
    auto changes = [&](double x) {
        int c = 0, last = 0;
        for (const auto& q : chain) {
            double v = detail::eval(q, x);
            int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
            if (s == 0) continue;
            if (last != 0 && s != last) ++c;
            last = s;
        }
        return c;
    };
    return changes(a) - changes(b);
}

/// Local graphs of the stable and unstable manifolds in a chart at a contact point; both
/// vanish at 0 and are considered on [-window, window].
struct JetPair {
    Polynomial stable;
    Polynomial unstable;
    int r = 1;
    double window = 1.0;
};

/// Smallest k in 1..r where the degree-k coefficients differ; nullopt when the degree-r jets
/// agree (a contact of order above r).
inline std::optional<int> tangency_order(const JetPair& jp) {
    if (jp.r < 1) throw precondition_error("tangency_order: r must be >= 1");
    if (!(jp.window > 0.0)) throw precondition_error("tangency_order: window must have positive length");
    if (jp.stable.coeff(0) != 0.0 || jp.unstable.coeff(0) != 0.0)
        throw precondition_error("tangency_order: graphs must meet at the origin");
    for (int k = 1; k <= jp.r; ++k)
        if (jp.stable.coeff(k) != jp.unstable.coeff(k)) return k;
    return std::nullopt;
}

struct LocalBound {
    bool unbounded = false;  // jets agree through degree r
    int bound = 0;           // tangency order k
    int root_count = 0;      // distinct roots of g^u - g^s in the window
    bool verified = false;   // root_count <= bound
};

/// Local N-expansivity bound.  Modeling assumption: inside the chart the dynamical ball of the
/// contact point is W^s ∩ W^u, i.e. the zero set of g^u - g^s, so its cardinality is the
/// number of distinct roots in the window; the bound is the tangency order.
inline LocalBound local_ball_cardinality_bound(const JetPair& jp) {
    LocalBound lb;
    auto k = tangency_order(jp);
    Polynomial diff = jp.unstable - jp.stable;
    if (!k || diff.is_zero()) {
        lb.unbounded = true;
        return lb;
    }
    lb.bound = *k;
    lb.root_count = sturm_root_count(diff, -jp.window, jp.window);
    lb.verified = lb.root_count <= lb.bound;
    return lb;
}

}  // namespace explab

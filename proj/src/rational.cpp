#include "iwrr/rational.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace iwrr {

namespace {

using i128 = __int128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();
constexpr i128 kMin = std::numeric_limits<std::int64_t>::min();

i128 gcd128(i128 a, i128 b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::int64_t narrow(i128 v)
{
    if (v > kMax || v < kMin) throw std::overflow_error("rational overflow");
    return static_cast<std::int64_t>(v);
}

}  // namespace

Rat::Rat(std::int64_t n, std::int64_t d)
{
    if (d == 0) throw std::domain_error("rational with zero denominator");
    *this = fromWide(n, d);
}

Rat Rat::fromWide(i128 n, i128 d)
{
    if (d < 0) {
        n = -n;
        d = -d;
    }
    i128 g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    Rat r;
    r.num_ = narrow(n);
    r.den_ = narrow(d);
    return r;
}

std::int64_t Rat::floor() const
{
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
}

std::int64_t Rat::ceil() const
{
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
}

Rat Rat::operator-() const
{
    if (num_ == std::numeric_limits<std::int64_t>::min()) throw std::overflow_error("rational overflow");
    Rat r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

Rat& Rat::operator+=(const Rat& o)
{
    if (den_ == o.den_) {
        if (den_ == 1) {
            num_ = narrow(static_cast<i128>(num_) + o.num_);
            return *this;
        }
        *this = fromWide(static_cast<i128>(num_) + o.num_, den_);
        return *this;
    }
    std::int64_t g = std::gcd(den_, o.den_);
    i128 n = static_cast<i128>(num_) * (o.den_ / g) + static_cast<i128>(o.num_) * (den_ / g);
    i128 d = static_cast<i128>(den_) * (o.den_ / g);
    *this = fromWide(n, d);
    return *this;
}

Rat& Rat::operator-=(const Rat& o) { return *this += -o; }

Rat& Rat::operator*=(const Rat& o)
{
    if (num_ == 0 || o.num_ == 0) {
        num_ = 0;
        den_ = 1;
        return *this;
    }
    std::int64_t g1 = std::gcd(num_, o.den_);
    std::int64_t g2 = std::gcd(o.num_, den_);
    i128 n = static_cast<i128>(num_ / g1) * (o.num_ / g2);
    i128 d = static_cast<i128>(den_ / g2) * (o.den_ / g1);
    num_ = narrow(n);
    den_ = narrow(d);
    return *this;
}

Rat& Rat::operator/=(const Rat& o)
{
    if (o.num_ == 0) throw std::domain_error("rational division by zero");
    Rat inv;
    inv.num_ = o.den_;
    inv.den_ = o.num_;
    if (inv.den_ < 0) {
        inv.num_ = -inv.num_;
        inv.den_ = -inv.den_;
    }
    return *this *= inv;
}

std::strong_ordering operator<=>(const Rat& a, const Rat& b)
{
    if (a.den_ == b.den_) return a.num_ <=> b.num_;
    i128 l = static_cast<i128>(a.num_) * b.den_;
    i128 r = static_cast<i128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Rat Rat::parse(std::string_view text)
{
    auto fail = [&]() -> Rat { throw std::invalid_argument("not a rational number: '" + std::string(text) + "'"); };
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) return fail();

    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        Rat n = parse(text.substr(0, slash));
        Rat d = parse(text.substr(slash + 1));
        if (d.isZero()) return fail();
        return n / d;
    }

    bool negative = false;
    std::size_t pos = 0;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    i128 mantissa = 0;
    int scale = 0;  // number of fractional digits
    bool seenDigit = false;
    bool seenPoint = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c >= '0' && c <= '9') {
            mantissa = mantissa * 10 + (c - '0');
            if (mantissa > kMax * 1000) throw std::overflow_error("rational overflow");
            if (seenPoint) ++scale;
            seenDigit = true;
        } else if (c == '.' && !seenPoint) {
            seenPoint = true;
        } else {
            break;
        }
    }
    if (!seenDigit) return fail();
    int exponent = 0;
    if (pos < text.size()) {
        if (text[pos] != 'e' && text[pos] != 'E') return fail();
        ++pos;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), exponent);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            // from_chars rejects a leading '+'
            if (pos < text.size() && text[pos] == '+') {
                auto [p2, e2] = std::from_chars(text.data() + pos + 1, text.data() + text.size(), exponent);
                if (e2 != std::errc{} || p2 != text.data() + text.size()) return fail();
            } else {
                return fail();
            }
        }
    }
    int power = exponent - scale;
    if (power > 36 || power < -36) throw std::overflow_error("rational overflow");
    i128 num = negative ? -mantissa : mantissa;
    i128 den = 1;
    for (int k = 0; k < power; ++k) num *= 10;
    for (int k = 0; k < -power; ++k) den *= 10;
    return fromWide(num, den);
}

Rat Rat::fromDouble(double v)
{
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite number");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::invalid_argument("cannot format number");
    return parse(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

std::string Rat::str() const
{
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

std::int64_t floorDiv(const Rat& a, const Rat& b)
{
    if (b.sign() <= 0) throw std::domain_error("floorDiv by non-positive");
    return (a / b).floor();
}

Rat lcm(const Rat& a, const Rat& b)
{
    if (a.sign() <= 0 || b.sign() <= 0) throw std::domain_error("lcm of non-positive rationals");
    // lcm(p/q, r/s) = lcm(p, r) / gcd(q, s) for reduced fractions
    i128 g = gcd128(a.num(), b.num());
    i128 l = static_cast<i128>(a.num()) / g * b.num();
    std::int64_t d = std::gcd(a.den(), b.den());
    return Rat(narrow(l), d);
}

}  // namespace iwrr

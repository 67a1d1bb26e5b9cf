// rational.hpp - exact rational numbers used for every amount of data (bits)
// and every instant (seconds) in the toolkit.
//
// Values are kept in canonical form (den > 0, gcd(|num|, den) == 1) with
// 64-bit components. Intermediate products use 128-bit integers; a result
// that does not fit back into 64 bits throws std::overflow_error instead of
// silently wrapping.

#ifndef IWRR_RATIONAL_HPP
#define IWRR_RATIONAL_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace iwrr {

class Rat {
public:
    constexpr Rat() = default;
    constexpr Rat(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
    Rat(std::int64_t n, std::int64_t d);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool isZero() const { return num_ == 0; }
    bool isInteger() const { return den_ == 1; }
    int sign() const { return (num_ > 0) - (num_ < 0); }

    double toDouble() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    // floor / ceil as integers
    std::int64_t floor() const;
    std::int64_t ceil() const;

    Rat operator-() const;
    Rat& operator+=(const Rat& o);
    Rat& operator-=(const Rat& o);
    Rat& operator*=(const Rat& o);
    Rat& operator/=(const Rat& o);

    friend Rat operator+(Rat a, const Rat& b) { return a += b; }
    friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
    friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
    friend Rat operator/(Rat a, const Rat& b) { return a /= b; }

    friend bool operator==(const Rat& a, const Rat& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b);

    // "p/q", "p", or a decimal such as "-12.5e-3", parsed exactly.
    static Rat parse(std::string_view text);
    // Exact value of a double via its shortest round-trip decimal text.
    static Rat fromDouble(double v);

    // "p/q" (or "p" for integers)
    std::string str() const;

private:
    static Rat fromWide(__int128 n, __int128 d);

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rat& r);

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }
inline Rat min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline Rat max(const Rat& a, const Rat& b) { return a < b ? b : a; }
inline Rat positivePart(const Rat& r) { return r.sign() < 0 ? Rat{} : r; }

// Floor of a/b for positive b, as an integer.
std::int64_t floorDiv(const Rat& a, const Rat& b);

// Least common multiple of two positive rationals: the smallest positive q
// with q/a and q/b both integers.
Rat lcm(const Rat& a, const Rat& b);

}  // namespace iwrr

template <>
struct std::hash<iwrr::Rat> {
    std::size_t operator()(const iwrr::Rat& r) const noexcept
    {
        return std::hash<std::int64_t>{}(r.num()) * 31u ^ std::hash<std::int64_t>{}(r.den());
    }
};

#endif  // IWRR_RATIONAL_HPP

// Internal helpers shared by the curve translation units.
#ifndef IWRR_CURVE_BUILD_HPP
#define IWRR_CURVE_BUILD_HPP

#include <algorithm>
#include <vector>

#include "iwrr/curve.hpp"

namespace iwrr::detail {

inline void sortUnique(std::vector<Rat>& xs)
{
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
}

// Builds a curve on [0, T + d) by sampling the three callbacks at the given
// candidate breakpoints. The callbacks must describe a function that is
// linear between consecutive candidates.
template <class Value, class Right, class Slope>
Curve buildFrom(std::vector<Rat> xs, const Rat& T, const Rat& d, const Rat& c, Value value, Right right,
                Slope slope)
{
    xs.push_back(Rat(0));
    xs.push_back(T);
    sortUnique(xs);
    const Rat end = T + d;
    std::vector<Piece> pieces;
    pieces.reserve(xs.size());
    for (const Rat& x : xs) {
        if (x.sign() < 0) continue;
        if (x >= end) break;
        pieces.push_back(Piece{x, value(x), right(x), slope(x)});
    }
    return Curve(std::move(pieces), T, d, c);
}

// A period D on which both curves repeat beyond their transients.
Rat commonPeriod(const Curve& f, const Curve& g);

}  // namespace iwrr::detail

#endif  // IWRR_CURVE_BUILD_HPP

// oracle.hpp - brute-force references for the closed-form constructions.
//
// Everything here samples functions on a rational grid {0, s, 2s, ..., H} and
// uses nothing but point evaluation, so it is independent of the curve
// algebra it checks. Grids are capped at 1,000,000 points (5,000 for the
// quadratic convolution).

#ifndef IWRR_ORACLE_HPP
#define IWRR_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "iwrr/rational.hpp"

namespace iwrr::oracle {

using Fn = std::function<Rat(const Rat&)>;

struct Grid {
    Rat step;
    Rat horizon;

    std::int64_t points() const;  // number of grid points, horizon included
    Rat at(std::int64_t k) const { return step * Rat(k); }
};

// (f (x) g)(k s) = min over grid splits; for a unit-rate f and increasing g the
// exact value lies in [result - s, result].
std::vector<Rat> gridConvolution(const Fn& f, const Fn& g, const Grid& grid);

// Leftmost grid x with f(x) >= y for each y; nullopt when no grid point
// reaches y. The exact f^(y) lies in (x - s, x].
std::vector<std::optional<Rat>> gridPseudoInverse(const Fn& f, const Grid& xs, const std::vector<Rat>& ys);

// Bracket of h(alpha, beta) from the grid. `lo` and `hi` enclose the exact
// supremum over t in [0, tMax]; unbounded when beta does not reach some
// alpha(t) within the grid.
struct DeviationBracket {
    Rat lo;
    Rat hi;
    bool unbounded = false;
};
DeviationBracket gridHorizontalDeviation(const Fn& alpha, const Fn& beta, const Grid& grid, const Rat& tMax);

// Largest number of flow-j emission opportunities in a window of the
// interleaved schedule containing exactly p opportunities of flow i, found by
// enumerating the rounds.
std::int64_t phiByEnumeration(const std::vector<std::int64_t>& weights, std::size_t i, std::size_t j,
                              std::int64_t p);

// Interleaved emission order over one round (flow indices).
std::vector<std::size_t> roundSchedule(const std::vector<std::int64_t>& weights);

}  // namespace iwrr::oracle

#endif  // IWRR_ORACLE_HPP

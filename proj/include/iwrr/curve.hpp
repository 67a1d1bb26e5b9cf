// curve.hpp - exact ultimately pseudo-periodic piecewise-linear functions.
//
// A Curve f is wide-sense increasing on [0, +inf). It is stored as a list of
// pieces covering [0, T + d), each piece giving the value at its start, the
// right limit at its start and the slope on the open interval up to the next
// piece. Beyond the transient T the function repeats:
//
//     f(x + d) = f(x) + c        for all x >= T.
//
// Both left-continuous (stairs) and right-continuous (psi) shapes are
// representable since value and right limit are stored separately.

#ifndef IWRR_CURVE_HPP
#define IWRR_CURVE_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iwrr/rational.hpp"

namespace iwrr {

struct Piece {
    Rat x;      // start abscissa
    Rat value;  // f(x)
    Rat right;  // f(x+)
    Rat slope;  // slope on (x, next piece)

    friend bool operator==(const Piece&, const Piece&) = default;
};

class Curve {
public:
    // Validates and normalizes. Throws std::invalid_argument on pieces that
    // are not increasing or do not start at 0.
    Curve(std::vector<Piece> pieces, Rat transient, Rat period, Rat increment);

    const std::vector<Piece>& pieces() const { return pieces_; }
    Rat transient() const { return T_; }
    Rat period() const { return d_; }
    Rat increment() const { return c_; }
    // long-term slope c/d
    Rat rate() const { return c_ / d_; }

    Rat operator()(const Rat& x) const { return value(x); }
    Rat value(const Rat& x) const;
    Rat leftLimit(const Rat& x) const;  // x > 0
    Rat rightLimit(const Rat& x) const;
    // slope of the piece that contains (x, x + eps)
    Rat slopeRight(const Rat& x) const;

    // Breakpoints (piece starts, periodic copies included unless the tail is
    // affine) in [a, b).
    std::vector<Rat> breakpointsIn(const Rat& a, const Rat& b) const;
    // Pieces of the unrolled function that start in [from, upTo).
    std::vector<Piece> unrolled(const Rat& upTo, const Rat& from = Rat(0)) const;

    bool isContinuous() const;
    // f is affine on [T, +inf), so any period can be used for the tail.
    bool isUltimatelyAffine() const;
    bool isBounded() const { return c_.isZero(); }

    std::string describe() const;

private:
    struct Where {
        std::size_t index;
        Rat local;   // abscissa folded into the stored range
        Rat offset;  // value shift added by the folding
    };
    Where locate(const Rat& x) const;
    void validate() const;
    void normalize();
    void mergePieces();
    bool reduceAffineTail();
    bool reduceOnePeriod();

    std::vector<Piece> pieces_;
    Rat T_;
    Rat d_;
    Rat c_;
};

std::ostream& operator<<(std::ostream& os, const Curve& f);

// How far curve-wide checks look past the transients.
struct HorizonSpec {
    int periodsToCheck = 3;
};

// ---- constructors ----------------------------------------------------------

Curve zeroCurve();
// gamma_{r,b}: 0 at 0, r t + b for t > 0
Curve tokenBucket(const Rat& r, const Rat& b);
// nu_{a,b}(t) = a ceil(t / b)
Curve stair(const Rat& a, const Rat& b);
// beta_{r,T}(t) = r [t - T]^+
Curve rateLatency(const Rat& r, const Rat& latency);
// lambda_1
Curve unitRate();
// Continuous interpolation of points (t_0 = 0 < t_1 < ...). The last period
// spans [t_last - d, t_last] and must rise by exactly c.
Curve piecewiseLinear(const std::vector<std::pair<Rat, Rat>>& points, const Rat& d, const Rat& c);

// ---- pointwise transformations ----------------------------------------------

// x -> f([x - a]^+)
Curve shiftRight(const Curve& f, const Rat& a);
Curve addConstant(const Curve& f, const Rat& k);
// x -> yScale * f(x / xScale)
Curve scale(const Curve& f, const Rat& xScale, const Rat& yScale);
Curve add(const Curve& f, const Curve& g);
Curve minOf(const Curve& f, const Curve& g);
Curve maxOf(const Curve& f, const Curve& g);
Curve maxOf(const std::vector<Curve>& fs);

// ---- min-plus operations ------------------------------------------------------

// lambda_1 (x) f
Curve convolveUnitRate(const Curve& f);
// f^(y) = inf { x | f(x) >= y }; throws DomainError when f is bounded.
Curve lowerPseudoInverse(const Curve& f);
// t -> outer(inner(t)); inner must be continuous.
Curve compose(const Curve& outer, const Curve& inner);
// ceil(f / l) * l
Curve packetizeCeil(const Curve& f, const Rat& l);
// floor(f / l) * l
Curve packetizeFloor(const Curve& f, const Rat& l);
// Arrival curve of a source sending packets of length l greedily under the
// token bucket gamma_{r,b}: ceil(b / l) packets at once, then one packet each
// time the bucket reaches the next multiple of l.
Curve greedyPacketSource(const Rat& r, const Rat& b, const Rat& l);

// Horizontal deviation h(alpha, beta); nullopt when unbounded.
std::optional<Rat> horizontalDeviation(const Curve& alpha, const Curve& beta);

// Reuses the pseudo-inverse of beta across many arrival curves.
class DeviationEvaluator {
public:
    explicit DeviationEvaluator(const Curve& beta);
    std::optional<Rat> operator()(const Curve& alpha) const;

private:
    Rat betaRate_;
    bool betaBounded_;
    std::optional<Curve> inverse_;
    Rat inverseSlack_;  // sup_y beta^(y) - y / betaRate
};

// ---- comparisons --------------------------------------------------------------

struct LeqResult {
    bool holds = true;
    std::optional<Rat> witness;  // some x with f(x) > g(x)
    explicit operator bool() const { return holds; }
};
LeqResult curveLeq(const Curve& f, const Curve& g, const HorizonSpec& h = {});

struct SuperadditivityResult {
    bool holds = true;
    std::optional<std::pair<Rat, Rat>> witness;  // (s, t) with f(s+t) < f(s)+f(t)
    explicit operator bool() const { return holds; }
};
SuperadditivityResult checkSuperadditive(const Curve& f, const HorizonSpec& h = {});
// Same lattice, reversed inequality: witness has f(s+t) > f(s)+f(t).
SuperadditivityResult checkSubadditive(const Curve& f, const HorizonSpec& h = {});

// Same function, whatever the stored transient and period.
bool equivalent(const Curve& f, const Curve& g);

// inf and sup of f(x) - rate * x over x >= from, from in {0, T}
struct AffineGap {
    Rat lo;
    Rat hi;
};
AffineGap affineGap(const Curve& f, bool fromZero);

}  // namespace iwrr

#endif  // IWRR_CURVE_HPP

// Min-plus operations on curves: unit-rate convolution, lower pseudo-inverse,
// composition, packetization and horizontal deviation.
#include <stdexcept>

#include "curve_build.hpp"
#include "iwrr/curve.hpp"
#include "iwrr/errors.hpp"

namespace iwrr {

namespace {

Rat endValue(const Piece& p, const Rat& x) { return p.right + p.slope * (x - p.x); }

std::optional<Rat> minOpt(const std::optional<Rat>& a, const Rat& b)
{
    if (!a || b < *a) return b;
    return a;
}

}  // namespace

Curve convolveUnitRate(const Curve& f)
{
    // (lambda_1 (x) f)(t) = t + inf_{u <= t} (f(u) - u), left limits included.
    const Rat T = f.transient();
    const Rat d = f.period();
    const Rat c = f.increment();
    const auto& ps = f.pieces();

    Rat newT = T + d;
    if (c < d) {
        // f(u) - u drops by d - c per period; wait until the running minimum
        // is set inside the latest period.
        std::optional<Rat> before;
        std::optional<Rat> within;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            const Piece& p = ps[k];
            Rat next = k + 1 < ps.size() ? ps[k + 1].x : T + d;
            std::optional<Rat>& slot = p.x < T ? before : within;
            slot = minOpt(slot, p.value - p.x);
            slot = minOpt(slot, p.right - p.x);
            slot = minOpt(slot, endValue(p, next) - next);
        }
        if (before && *within > *before) newT = T + d * Rat(((*within - *before) / (d - c)).ceil() + 1);
    }
    const Rat end = newT + d;

    std::vector<Piece> out;
    const std::vector<Piece> up = f.unrolled(end);
    std::optional<Rat> M;
    for (std::size_t k = 0; k < up.size(); ++k) {
        const Piece& p = up[k];
        const Rat xb = k + 1 < up.size() ? up[k + 1].x : end;
        M = minOpt(M, p.value - p.x);
        const Rat g = p.x + *M;
        const Rat h0 = p.right - p.x;
        if (p.slope >= Rat(1)) {
            out.push_back(Piece{p.x, g, g, 1});
            continue;
        }
        const Rat hEnd = h0 + (p.slope - Rat(1)) * (xb - p.x);
        if (h0 == *M) {
            out.push_back(Piece{p.x, g, g, p.slope});
            M = hEnd;
            continue;
        }
        out.push_back(Piece{p.x, g, g, 1});
        Rat u = p.x + (h0 - *M) / (Rat(1) - p.slope);
        if (u < xb) {
            Rat gu = u + *M;
            out.push_back(Piece{u, gu, gu, p.slope});
            M = hEnd;
        }
    }
    return Curve(std::move(out), newT, d, c < d ? c : d);
}

Curve lowerPseudoInverse(const Curve& f)
{
    if (f.isBounded()) throw DomainError("inverse diverges: curve is bounded");
    const Rat T = f.transient();
    const Rat d = f.period();
    const Rat c = f.increment();
    const Rat yT = f.value(T) + c;
    const Rat yEnd = yT + c;
    const Rat xEnd = T + d + d;

    // Walk the completed graph of f and keep its rising parts; transposed,
    // they are the pieces of the inverse.
    struct Rise {
        Rat y0, y1, x0, x1;
    };
    std::vector<Rise> rises;
    const std::vector<Piece> up = f.unrolled(xEnd);
    Rat before = 0;  // left limit at the current abscissa
    for (std::size_t k = 0; k < up.size(); ++k) {
        const Piece& p = up[k];
        if (p.right > before) rises.push_back(Rise{before, p.right, p.x, p.x});
        const Rat xb = k + 1 < up.size() ? up[k + 1].x : xEnd;
        const Rat yb = endValue(p, xb);
        if (p.slope.sign() > 0) rises.push_back(Rise{p.right, yb, p.x, xb});
        before = yb;
    }
    if (f.rightLimit(xEnd) > before) rises.push_back(Rise{before, f.rightLimit(xEnd), xEnd, xEnd});

    std::vector<Piece> out;
    Rat reached = 0;
    for (const Rise& r : rises) {
        if (r.y0 >= yEnd) break;
        out.push_back(Piece{r.y0, reached, r.x0, (r.x1 - r.x0) / (r.y1 - r.y0)});
        reached = r.x1;
    }
    return Curve(std::move(out), yT, c, d);
}

Curve compose(const Curve& outer, const Curve& inner)
{
    if (!inner.isContinuous()) throw std::invalid_argument("compose needs a continuous inner curve");
    const Rat Ti = inner.transient();
    const Rat di = inner.period();
    const Rat ci = inner.increment();
    Rat T = Ti;
    Rat D = di;
    Rat C = 0;
    if (!ci.isZero()) {
        Rat innerStep;
        if (outer.isUltimatelyAffine()) {
            innerStep = ci;
            C = outer.rate() * ci;
        } else if (inner.isUltimatelyAffine()) {
            D = outer.period() / inner.rate();
            innerStep = outer.period();
            C = outer.increment();
        } else {
            Rat ratio = ci / outer.period();
            D = di * Rat(ratio.den());
            innerStep = ci * Rat(ratio.den());
            C = outer.increment() * Rat(ratio.num());
        }
        Rat y = inner.value(Ti);
        if (y < outer.transient()) T = Ti + D * Rat(((outer.transient() - y) / innerStep).ceil());
    }
    const Rat end = T + D;

    std::vector<Rat> xs;
    // an affine tail needs no periodic copies of its single piece
    const std::vector<Piece> up = inner.unrolled(inner.isUltimatelyAffine() ? min(end, Ti + di) : end);
    for (std::size_t k = 0; k < up.size(); ++k) {
        const Piece& p = up[k];
        xs.push_back(p.x);
        if (p.slope.sign() <= 0) continue;
        const Rat xb = k + 1 < up.size() ? up[k + 1].x : end;
        for (const Rat& y : outer.breakpointsIn(p.right, endValue(p, xb)))
            if (y > p.right) xs.push_back(p.x + (y - p.right) / p.slope);
    }
    return detail::buildFrom(
        std::move(xs), T, D, C, [&](const Rat& x) { return outer.value(inner.value(x)); },
        [&](const Rat& x) {
            Rat y = inner.value(x);
            return inner.slopeRight(x).sign() > 0 ? outer.rightLimit(y) : outer.value(y);
        },
        [&](const Rat& x) {
            Rat s = inner.slopeRight(x);
            return s.sign() > 0 ? s * outer.slopeRight(inner.value(x)) : Rat(0);
        });
}

namespace {

Curve packetize(const Curve& f, const Rat& l, bool up)
{
    if (l.sign() <= 0) throw std::invalid_argument("packet length must be positive");
    const Rat T = f.transient();
    Rat D = f.period();
    Rat C = 0;
    if (!f.isBounded()) {
        if (f.isUltimatelyAffine()) {
            D = l / f.rate();
            C = l;
        } else {
            Rat ratio = f.increment() / l;
            D = f.period() * Rat(ratio.den());
            C = f.increment() * Rat(ratio.den());
        }
    }
    const Rat end = T + D;
    std::vector<Rat> xs;
    const std::vector<Piece> up_ = f.unrolled(end);
    for (std::size_t k = 0; k < up_.size(); ++k) {
        const Piece& p = up_[k];
        xs.push_back(p.x);
        if (p.slope.sign() <= 0) continue;
        const Rat xb = k + 1 < up_.size() ? up_[k + 1].x : end;
        const Rat y1 = endValue(p, xb);
        for (std::int64_t m = (p.right / l).floor() + 1; Rat(m) * l < y1; ++m)
            xs.push_back(p.x + (Rat(m) * l - p.right) / p.slope);
    }
    auto ceilTo = [&](const Rat& v) { return l * Rat((v / l).ceil()); };
    auto floorTo = [&](const Rat& v) { return l * Rat((v / l).floor()); };
    return detail::buildFrom(
        std::move(xs), T, D, C, [&](const Rat& x) { return up ? ceilTo(f.value(x)) : floorTo(f.value(x)); },
        [&](const Rat& x) {
            Rat r = f.rightLimit(x);
            if (!up) return floorTo(r);
            return f.slopeRight(x).sign() > 0 ? l * Rat((r / l).floor() + 1) : ceilTo(r);
        },
        [](const Rat&) { return Rat(0); });
}

}  // namespace

Curve packetizeCeil(const Curve& f, const Rat& l) { return packetize(f, l, true); }
Curve packetizeFloor(const Curve& f, const Rat& l) { return packetize(f, l, false); }

Curve greedyPacketSource(const Rat& r, const Rat& b, const Rat& l)
{
    return maxOf(packetizeFloor(tokenBucket(r, b), l), packetizeCeil(tokenBucket(0, b), l));
}

// ---- horizontal deviation -------------------------------------------------------

DeviationEvaluator::DeviationEvaluator(const Curve& beta)
    : betaRate_(beta.rate()), betaBounded_(beta.isBounded())
{
    if (!betaBounded_) {
        inverse_ = lowerPseudoInverse(beta);
        inverseSlack_ = affineGap(*inverse_, true).hi;
    }
}

std::optional<Rat> DeviationEvaluator::operator()(const Curve& alpha) const
{
    if (betaBounded_ || alpha.rate() > betaRate_) return std::nullopt;
    const Curve& G = *inverse_;
    Rat best = 0;

    // D(t) = G(alpha(t)) - t is linear between the breakpoints of alpha and
    // the preimages of the breakpoints of G; take every one-sided limit.
    auto visit = [&](const Piece& p, const Rat& xb) {
        best = max(best, G.value(p.value) - p.x);
        if (p.slope.isZero()) {
            best = max(best, G.value(p.right) - p.x);
            return;
        }
        best = max(best, G.rightLimit(p.right) - p.x);
        const Rat yb = endValue(p, xb);
        for (const Rat& y : G.breakpointsIn(p.right, yb))
            if (y > p.right) best = max(best, G.rightLimit(y) - (p.x + (y - p.right) / p.slope));
        best = max(best, G.value(yb) - xb);
    };

    if (alpha.rate() == betaRate_) {
        // D is periodic once alpha has passed both transients.
        Rat P;
        if (G.isUltimatelyAffine()) {
            P = alpha.period();
        } else if (alpha.isUltimatelyAffine()) {
            P = G.period() / alpha.rate();
        } else {
            Rat ratio = alpha.increment() / G.period();
            P = alpha.period() * Rat(ratio.den());
        }
        const Rat stepY = alpha.rate() * P;
        Rat t0 = alpha.transient();
        const Rat y0 = alpha.value(t0);
        if (y0 < G.transient()) t0 += P * Rat(((G.transient() - y0) / stepY).ceil());
        const Rat end = t0 + P;
        const std::vector<Piece> up = alpha.unrolled(end);
        for (std::size_t k = 0; k < up.size(); ++k) visit(up[k], k + 1 < up.size() ? up[k + 1].x : end);
        return best;
    }

    // Slower arrivals: D(t) <= cap - decay * t, so stop once that bound
    // falls below the best value seen.
    const Rat decay = Rat(1) - alpha.rate() / betaRate_;
    const Rat cap = inverseSlack_ + affineGap(alpha, true).hi / betaRate_;
    std::optional<Piece> pending;
    Rat from = 0;
    Rat to = alpha.transient() + alpha.period();
    for (;;) {
        for (const Piece& p : alpha.unrolled(to, from)) {
            if (pending) visit(*pending, p.x);
            if (cap - decay * p.x <= best) return best;
            pending = p;
        }
        from = to;
        to = to + alpha.period() * Rat(16);
    }
}

std::optional<Rat> horizontalDeviation(const Curve& alpha, const Curve& beta)
{
    return DeviationEvaluator(beta)(alpha);
}

}  // namespace iwrr

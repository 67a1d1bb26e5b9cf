#include "iwrr/curve.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "curve_build.hpp"

namespace iwrr {

namespace {

Rat endValue(const Piece& p, const Rat& x) { return p.right + p.slope * (x - p.x); }

}  // namespace

Curve::Curve(std::vector<Piece> pieces, Rat transient, Rat period, Rat increment)
    : pieces_(std::move(pieces)), T_(transient), d_(period), c_(increment)
{
    if (d_.sign() <= 0) throw std::invalid_argument("curve period must be positive");
    if (c_.sign() < 0) throw std::invalid_argument("curve increment must be nonnegative");
    if (T_.sign() < 0) throw std::invalid_argument("curve transient must be nonnegative");
    if (pieces_.empty() || !pieces_.front().x.isZero())
        throw std::invalid_argument("curve pieces must start at 0");

    const Rat end = T_ + d_;
    while (!pieces_.empty() && pieces_.back().x >= end) pieces_.pop_back();
    for (std::size_t k = 1; k < pieces_.size(); ++k)
        if (!(pieces_[k - 1].x < pieces_[k].x)) throw std::invalid_argument("curve pieces must be strictly ordered");

    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), T_,
                               [](const Rat& v, const Piece& p) { return v < p.x; });
    const Piece& host = *(it - 1);
    if (host.x != T_) {
        Rat v = endValue(host, T_);
        pieces_.insert(it, Piece{T_, v, v, host.slope});
    }
    validate();
    normalize();
}

void Curve::validate() const
{
    if (pieces_.front().value.sign() < 0) throw std::invalid_argument("curve must be nonnegative at 0");
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        const Piece& p = pieces_[k];
        if (p.slope.sign() < 0) throw std::invalid_argument("curve slope must be nonnegative");
        if (p.right < p.value) throw std::invalid_argument("curve decreases at x=" + p.x.str());
        Rat next = k + 1 < pieces_.size() ? pieces_[k + 1].x : T_ + d_;
        Rat nextValue = k + 1 < pieces_.size() ? pieces_[k + 1].value : value(T_) + c_;
        if (nextValue < endValue(p, next)) throw std::invalid_argument("curve decreases at x=" + next.str());
    }
}

void Curve::mergePieces()
{
    std::vector<Piece> out;
    out.reserve(pieces_.size());
    for (const Piece& p : pieces_) {
        if (!out.empty()) {
            const Piece& q = out.back();
            if (p.x != T_ && p.value == p.right && p.slope == q.slope && endValue(q, p.x) == p.value) continue;
        }
        out.push_back(p);
    }
    pieces_ = std::move(out);
}

bool Curve::isUltimatelyAffine() const
{
    const Piece& last = pieces_.back();
    return last.x == T_ && last.value == last.right && last.slope * d_ == c_;
}

bool Curve::reduceAffineTail()
{
    if (!isUltimatelyAffine() || pieces_.size() < 2) return false;
    const Piece& q = pieces_[pieces_.size() - 2];
    if (q.slope == rate() && q.value == q.right && endValue(q, T_) == pieces_.back().value) {
        T_ = q.x;
        pieces_.pop_back();
        return true;
    }
    return false;
}

bool Curve::reduceOnePeriod()
{
    if (T_ < d_) return false;
    const Rat a = T_ - d_;
    std::vector<Rat> xs = breakpointsIn(a, T_);
    for (const Piece& p : pieces_)
        if (p.x >= T_) xs.push_back(p.x - d_);
    xs.push_back(a);
    detail::sortUnique(xs);
    for (const Rat& x : xs) {
        Rat y = x + d_;
        if (value(x) + c_ != value(y) || rightLimit(x) + c_ != rightLimit(y) || slopeRight(x) != slopeRight(y))
            return false;
        if (x > a && leftLimit(x) + c_ != leftLimit(y)) return false;
    }
    std::vector<Piece> kept;
    for (const Piece& p : pieces_) {
        if (p.x >= T_) break;
        kept.push_back(p);
    }
    auto it = std::upper_bound(kept.begin(), kept.end(), a, [](const Rat& v, const Piece& p) { return v < p.x; });
    const Piece& host = *(it - 1);
    if (host.x != a) {
        Rat v = endValue(host, a);
        kept.insert(it, Piece{a, v, v, host.slope});
    }
    pieces_ = std::move(kept);
    T_ = a;
    return true;
}

void Curve::normalize()
{
    for (;;) {
        mergePieces();
        if (reduceAffineTail()) continue;
        if (reduceOnePeriod()) continue;
        break;
    }
}

Curve::Where Curve::locate(const Rat& x) const
{
    if (x.sign() < 0) throw std::invalid_argument("curve evaluated at negative abscissa " + x.str());
    Rat local = x;
    Rat offset;
    if (x >= T_ + d_) {
        std::int64_t n = floorDiv(x - T_, d_);
        local = x - d_ * Rat(n);
        offset = c_ * Rat(n);
    }
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), local,
                               [](const Rat& v, const Piece& p) { return v < p.x; });
    return Where{static_cast<std::size_t>(it - pieces_.begin()) - 1, local, offset};
}

Rat Curve::value(const Rat& x) const
{
    Where w = locate(x);
    const Piece& p = pieces_[w.index];
    return (w.local == p.x ? p.value : endValue(p, w.local)) + w.offset;
}

Rat Curve::rightLimit(const Rat& x) const
{
    Where w = locate(x);
    return endValue(pieces_[w.index], w.local) + w.offset;
}

Rat Curve::slopeRight(const Rat& x) const { return pieces_[locate(x).index].slope; }

Rat Curve::leftLimit(const Rat& x) const
{
    if (x.sign() <= 0) throw std::invalid_argument("left limit needs a positive abscissa");
    Rat local = x;
    Rat offset;
    if (x > T_ + d_) {
        std::int64_t n = ((x - T_) / d_).ceil() - 1;
        local = x - d_ * Rat(n);
        offset = c_ * Rat(n);
    }
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), local,
                               [](const Piece& p, const Rat& v) { return p.x < v; });
    return endValue(*(it - 1), local) + offset;
}

std::vector<Rat> Curve::breakpointsIn(const Rat& a, const Rat& b) const
{
    std::vector<Rat> out;
    // periodic copies of an affine tail are not breakpoints
    const Rat upTo = isUltimatelyAffine() ? min(b, T_ + d_) : b;
    for (const Piece& p : unrolled(upTo, a)) out.push_back(p.x);
    return out;
}

std::vector<Piece> Curve::unrolled(const Rat& upTo, const Rat& from) const
{
    std::vector<Piece> out;
    for (const Piece& p : pieces_) {
        if (p.x >= T_ || p.x >= upTo) break;
        if (p.x >= from) out.push_back(p);
    }
    if (upTo <= T_) return out;
    std::int64_t n = from > T_ ? floorDiv(from - T_, d_) : 0;
    for (;; ++n) {
        Rat shift = d_ * Rat(n);
        if (T_ + shift >= upTo) break;
        Rat lift = c_ * Rat(n);
        for (const Piece& p : pieces_) {
            if (p.x < T_) continue;
            Rat x = p.x + shift;
            if (x >= upTo) break;
            if (x >= from) out.push_back(Piece{x, p.value + lift, p.right + lift, p.slope});
        }
    }
    return out;
}

bool Curve::isContinuous() const
{
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        const Piece& p = pieces_[k];
        if (p.value != p.right) return false;
        if (k > 0 && endValue(pieces_[k - 1], p.x) != p.value) return false;
    }
    return endValue(pieces_.back(), T_ + d_) == value(T_) + c_;
}

std::string Curve::describe() const
{
    std::ostringstream os;
    os << "T=" << T_ << " d=" << d_ << " c=" << c_ << " pieces:";
    for (const Piece& p : pieces_) os << " [x=" << p.x << " v=" << p.value << " r=" << p.right << " s=" << p.slope << "]";
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Curve& f) { return os << f.describe(); }

// ---- constructors ----------------------------------------------------------

Curve zeroCurve() { return Curve({Piece{0, 0, 0, 0}}, 0, 1, 0); }

Curve tokenBucket(const Rat& r, const Rat& b)
{
    if (r.sign() < 0 || b.sign() < 0) throw std::invalid_argument("token bucket needs r >= 0 and b >= 0");
    return Curve({Piece{0, 0, b, r}, Piece{1, r + b, r + b, r}}, 1, 1, r);
}

Curve stair(const Rat& a, const Rat& b)
{
    if (a.sign() <= 0 || b.sign() <= 0) throw std::invalid_argument("stair needs a > 0 and b > 0");
    return Curve({Piece{0, 0, a, 0}, Piece{b, a, a + a, 0}}, b, b, a);
}

Curve rateLatency(const Rat& r, const Rat& latency)
{
    if (r.sign() <= 0 || latency.sign() < 0) throw std::invalid_argument("rate-latency needs r > 0 and T >= 0");
    if (latency.isZero()) return Curve({Piece{0, 0, 0, r}}, 0, 1, r);
    return Curve({Piece{0, 0, 0, 0}, Piece{latency, 0, 0, r}}, latency, 1, r);
}

Curve unitRate() { return rateLatency(1, 0); }

Curve piecewiseLinear(const std::vector<std::pair<Rat, Rat>>& points, const Rat& d, const Rat& c)
{
    if (points.size() < 2) throw std::invalid_argument("piecewise curve needs at least two points");
    if (!points.front().first.isZero()) throw std::invalid_argument("piecewise curve must start at t=0");
    if (d.sign() <= 0 || c.sign() < 0) throw std::invalid_argument("piecewise period needs d > 0 and c >= 0");
    std::vector<Piece> pieces;
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        const auto& [x0, y0] = points[k];
        const auto& [x1, y1] = points[k + 1];
        if (!(x0 < x1)) throw std::invalid_argument("piecewise abscissas must increase");
        if (y1 < y0) throw std::invalid_argument("piecewise values must not decrease");
        pieces.push_back(Piece{x0, y0, y0, (y1 - y0) / (x1 - x0)});
    }
    const Rat last = points.back().first;
    const Rat T = last - d;
    if (T.sign() < 0) throw std::invalid_argument("piecewise period is longer than the point range");
    Curve probe(pieces, T, d, c);
    if (probe.leftLimit(last) != points.back().second || probe.value(T) + c != points.back().second)
        throw std::invalid_argument("piecewise points do not close the last period with increment c");
    return probe;
}

// ---- pointwise transformations ----------------------------------------------

Curve shiftRight(const Curve& f, const Rat& a)
{
    if (a.sign() < 0) throw std::invalid_argument("shift must be nonnegative");
    if (a.isZero()) return f;
    std::vector<Piece> pieces{Piece{0, f.value(0), f.value(0), 0}};
    for (const Piece& p : f.pieces()) pieces.push_back(Piece{p.x + a, p.value, p.right, p.slope});
    return Curve(std::move(pieces), f.transient() + a, f.period(), f.increment());
}

Curve addConstant(const Curve& f, const Rat& k)
{
    std::vector<Piece> pieces = f.pieces();
    for (Piece& p : pieces) {
        p.value += k;
        p.right += k;
    }
    return Curve(std::move(pieces), f.transient(), f.period(), f.increment());
}

Curve scale(const Curve& f, const Rat& xScale, const Rat& yScale)
{
    if (xScale.sign() <= 0 || yScale.sign() < 0) throw std::invalid_argument("scale factors must be positive");
    std::vector<Piece> pieces = f.pieces();
    for (Piece& p : pieces) {
        p.x *= xScale;
        p.value *= yScale;
        p.right *= yScale;
        p.slope = p.slope * yScale / xScale;
    }
    return Curve(std::move(pieces), f.transient() * xScale, f.period() * xScale, f.increment() * yScale);
}

namespace detail {

Rat commonPeriod(const Curve& f, const Curve& g)
{
    if (f.isUltimatelyAffine()) return g.period();
    if (g.isUltimatelyAffine()) return f.period();
    return lcm(f.period(), g.period());
}

}  // namespace detail

Curve add(const Curve& f, const Curve& g)
{
    const Rat T = max(f.transient(), g.transient());
    const Rat D = detail::commonPeriod(f, g);
    std::vector<Rat> xs = f.breakpointsIn(0, T + D);
    for (const Rat& x : g.breakpointsIn(0, T + D)) xs.push_back(x);
    return detail::buildFrom(
        std::move(xs), T, D, (f.rate() + g.rate()) * D, [&](const Rat& x) { return f.value(x) + g.value(x); },
        [&](const Rat& x) { return f.rightLimit(x) + g.rightLimit(x); },
        [&](const Rat& x) { return f.slopeRight(x) + g.slopeRight(x); });
}

AffineGap affineGap(const Curve& f, bool fromZero)
{
    const Rat rho = f.rate();
    const auto& ps = f.pieces();
    std::optional<Rat> lo, hi;
    auto see = [&](const Rat& v) {
        if (!lo || v < *lo) lo = v;
        if (!hi || v > *hi) hi = v;
    };
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const Piece& p = ps[k];
        if (!fromZero && p.x < f.transient()) continue;
        Rat next = k + 1 < ps.size() ? ps[k + 1].x : f.transient() + f.period();
        see(p.value - rho * p.x);
        see(p.right - rho * p.x);
        see(p.right + p.slope * (next - p.x) - rho * next);
    }
    return AffineGap{*lo, *hi};
}

namespace {

Curve minMax(const Curve& f, const Curve& g, bool takeMax)
{
    Rat T;
    Rat D;
    Rat C;
    if (f.rate() == g.rate()) {
        T = max(f.transient(), g.transient());
        D = detail::commonPeriod(f, g);
        C = f.rate() * D;
    } else {
        const Curve& hi = f.rate() > g.rate() ? f : g;
        const Curve& lo = f.rate() > g.rate() ? g : f;
        const Curve& winner = takeMax ? hi : lo;
        // beyond X the faster curve stays above the slower one
        Rat X = (affineGap(lo, false).hi - affineGap(hi, false).lo) / (hi.rate() - lo.rate());
        T = max(max(X, Rat(0)), max(f.transient(), g.transient()));
        D = winner.period();
        C = winner.increment();
    }
    const Rat end = T + D;
    std::vector<Rat> xs = f.breakpointsIn(0, end);
    for (const Rat& x : g.breakpointsIn(0, end)) xs.push_back(x);
    detail::sortUnique(xs);
    std::vector<Rat> crossings;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const Rat& a = xs[k];
        const Rat b = k + 1 < xs.size() ? xs[k + 1] : end;
        Rat d0 = f.rightLimit(a) - g.rightLimit(a);
        Rat d1 = f.leftLimit(b) - g.leftLimit(b);
        if (d0.sign() * d1.sign() < 0) crossings.push_back(a + (b - a) * d0 / (d0 - d1));
    }
    xs.insert(xs.end(), crossings.begin(), crossings.end());
    auto pick = [takeMax](const Rat& u, const Rat& v) { return takeMax ? max(u, v) : min(u, v); };
    return detail::buildFrom(
        std::move(xs), T, D, C, [&](const Rat& x) { return pick(f.value(x), g.value(x)); },
        [&](const Rat& x) { return pick(f.rightLimit(x), g.rightLimit(x)); },
        [&](const Rat& x) {
            Rat fr = f.rightLimit(x);
            Rat gr = g.rightLimit(x);
            if (fr == gr) return pick(f.slopeRight(x), g.slopeRight(x));
            return (fr > gr) == takeMax ? f.slopeRight(x) : g.slopeRight(x);
        });
}

}  // namespace

Curve minOf(const Curve& f, const Curve& g) { return minMax(f, g, false); }
Curve maxOf(const Curve& f, const Curve& g) { return minMax(f, g, true); }

Curve maxOf(const std::vector<Curve>& fs)
{
    if (fs.empty()) throw std::invalid_argument("max of an empty list");
    Curve acc = fs.front();
    for (std::size_t k = 1; k < fs.size(); ++k) acc = maxOf(acc, fs[k]);
    return acc;
}

// ---- comparisons --------------------------------------------------------------

namespace {

// Some point of (a, b) where d(x) = f - g > 0, given the one-sided limits of the
// linear difference at both ends.
Rat interiorWitness(const Rat& a, const Rat& b, const Rat& d0, const Rat& d1)
{
    if (d0.sign() > 0 && d1.sign() >= 0) return (a + b) / 2;
    if (d1.sign() > 0 && d0.sign() >= 0) return (a + b) / 2;
    Rat z = a + (b - a) * d0 / (d0 - d1);
    return d0.sign() > 0 ? (a + z) / 2 : (z + b) / 2;
}

void checkHorizonSpec(const HorizonSpec& h)
{
    if (h.periodsToCheck < 2) throw std::invalid_argument("periods_to_check must be at least 2");
}

}  // namespace

LeqResult curveLeq(const Curve& f, const Curve& g, const HorizonSpec& h)
{
    checkHorizonSpec(h);
    const Rat Tmax = max(f.transient(), g.transient());
    Rat H;
    if (f.rate() > g.rate()) {
        Rat X = (affineGap(g, false).hi - affineGap(f, false).lo) / (f.rate() - g.rate());
        H = max(X, Tmax) + 1;
    } else if (f.rate() < g.rate()) {
        // g - f only grows from one common period to the next
        Rat X = (affineGap(f, false).hi - affineGap(g, false).lo) / (g.rate() - f.rate());
        H = min(max(max(X, Tmax), Rat(0)), Tmax + detail::commonPeriod(f, g) * Rat(h.periodsToCheck));
    } else {
        H = Tmax + detail::commonPeriod(f, g) * Rat(h.periodsToCheck);
    }
    std::vector<Rat> xs = f.breakpointsIn(0, H);
    for (const Rat& x : g.breakpointsIn(0, H)) xs.push_back(x);
    xs.push_back(H);
    detail::sortUnique(xs);
    for (const Rat& x : xs)
        if (f.value(x) > g.value(x)) return LeqResult{false, x};
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const Rat& a = xs[k];
        const Rat& b = xs[k + 1];
        Rat d0 = f.rightLimit(a) - g.rightLimit(a);
        Rat d1 = f.leftLimit(b) - g.leftLimit(b);
        if (d0.sign() > 0 || d1.sign() > 0) return LeqResult{false, interiorWitness(a, b, d0, d1)};
    }
    return LeqResult{true, std::nullopt};
}

namespace {

// Looks for f(s + t) < f(s) + f(t) (super) or f(s + t) > f(s) + f(t) (sub).
// f(s + t) - f(s) - f(t) is linear on the cells cut by s, t and s + t in the
// breakpoint set B, so its extremes sit at the vertices s in B, t in B or
// t = b - s. Values and right limits are both checked there.
SuperadditivityResult additivityScan(const Curve& f, const HorizonSpec& h, bool super)
{
    checkHorizonSpec(h);
    const Rat H = f.transient() + f.period() * Rat(h.periodsToCheck);
    std::vector<Rat> base = f.breakpointsIn(0, H);
    base.push_back(H);
    detail::sortUnique(base);
    std::vector<Rat> atBase, rightAtBase;
    for (const Rat& x : base) {
        atBase.push_back(f.value(x));
        rightAtBase.push_back(f.rightLimit(x));
    }
    auto bad = [&](const Rat& whole, const Rat& parts) { return super ? whole < parts : whole > parts; };

    // values first, then right limits
    auto scan = [&](bool limits) -> std::optional<std::pair<Rat, Rat>> {
        const std::vector<Rat>& at = limits ? rightAtBase : atBase;
        auto f1 = [&](const Rat& x) { return limits ? f.rightLimit(x) : f.value(x); };
        for (std::size_t a = 0; a < base.size(); ++a) {
            const Rat& s = base[a];
            // t in B with t >= s; the rest follows by symmetry
            for (std::size_t b = a; b < base.size(); ++b) {
                const Rat sum = s + base[b];
                if (sum > H) break;
                if (bad(f1(sum), at[a] + at[b])) return std::make_pair(s, base[b]);
            }
            // t = b - s for every breakpoint b >= s
            for (std::size_t b = a; b < base.size(); ++b) {
                const Rat t = base[b] - s;
                if (bad(at[b], at[a] + f1(t))) return std::make_pair(s, t);
            }
        }
        return std::nullopt;
    };
    if (auto w = scan(false)) return SuperadditivityResult{false, w};
    if (auto w = scan(true)) return SuperadditivityResult{false, w};
    return SuperadditivityResult{true, std::nullopt};
}

}  // namespace

SuperadditivityResult checkSuperadditive(const Curve& f, const HorizonSpec& h) { return additivityScan(f, h, true); }

SuperadditivityResult checkSubadditive(const Curve& f, const HorizonSpec& h) { return additivityScan(f, h, false); }

bool equivalent(const Curve& f, const Curve& g)
{
    if (f.rate() != g.rate()) return false;
    const Rat H = max(f.transient(), g.transient()) + detail::commonPeriod(f, g);
    std::vector<Rat> xs = f.breakpointsIn(0, H);
    for (const Rat& x : g.breakpointsIn(0, H)) xs.push_back(x);
    xs.push_back(H);
    detail::sortUnique(xs);
    for (const Rat& x : xs) {
        if (f.value(x) != g.value(x)) return false;
        if (x < H && f.rightLimit(x) != g.rightLimit(x)) return false;
        if (x.sign() > 0 && f.leftLimit(x) != g.leftLimit(x)) return false;
    }
    return true;
}

}  // namespace iwrr

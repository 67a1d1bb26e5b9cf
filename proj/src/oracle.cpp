#include "iwrr/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace iwrr::oracle {

namespace {

constexpr std::int64_t kMaxPoints = 1000000;
constexpr std::int64_t kMaxConvolutionPoints = 5000;

std::vector<Rat> sample(const Fn& f, const Grid& g)
{
    std::vector<Rat> out;
    out.reserve(static_cast<std::size_t>(g.points()));
    for (std::int64_t k = 0; k < g.points(); ++k) out.push_back(f(g.at(k)));
    return out;
}

}  // namespace

std::int64_t Grid::points() const
{
    if (step.sign() <= 0 || horizon.sign() <= 0) throw std::invalid_argument("grid needs positive step and horizon");
    Rat n = horizon / step;
    if (n > Rat(kMaxPoints)) throw std::invalid_argument("grid exceeds " + std::to_string(kMaxPoints) + " points");
    return n.floor() + 1;
}

std::vector<Rat> gridConvolution(const Fn& f, const Fn& g, const Grid& grid)
{
    const std::int64_t n = grid.points();
    if (n > kMaxConvolutionPoints) throw std::invalid_argument("grid too fine for the quadratic convolution");
    const std::vector<Rat> fs = sample(f, grid);
    const std::vector<Rat> gs = sample(g, grid);
    std::vector<Rat> out(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        Rat best = fs[k] + gs[0];
        for (std::int64_t m = 1; m <= k; ++m) best = min(best, fs[k - m] + gs[m]);
        out[k] = best;
    }
    return out;
}

std::vector<std::optional<Rat>> gridPseudoInverse(const Fn& f, const Grid& xs, const std::vector<Rat>& ys)
{
    const std::vector<Rat> fs = sample(f, xs);
    std::vector<std::optional<Rat>> out;
    out.reserve(ys.size());
    for (const Rat& y : ys) {
        auto it = std::lower_bound(fs.begin(), fs.end(), y);
        if (it == fs.end())
            out.push_back(std::nullopt);
        else
            out.push_back(xs.at(it - fs.begin()));
    }
    return out;
}

DeviationBracket gridHorizontalDeviation(const Fn& alpha, const Fn& beta, const Grid& grid, const Rat& tMax)
{
    const std::int64_t n = grid.points();
    const std::int64_t last = std::min(n - 1, (tMax / grid.step).ceil());
    const std::vector<Rat> as = sample(alpha, grid);
    const std::vector<Rat> bs = sample(beta, grid);
    // smallest grid index m >= k with beta(m s) >= y
    auto reach = [&](std::int64_t k, const Rat& y) -> std::optional<std::int64_t> {
        auto it = std::lower_bound(bs.begin() + k, bs.end(), y);
        if (it == bs.end()) return std::nullopt;
        return it - bs.begin();
    };
    DeviationBracket out;
    for (std::int64_t k = 0; k < last; ++k) {
        // t = k s: the exact delay is above (m - k - 1) s
        auto m = reach(k, as[k]);
        // t in (k s, (k + 1) s]: alpha(t) <= alpha((k + 1) s), beta(t + d) >= beta(k s + d)
        auto M = reach(k, as[k + 1]);
        if (!m || !M) {
            out.unbounded = true;
            return out;
        }
        out.lo = max(out.lo, grid.at(*m - k - 1));
        out.hi = max(out.hi, grid.at(*M - k));
    }
    return out;
}

std::vector<std::size_t> roundSchedule(const std::vector<std::int64_t>& weights)
{
    std::int64_t wmax = 0;
    for (std::int64_t w : weights) wmax = std::max(wmax, w);
    std::vector<std::size_t> out;
    for (std::int64_t c = 1; c <= wmax; ++c)
        for (std::size_t q = 0; q < weights.size(); ++q)
            if (weights[q] >= c) out.push_back(q);
    return out;
}

std::int64_t phiByEnumeration(const std::vector<std::int64_t>& weights, std::size_t i, std::size_t j, std::int64_t p)
{
    if (i == j || i >= weights.size() || j >= weights.size()) throw std::invalid_argument("bad flow pair");
    const std::vector<std::size_t> round = roundSchedule(weights);
    const std::int64_t rounds = p / weights[i] + 3;
    std::vector<std::size_t> seq;
    for (std::int64_t r = 0; r < rounds; ++r) seq.insert(seq.end(), round.begin(), round.end());

    // windows start anywhere inside the first round; extend each as far as
    // the (p + 1)-th flow-i opportunity allows
    std::int64_t best = 0;
    for (std::size_t a = 0; a < round.size(); ++a) {
        std::int64_t seenI = 0;
        std::int64_t seenJ = 0;
        for (std::size_t b = a; b < seq.size(); ++b) {
            if (seq[b] == i && ++seenI > p) break;
            if (seq[b] == j) ++seenJ;
        }
        best = std::max(best, seenJ);
    }
    return best;
}

}  // namespace iwrr::oracle

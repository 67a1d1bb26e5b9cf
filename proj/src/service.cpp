#include "iwrr/service.hpp"

#include <algorithm>
#include <stdexcept>

#include "iwrr/errors.hpp"

namespace iwrr {

namespace {

const FlowSpec& flowAt(const SystemSpec& sys, std::size_t i)
{
    if (i >= sys.flows.size()) throw std::invalid_argument("flow index " + std::to_string(i) + " out of range");
    return sys.flows[i];
}

}  // namespace

void validateSystem(const SystemSpec& sys)
{
    if (sys.flows.empty()) throw ConfigError("system needs at least one flow");
    for (std::size_t k = 0; k < sys.flows.size(); ++k) {
        const FlowSpec& f = sys.flows[k];
        const std::string who = "flow " + std::to_string(k + 1);
        if (f.weight < 1) throw ConfigError(who + ": weight must be a positive integer");
        if (f.lmin.sign() <= 0) throw ConfigError(who + ": lmin must be positive");
        if (f.lmax < f.lmin) throw ConfigError(who + ": lmax must be at least lmin");
    }
    if (sys.lipschitz.sign() <= 0) throw ConfigError("lipschitz constant must be positive");
    const Curve& b = sys.aggregate;
    if (!b.isContinuous()) throw ConfigError("aggregate service curve must be continuous");
    if (b.isBounded()) throw ConfigError("aggregate service curve must be unbounded");
    for (const Piece& p : b.pieces())
        if (p.slope > sys.lipschitz) throw ConfigError("aggregate slope exceeds the lipschitz constant");
    if (auto r = checkSuperadditive(b); !r)
        throw ConfigError("aggregate service curve is not super-additive at (" + r.witness->first.str() + ", " +
                          r.witness->second.str() + ")");
}

std::int64_t phi(const SystemSpec& sys, std::size_t i, std::size_t j, std::int64_t x)
{
    if (i == j) throw std::invalid_argument("phi needs two distinct flows");
    if (x < 0) throw std::invalid_argument("phi needs x >= 0");
    const std::int64_t wi = flowAt(sys, i).weight;
    const std::int64_t wj = flowAt(sys, j).weight;
    return (x / wi) * wj + std::max<std::int64_t>(wj - wi, 0) + std::min(x % wi + 1, wj);
}

std::int64_t phiWrr(const SystemSpec& sys, std::size_t i, std::size_t j, std::int64_t x)
{
    if (i == j) throw std::invalid_argument("phi needs two distinct flows");
    if (x < 0) throw std::invalid_argument("phi needs x >= 0");
    return (1 + x / flowAt(sys, i).weight) * flowAt(sys, j).weight;
}

Rat psi(const SystemSpec& sys, std::size_t i, const Rat& x)
{
    if (x.sign() < 0) throw std::invalid_argument("psi needs x >= 0");
    const std::int64_t p = floorDiv(x, flowAt(sys, i).lmin);
    Rat out = x;
    for (std::size_t j = 0; j < sys.flows.size(); ++j)
        if (j != i) out += Rat(phi(sys, i, j, p)) * sys.flows[j].lmax;
    return out;
}

Rat psiWrr(const SystemSpec& sys, std::size_t i, const Rat& x)
{
    if (x.sign() < 0) throw std::invalid_argument("psi needs x >= 0");
    const std::int64_t p = floorDiv(x, flowAt(sys, i).lmin);
    Rat out = x;
    for (std::size_t j = 0; j < sys.flows.size(); ++j)
        if (j != i) out += Rat(phiWrr(sys, i, j, p)) * sys.flows[j].lmax;
    return out;
}

std::pair<Rat, Rat> qQ(const SystemSpec& sys, std::size_t i)
{
    const FlowSpec& f = flowAt(sys, i);
    Rat Q;
    for (std::size_t j = 0; j < sys.flows.size(); ++j)
        if (j != i) Q += Rat(sys.flows[j].weight) * sys.flows[j].lmax;
    return {Rat(f.weight) * f.lmin, Q};
}

Rat lTot(const SystemSpec& sys, std::size_t i)
{
    auto [q, Q] = qQ(sys, i);
    return q + Q;
}

Curve psiCurve(const SystemSpec& sys, std::size_t i)
{
    const FlowSpec& f = flowAt(sys, i);
    std::vector<Piece> pieces;
    for (std::int64_t k = 0; k < f.weight; ++k) {
        Rat x = Rat(k) * f.lmin;
        Rat y = psi(sys, i, x);
        pieces.push_back(Piece{x, y, y, 1});
    }
    return Curve(std::move(pieces), 0, Rat(f.weight) * f.lmin, lTot(sys, i));
}

Curve psiWrrCurve(const SystemSpec& sys, std::size_t i)
{
    auto [q, Q] = qQ(sys, i);
    return Curve({Piece{0, Q, Q, 1}}, 0, q, q + Q);
}

Curve gamma(const SystemSpec& sys, std::size_t i) { return lowerPseudoInverse(psiCurve(sys, i)); }

Curve gammaViaU(const SystemSpec& sys, std::size_t i)
{
    const FlowSpec& f = flowAt(sys, i);
    const Curve nu = stair(f.lmin, lTot(sys, i));
    Curve U = shiftRight(nu, psi(sys, i, 0));
    for (std::int64_t k = 1; k < f.weight; ++k) U = add(U, shiftRight(nu, psi(sys, i, Rat(k) * f.lmin)));
    return convolveUnitRate(U);
}

Curve gammaWrr(const SystemSpec& sys, std::size_t i)
{
    auto [q, Q] = qQ(sys, i);
    return shiftRight(convolveUnitRate(stair(q, q + Q)), Q);
}

Curve iwrrServiceCurve(const SystemSpec& sys, std::size_t i) { return compose(gamma(sys, i), sys.aggregate); }

Curve wrrServiceCurve(const SystemSpec& sys, std::size_t i) { return compose(gammaWrr(sys, i), sys.aggregate); }

RateLatencyFamily rateLatencyFamily(const SystemSpec& sys, std::size_t i)
{
    const FlowSpec& f = flowAt(sys, i);
    const Rat l = f.lmin;
    const Rat L = lTot(sys, i);
    RateLatencyFamily fam;
    fam.rStar = Rat(f.weight) * l / L;
    for (std::int64_t k = 0; k + 1 < f.weight; ++k)
        fam.rks.push_back(l / (psi(sys, i, Rat(k + 1) * l) - psi(sys, i, Rat(k) * l)));
    fam.rks.push_back(1);
    fam.kStar = 0;
    while (fam.rks[fam.kStar] < fam.rStar) ++fam.kStar;

    for (std::int64_t k = 0; k <= fam.kStar; ++k) {
        const Rat r = min(fam.rks[k], fam.rStar);
        const Rat base = psi(sys, i, Rat(k) * l);
        const Rat T = base - Rat(k) * l / r;
        const Rat touch = k < fam.kStar ? psi(sys, i, Rat(k + 1) * l) : base + L;
        if (!fam.members.empty() && fam.members.back().rate == r && fam.members.back().latency == T) {
            fam.members.back().ks.push_back(k);
            continue;
        }
        fam.members.push_back(FamilyMember{{k}, r, T, touch});
    }
    return fam;
}

std::pair<Rat, Rat> rescaleMember(const FamilyMember& m, const Rat& c, const Rat& T0)
{
    if (c.sign() <= 0) throw std::invalid_argument("aggregate rate must be positive");
    return {m.rate * c, m.latency / c + T0};
}

}  // namespace iwrr

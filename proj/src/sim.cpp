#include "iwrr/sim.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "curve_build.hpp"
#include "iwrr/errors.hpp"

namespace iwrr {

const char* policyName(Policy p) { return p == Policy::IWRR ? "iwrr" : "wrr"; }

// ---- trace --------------------------------------------------------------------

Trace::Trace(std::vector<PacketArrival> arrivals, std::vector<ServiceRecord> records, std::size_t flows, Rat horizon,
             ServiceModel service)
    : arrivals_(std::move(arrivals)),
      records_(std::move(records)),
      flows_(flows),
      horizon_(horizon),
      service_(std::move(service)),
      byFlow_(flows),
      sentBefore_(flows),
      completion_(arrivals_.size())
{
    for (std::size_t k = 0; k < records_.size(); ++k) {
        const ServiceRecord& r = records_[k];
        Rat before = byFlow_[r.flow].empty() ? Rat(0) : sentBefore_[r.flow].back() + records_[byFlow_[r.flow].back()].size;
        byFlow_[r.flow].push_back(k);
        sentBefore_[r.flow].push_back(before);
        completion_[r.packet] = r.end;
    }
}

Rat Trace::served(const Rat& a, const Rat& b) const
{
    if (const auto* c = std::get_if<ConstantRate>(&service_)) return c->rate * (b - a);
    const Curve& P = std::get<ScriptedBusy>(service_).profile;
    return P(b) - P(a);
}

Rat Trace::input(std::size_t flow, const Rat& t) const
{
    Rat sum;
    for (const PacketArrival& a : arrivals_) {
        if (a.time >= t) break;
        if (a.flow == flow) sum += a.size;
    }
    return sum;
}

Rat Trace::output(std::size_t flow, const Rat& t) const
{
    const auto& idx = byFlow_.at(flow);
    auto it = std::upper_bound(idx.begin(), idx.end(), t,
                               [&](const Rat& v, std::size_t k) { return v < records_[k].start; });
    if (it == idx.begin()) return 0;
    const std::size_t pos = static_cast<std::size_t>(it - idx.begin()) - 1;
    const ServiceRecord& r = records_[idx[pos]];
    if (t >= r.end) return sentBefore_[flow][pos] + r.size;
    return sentBefore_[flow][pos] + served(r.start, t);
}

std::vector<Rat> Trace::outputBreakpoints(std::size_t flow, const Rat& a, const Rat& b) const
{
    std::vector<Rat> out;
    const auto* scripted = std::get_if<ScriptedBusy>(&service_);
    for (std::size_t k : byFlow_.at(flow)) {
        const ServiceRecord& r = records_[k];
        if (r.end < a) continue;
        if (r.start > b) break;
        if (r.start >= a) out.push_back(r.start);
        if (r.end <= b) out.push_back(r.end);
        if (scripted)
            for (const Rat& x : scripted->profile.breakpointsIn(max(r.start, a), min(r.end, b)))
                if (x > r.start) out.push_back(x);
    }
    detail::sortUnique(out);
    return out;
}

Curve Trace::cumulativeInput(std::size_t flow) const
{
    std::vector<Piece> pieces{Piece{0, 0, 0, 0}};
    Rat total;
    for (const PacketArrival& a : arrivals_) {
        if (a.flow != flow) continue;
        if (pieces.back().x != a.time) pieces.push_back(Piece{a.time, total, total, 0});
        total += a.size;
        pieces.back().right = total;
    }
    // constant tail starts one unit after the last jump
    const Rat T = pieces.back().x + 1;
    pieces.push_back(Piece{T, total, total, 0});
    return Curve(std::move(pieces), T, 1, 0);
}

Curve Trace::cumulativeOutput(std::size_t flow) const
{
    const auto& idx = byFlow_.at(flow);
    const Rat last = idx.empty() ? Rat(0) : records_[idx.back()].end;
    std::vector<Rat> xs = outputBreakpoints(flow, 0, last);
    const auto* scripted = std::get_if<ScriptedBusy>(&service_);
    auto slope = [&](const Rat& x) -> Rat {
        auto it = std::upper_bound(idx.begin(), idx.end(), x,
                                   [&](const Rat& v, std::size_t k) { return v < records_[k].start; });
        if (it == idx.begin()) return 0;
        const ServiceRecord& r = records_[*(it - 1)];
        if (x >= r.end) return 0;
        return scripted ? scripted->profile.slopeRight(x) : std::get<ConstantRate>(service_).rate;
    };
    return detail::buildFrom(
        std::move(xs), last, 1, 0, [&](const Rat& x) { return output(flow, x); },
        [&](const Rat& x) { return output(flow, x); }, slope);
}

// ---- engine -------------------------------------------------------------------

namespace {

void validateScenario(const Scenario& sc)
{
    const auto& flows = sc.system.flows;
    if (flows.empty()) throw ConfigError("scenario needs at least one flow");
    for (const FlowSpec& f : flows) {
        if (f.weight < 1) throw ConfigError("weights must be positive integers");
        if (f.lmin.sign() <= 0 || f.lmax < f.lmin) throw ConfigError("packet sizes need 0 < lmin <= lmax");
    }
    if (sc.horizon.sign() <= 0) throw ConfigError("horizon must be positive");
    for (const PacketArrival& a : sc.arrivals) {
        if (a.flow >= flows.size()) throw ConfigError("arrival for unknown flow " + std::to_string(a.flow + 1));
        if (a.time.sign() < 0) throw ConfigError("arrival time must be nonnegative");
        const FlowSpec& f = flows[a.flow];
        if (a.size < f.lmin || a.size > f.lmax)
            throw ConfigError("packet of " + a.size.str() + " bits outside [lmin, lmax] of flow " +
                              std::to_string(a.flow + 1));
    }
    if (const auto* c = std::get_if<ConstantRate>(&sc.service)) {
        if (c->rate.sign() <= 0) throw ConfigError("service rate must be positive");
    } else {
        const Curve& P = std::get<ScriptedBusy>(sc.service).profile;
        if (!P.isContinuous() || P.isBounded() || !P(0).isZero())
            throw ConfigError("scripted service profile must be continuous, unbounded and start at 0");
    }
}

class Engine {
public:
    explicit Engine(const Scenario& sc) : sc_(sc), n_(sc.system.flows.size()), queues_(n_)
    {
        arrivals_ = sc.arrivals;
        std::stable_sort(arrivals_.begin(), arrivals_.end(),
                         [](const PacketArrival& a, const PacketArrival& b) { return a.time < b.time; });
        for (const FlowSpec& f : sc.system.flows) wmax_ = std::max(wmax_, f.weight);
        if (const auto* s = std::get_if<ScriptedBusy>(&sc.service)) inverse_ = lowerPseudoInverse(s->profile);
    }

    Trace run()
    {
        admit(sc_.arrivalsBeforeVisit);
        while (now_ < sc_.horizon) {
            if (!anyQueued()) {
                if (inverse_)
                    throw DomainError("busy-period violation: scripted service idle at t=" + now_.str() +
                                      " before the horizon");
                if (next_ == arrivals_.size() || arrivals_[next_].time >= sc_.horizon) break;
                // nothing is visited while idle, so the arrival precedes the next visit
                now_ = arrivals_[next_].time;
                admit(true);
                continue;
            }
            if (sc_.policy == Policy::IWRR)
                visitInterleaved();
            else
                visitPlain();
        }
        return Trace(std::move(arrivals_), std::move(records_), n_, sc_.horizon, sc_.service);
    }

private:
    void admit(bool inclusive)
    {
        while (next_ < arrivals_.size() &&
               (arrivals_[next_].time < now_ || (inclusive && arrivals_[next_].time == now_))) {
            queues_[arrivals_[next_].flow].push_back(next_);
            ++next_;
        }
    }

    bool anyQueued() const
    {
        return std::any_of(queues_.begin(), queues_.end(), [](const auto& q) { return !q.empty(); });
    }

    void send(std::size_t q, std::int64_t cycle)
    {
        const std::size_t p = queues_[q].front();
        queues_[q].pop_front();
        const Rat size = arrivals_[p].size;
        Rat end;
        if (inverse_)
            end = (*inverse_)(delivered_ + size);
        else
            end = now_ + size / std::get<ConstantRate>(sc_.service).rate;
        records_.push_back(ServiceRecord{now_, end, q, size, round_, cycle, p});
        delivered_ += size;
        now_ = end;
        admit(sc_.arrivalsBeforeVisit);
    }

    // one emission opportunity at (cycle_, flow_), then move the pointer
    void visitInterleaved()
    {
        if (sc_.system.flows[flow_].weight >= cycle_ && !queues_[flow_].empty()) send(flow_, cycle_);
        if (++flow_ == n_) {
            flow_ = 0;
            if (++cycle_ > wmax_) {
                cycle_ = 1;
                ++round_;
            }
        }
    }

    // up to w consecutive packets of the visited queue
    void visitPlain()
    {
        const std::int64_t w = sc_.system.flows[flow_].weight;
        for (std::int64_t k = 1; k <= w && !queues_[flow_].empty() && now_ < sc_.horizon; ++k) send(flow_, k);
        if (++flow_ == n_) {
            flow_ = 0;
            ++round_;
        }
    }

    const Scenario& sc_;
    std::size_t n_;
    std::vector<PacketArrival> arrivals_;
    std::vector<std::deque<std::size_t>> queues_;
    std::vector<ServiceRecord> records_;
    std::optional<Curve> inverse_;
    std::size_t next_ = 0;
    Rat now_;
    Rat delivered_;
    std::int64_t wmax_ = 0;
    std::size_t flow_ = 0;
    std::int64_t cycle_ = 1;
    std::int64_t round_ = 1;
};

}  // namespace

Trace run(const Scenario& sc)
{
    validateScenario(sc);
    return Engine(sc).run();
}

// ---- checks -------------------------------------------------------------------

StrictServiceReport verifyStrictService(const Trace& trace, std::size_t flow, const Curve& candidate,
                                        std::size_t maxWitnesses)
{
    if (flow >= trace.flowCount()) throw std::invalid_argument("flow index out of range");
    std::vector<std::size_t> packets;
    for (std::size_t k = 0; k < trace.arrivals().size(); ++k)
        if (trace.arrivals()[k].flow == flow) packets.push_back(k);
    const auto& done = trace.completions();
    const auto& arr = trace.arrivals();

    StrictServiceReport report;
    std::size_t k = 0;
    while (k < packets.size()) {
        const Rat a = arr[packets[k]].time;
        if (a >= trace.horizon()) break;
        Rat e = trace.horizon();
        for (;;) {
            const auto& c = done[packets[k]];
            ++k;
            if (!c) {
                k = packets.size();
                break;
            }
            if (k < packets.size() && arr[packets[k]].time < *c) continue;
            e = *c;
            break;
        }
        if (!(a < e)) continue;
        ++report.periods;

        std::vector<Rat> E = trace.outputBreakpoints(flow, a, e);
        E.push_back(a);
        E.push_back(e);
        detail::sortUnique(E);
        std::vector<Rat> B = candidate.breakpointsIn(0, e - a);
        B.push_back(e - a);
        detail::sortUnique(B);

        auto check = [&](const Rat& s, const Rat& t) {
            ++report.checks;
            Rat got = trace.output(flow, t) - trace.output(flow, s);
            Rat need = candidate(t - s);
            if (got < need) {
                if (report.violations.size() < maxWitnesses) report.violations.push_back(Violation{s, t, got, need});
                ++report.violationCount;
            }
        };
        for (std::size_t x = 0; x < E.size(); ++x) {
            for (std::size_t y = x; y < E.size(); ++y) check(E[x], E[y]);
            for (const Rat& b : B) {
                if (E[x] + b <= e) check(E[x], E[x] + b);
                if (E[x] - b >= a) check(E[x] - b, E[x]);
            }
        }
    }
    return report;
}

DelayMeasurement maxPacketDelay(const Trace& trace, std::size_t flow)
{
    if (flow >= trace.flowCount()) throw std::invalid_argument("flow index out of range");
    DelayMeasurement m;
    for (std::size_t k = 0; k < trace.arrivals().size(); ++k) {
        const PacketArrival& a = trace.arrivals()[k];
        if (a.flow != flow) continue;
        ++m.packets;
        if (const auto& c = trace.completions()[k]) {
            m.maxDelay = max(m.maxDelay, *c - a.time);
        } else {
            m.unfinished = true;
            m.maxDelay = max(m.maxDelay, positivePart(trace.horizon() - a.time));
        }
    }
    return m;
}

// ---- adversarial trajectories -------------------------------------------------------

std::vector<std::size_t> tightnessOrder(const SystemSpec& sys, std::size_t i)
{
    if (i >= sys.flows.size()) throw std::invalid_argument("flow index out of range");
    std::vector<std::size_t> order(sys.flows.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sys.flows[a].weight != sys.flows[b].weight) return sys.flows[a].weight < sys.flows[b].weight;
        return a == i && b != i;
    });
    return order;
}

namespace {

struct Relabeled {
    SystemSpec sys;
    std::vector<std::size_t> order;
    std::size_t flow = 0;
};

Relabeled relabel(const SystemSpec& sys, std::size_t i)
{
    Relabeled r;
    r.order = tightnessOrder(sys, i);
    r.sys.aggregate = sys.aggregate;
    r.sys.lipschitz = sys.lipschitz;
    for (std::size_t k = 0; k < r.order.size(); ++k) {
        r.sys.flows.push_back(sys.flows[r.order[k]]);
        if (r.order[k] == i) r.flow = k;
    }
    return r;
}

// instant of the visit to flow i that finds its queue empty
Rat emptyVisitTime(const Relabeled& r, Policy policy)
{
    const auto& flows = r.sys.flows;
    const std::int64_t wi = flows[r.flow].weight;
    Rat bits;
    for (std::size_t j = 0; j < flows.size(); ++j) {
        if (j == r.flow) continue;
        if (policy == Policy::IWRR)
            bits += Rat(std::min(wi - 1, flows[j].weight)) * flows[j].lmax;
        else if (j < r.flow)
            bits += Rat(flows[j].weight) * flows[j].lmax;
    }
    return bits / r.sys.lipschitz;
}

// rate K until s, then K s + beta(t - s)
Curve busyProfile(const SystemSpec& sys, const Rat& s)
{
    if (s.isZero()) return sys.aggregate;
    return minOf(rateLatency(sys.lipschitz, 0), addConstant(shiftRight(sys.aggregate, s), sys.lipschitz * s));
}

// bursts at 0 that keep every other flow backlogged while `bits` are served
void addCompetitors(Scenario& sc, std::size_t flow, const Rat& bits)
{
    for (std::size_t j = 0; j < sc.system.flows.size(); ++j) {
        if (j == flow) continue;
        const FlowSpec& f = sc.system.flows[j];
        const std::int64_t count = (bits / f.lmax).ceil() + f.weight;
        for (std::int64_t k = 0; k < count; ++k) sc.arrivals.push_back(PacketArrival{j, 0, f.lmax});
    }
}

Curve policyCurve(const SystemSpec& sys, std::size_t i, Policy policy)
{
    return policy == Policy::IWRR ? iwrrServiceCurve(sys, i) : wrrServiceCurve(sys, i);
}

}  // namespace

TightnessSetup buildTightnessScenario(const SystemSpec& sys, std::size_t i, const Rat& tau, Policy policy)
{
    validateSystem(sys);
    if (tau.sign() <= 0) throw std::invalid_argument("tau must be positive");
    Relabeled r = relabel(sys, i);
    const FlowSpec& fi = r.sys.flows[r.flow];

    TightnessSetup out;
    out.order = r.order;
    out.flow = r.flow;
    out.s = emptyVisitTime(r, policy);
    out.offset = 0;
    if (r.sys.flows.size() > 1) {
        // half of the shortest possible send, so flow i arrives during the first send after s
        Rat shortest;
        for (std::size_t j = 0; j < r.sys.flows.size(); ++j)
            if (j != r.flow && (shortest.isZero() || r.sys.flows[j].lmax < shortest)) shortest = r.sys.flows[j].lmax;
        out.offset = shortest / (Rat(2) * sys.lipschitz);
    }
    out.expected = policyCurve(r.sys, r.flow, policy)(tau);

    const Rat bt = sys.aggregate(tau);
    Scenario& sc = out.scenario;
    sc.system = r.sys;
    sc.policy = policy;
    sc.service = ScriptedBusy{busyProfile(sys, out.s)};
    sc.horizon = out.s + tau;
    addCompetitors(sc, r.flow, bt);
    const std::int64_t mine = (bt / fi.lmin).ceil();
    for (std::int64_t k = 0; k < mine; ++k) sc.arrivals.push_back(PacketArrival{r.flow, out.s + out.offset, fi.lmin});
    return out;
}

TightnessSetup buildWrrTightnessScenario(const SystemSpec& sys, std::size_t i, const Rat& tau)
{
    return buildTightnessScenario(sys, i, tau, Policy::WRR);
}

Rat measuredService(const Trace& trace, const TightnessSetup& setup, const Rat& tau)
{
    return trace.output(setup.flow, setup.s + tau) - trace.output(setup.flow, setup.s);
}

Rat firstCrossing(const Curve& alpha, const Curve& beta)
{
    if (alpha.rate() > beta.rate()) throw DomainError("unbounded: arrival rate exceeds the service rate");
    const Curve inv = lowerPseudoInverse(beta);
    Rat from = 0;
    Rat to = alpha.transient() + alpha.period();
    std::optional<Piece> pending;
    // visit one piece: its start point, then its open segment
    auto visit = [&](const Piece& p, const Rat& next) -> std::optional<Rat> {
        if (p.slope.sign() != 0) throw std::invalid_argument("first crossing needs a staircase arrival curve");
        if (p.x.sign() > 0 && p.value <= beta(p.x)) return p.x;
        Rat u = inv(p.right);
        if (u < next) return max(u, p.x);
        return std::nullopt;
    };
    for (int window = 0; window < 100000; ++window) {
        for (const Piece& p : alpha.unrolled(to, from)) {
            if (pending)
                if (auto u = visit(*pending, p.x)) return *u;
            pending = p;
        }
        from = to;
        to = to + alpha.period() * Rat(16);
    }
    throw DomainError("arrival curve does not meet the service curve");
}

TightnessSetup buildDelayTightnessScenario(const SystemSpec& sys, std::size_t i, const Curve& alpha, Policy policy,
                                           int m)
{
    validateSystem(sys);
    if (i >= sys.flows.size()) throw std::invalid_argument("flow index out of range");
    if (m < 0 || m > 40) throw std::invalid_argument("m out of range");
    const Rat l = sys.flows[i].lmin;
    if (sys.flows[i].lmax != l) throw ConfigError("delay trajectory needs lmin = lmax for the studied flow");
    if (!alpha(0).isZero()) throw ConfigError("arrival curve must be 0 at 0");
    for (const Piece& p : alpha.pieces())
        if (p.slope.sign() != 0 || !(p.value / l).isInteger() || !(p.right / l).isInteger())
            throw ConfigError("arrival curve must be a staircase in multiples of the packet length");
    if (!checkSubadditive(alpha)) throw ConfigError("arrival curve must be sub-additive");

    Relabeled r = relabel(sys, i);
    const Curve beta = policyCurve(r.sys, r.flow, policy);
    const auto h = horizontalDeviation(alpha, beta);
    if (!h) throw DomainError("unbounded: delay bound is infinite");
    const Rat sPrime = firstCrossing(alpha, beta);

    TightnessSetup out;
    out.order = r.order;
    out.flow = r.flow;
    out.s = emptyVisitTime(r, policy);
    // alone, flow i has nobody to wait behind during the offset
    out.offset = sys.flows.size() > 1 ? l / (Rat(std::int64_t{1} << m) * sys.lipschitz) : Rat(0);
    out.expected = *h;

    Scenario& sc = out.scenario;
    sc.system = r.sys;
    sc.policy = policy;
    sc.service = ScriptedBusy{busyProfile(sys, out.s)};
    sc.horizon = out.s + sPrime + *h + out.offset * Rat(2) + lTot(r.sys, r.flow) / sys.lipschitz;

    auto burst = [&](const Rat& x, const Rat& bits) {
        for (std::int64_t k = 0; k < (bits / l).floor(); ++k)
            sc.arrivals.push_back(PacketArrival{r.flow, out.s + out.offset + x, l});
    };
    for (const Piece& p : alpha.unrolled(sPrime)) burst(p.x, p.right - (p.x.sign() > 0 ? alpha.leftLimit(p.x) : p.value));
    if (sPrime.sign() > 0 && alpha.rightLimit(sPrime) > alpha.leftLimit(sPrime))
        burst(sPrime, alpha.rightLimit(sPrime) - alpha.leftLimit(sPrime));

    const Curve P = std::get<ScriptedBusy>(sc.service).profile;
    if (sc.system.flows.size() == 1) {
        // nobody else keeps the server busy: stop once flow i is drained
        Rat total;
        for (const PacketArrival& a : sc.arrivals) total += a.size;
        sc.horizon = lowerPseudoInverse(P)(total);
        return out;
    }
    addCompetitors(sc, r.flow, P(sc.horizon));
    return out;
}

}  // namespace iwrr

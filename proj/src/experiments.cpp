#include "iwrr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "iwrr/csv.hpp"
#include "iwrr/errors.hpp"

namespace iwrr {

Rat delayBound(const SystemSpec& sys, std::size_t i, const Curve& alpha, Policy policy)
{
    const Curve beta = policy == Policy::IWRR ? iwrrServiceCurve(sys, i) : wrrServiceCurve(sys, i);
    const auto h = horizontalDeviation(alpha, beta);
    if (!h) throw DomainError("unbounded: arrival curve outgrows the service curve of flow " + std::to_string(i + 1));
    return *h;
}

ExperimentConfig randomizedDefaults()
{
    ExperimentConfig cfg;
    cfg.arrivalRate = 50000;
    return cfg;
}

void validateExperiment(const ExperimentConfig& cfg)
{
    if (cfg.weights.empty()) throw ConfigError("experiment needs at least one flow");
    for (std::int64_t w : cfg.weights)
        if (w < 1) throw ConfigError("weights must be positive integers");
    if (cfg.packetBits.sign() <= 0 || cfg.linkRate.sign() <= 0 || cfg.arrivalRate.sign() < 0)
        throw ConfigError("packet length and link rate must be positive, arrival rate nonnegative");
    if (cfg.burstLo < 0 || cfg.burstLo > cfg.burstHi) throw ConfigError("burst range needs 0 <= lo <= hi");
    if (cfg.samples < 1 || cfg.systems < 1) throw ConfigError("N and M must be at least 1");
    if (cfg.weightLo < 1 || cfg.weightLo > cfg.weightHi) throw ConfigError("weight range needs 1 <= lo <= hi");
    if (cfg.packetBytesLo < 1 || cfg.packetBytesLo > cfg.packetBytesHi)
        throw ConfigError("packet length range needs 1 <= lo <= hi");
}

Quartiles quartiles(std::vector<double> xs)
{
    if (xs.empty()) throw std::invalid_argument("quartiles of an empty sample");
    std::sort(xs.begin(), xs.end());
    auto at = [&](double p) {
        const double pos = p * static_cast<double>(xs.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        return lo + 1 < xs.size() ? xs[lo] + frac * (xs[lo + 1] - xs[lo]) : xs[lo];
    };
    return Quartiles{xs.front(), at(0.25), at(0.5), at(0.75), xs.back()};
}

Curve experimentArrival(const ExperimentConfig& cfg, const SystemSpec& sys, std::int64_t burstPackets)
{
    const Rat l = sys.flows.front().lmax;
    return greedyPacketSource(cfg.arrivalRate, l * Rat(burstPackets), l);
}

namespace {

double ms(const Rat& seconds) { return seconds.toDouble() * 1000.0; }

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

SystemSpec experimentSystem(std::vector<std::int64_t> weights, const Rat& l, const Rat& c)
{
    std::stable_sort(weights.begin(), weights.end());
    SystemSpec sys;
    for (std::size_t k = 0; k < weights.size(); ++k)
        sys.flows.push_back(FlowSpec{weights[k], l, l, "flow " + std::to_string(k + 1)});
    sys.aggregate = rateLatency(c, 0);
    sys.lipschitz = c;
    return sys;
}

bool stable(const SystemSpec& sys, const Rat& r)
{
    for (std::size_t i = 0; i < sys.flows.size(); ++i)
        if (wrrServiceCurve(sys, i).rate() < r || iwrrServiceCurve(sys, i).rate() < r) return false;
    return true;
}

struct Draw {
    SystemSpec sys;
    std::vector<std::vector<std::int64_t>> bursts;  // [rank][k]
};

std::vector<std::vector<std::int64_t>> drawBursts(const ExperimentConfig& cfg, std::size_t flows, std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::int64_t> burst(cfg.burstLo, cfg.burstHi);
    std::vector<std::vector<std::int64_t>> out(flows);
    for (auto& row : out)
        for (std::size_t k = 0; k < cfg.samples; ++k) row.push_back(burst(rng));
    return out;
}

std::vector<DelaySample> evaluate(const ExperimentConfig& cfg, const Draw& d, std::size_t index)
{
    std::vector<DelaySample> out;
    for (std::size_t i = 0; i < d.sys.flows.size(); ++i) {
        const DeviationEvaluator iwrr(iwrrServiceCurve(d.sys, i));
        const DeviationEvaluator wrr(wrrServiceCurve(d.sys, i));
        std::map<std::int64_t, std::pair<Rat, Rat>> cache;
        const std::size_t first = out.size();
        std::vector<double> wrrMs;
        for (std::int64_t b : d.bursts[i]) {
            auto it = cache.find(b);
            if (it == cache.end()) {
                const Curve alpha = experimentArrival(cfg, d.sys, b);
                const auto hw = wrr(alpha);
                const auto hi = iwrr(alpha);
                if (!hw || !hi) throw DomainError("unbounded: flow " + std::to_string(i + 1) + " is unstable");
                it = cache.emplace(b, std::make_pair(*hw, *hi)).first;
            }
            DelaySample s;
            s.system = index;
            s.rank = i;
            s.burstPackets = b;
            s.wrr = it->second.first;
            s.iwrr = it->second.second;
            out.push_back(s);
            wrrMs.push_back(ms(s.wrr));
        }
        const double median = quartiles(wrrMs).median;
        for (std::size_t k = first; k < out.size(); ++k)
            out[k].diffNorm = median > 0 ? ms(out[k].diff()) / median : 0.0;
    }
    return out;
}

DelayReport evaluateAll(const ExperimentConfig& cfg, const std::vector<Draw>& draws)
{
    std::vector<std::vector<DelaySample>> parts(draws.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failureMutex;
    auto worker = [&] {
        for (std::size_t m; (m = next++) < draws.size();) {
            try {
                parts[m] = evaluate(cfg, draws[m], m);
            } catch (...) {
                std::lock_guard lock(failureMutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, draws.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    DelayReport report;
    for (const Draw& d : draws) report.systems.push_back(d.sys);
    for (auto& p : parts) report.samples.insert(report.samples.end(), p.begin(), p.end());

    const std::size_t ranks = draws.front().sys.flows.size();
    for (std::size_t r = 0; r < ranks; ++r) {
        std::vector<double> w, iw, df, dn;
        for (const DelaySample& s : report.samples) {
            if (s.rank != r) continue;
            w.push_back(ms(s.wrr));
            iw.push_back(ms(s.iwrr));
            df.push_back(ms(s.diff()));
            dn.push_back(s.diffNorm);
        }
        report.summary.push_back(RankSummary{r, quartiles(w), quartiles(iw), quartiles(df), quartiles(dn)});
    }
    return report;
}

}  // namespace

DelayReport runFixedExperiment(const ExperimentConfig& cfg)
{
    validateExperiment(cfg);
    std::mt19937_64 rng(cfg.seed);
    Draw d;
    d.sys = experimentSystem(cfg.weights, cfg.packetBits, cfg.linkRate);
    if (!stable(d.sys, cfg.arrivalRate)) throw DomainError("unbounded: arrival rate exceeds a flow's share");
    d.bursts = drawBursts(cfg, d.sys.flows.size(), rng);
    return evaluateAll(cfg, {d});
}

DelayReport runRandomizedExperiment(const ExperimentConfig& cfg)
{
    validateExperiment(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::int64_t> weight(cfg.weightLo, cfg.weightHi);
    std::uniform_int_distribution<std::int64_t> bytes(cfg.packetBytesLo, cfg.packetBytesHi);
    const std::size_t n = cfg.weights.size();
    std::vector<Draw> draws;
    for (std::size_t m = 0; m < cfg.systems; ++m) {
        Draw d;
        for (int attempt = 0;; ++attempt) {
            if (attempt == 1000) throw ConfigError("no stable system found in 1000 draws; lower the arrival rate");
            std::vector<std::int64_t> ws;
            for (std::size_t k = 0; k < n; ++k) ws.push_back(weight(rng));
            const Rat l = Rat(bytes(rng)) * Rat(8);
            d.sys = experimentSystem(ws, l, cfg.linkRate);
            if (stable(d.sys, cfg.arrivalRate)) break;
        }
        d.bursts = drawBursts(cfg, n, rng);
        draws.push_back(std::move(d));
    }
    return evaluateAll(cfg, draws);
}

std::vector<SpotCheck> spotCheckBounds(const ExperimentConfig& cfg, const DelayReport& report, std::size_t count)
{
    std::vector<SpotCheck> out;
    if (report.samples.empty() || count == 0) return out;
    count = std::min(count, report.samples.size());
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t idx = k * report.samples.size() / count;
        const DelaySample& s = report.samples[idx];
        const SystemSpec& sys = report.systems.at(s.system);
        const Curve alpha = experimentArrival(cfg, sys, s.burstPackets);
        for (Policy p : {Policy::IWRR, Policy::WRR}) {
            TightnessSetup st = buildDelayTightnessScenario(sys, s.rank, alpha, p);
            Trace t = run(st.scenario);
            out.push_back(SpotCheck{idx, p, p == Policy::IWRR ? s.iwrr : s.wrr, maxPacketDelay(t, st.flow).maxDelay});
        }
    }
    return out;
}

void writeExperimentCsv(std::ostream& os, const DelayReport& report)
{
    os << "flow_rank,b_packets,wrr_bound_ms,iwrr_bound_ms,diff_ms,diff_norm\n";
    for (const DelaySample& s : report.samples)
        os << s.rank + 1 << ',' << s.burstPackets << ',' << formatFloat(s.wrr * Rat(1000)) << ','
           << formatFloat(s.iwrr * Rat(1000)) << ',' << formatFloat(s.diff() * Rat(1000)) << ','
           << fmt(s.diffNorm) << '\n';
}

void writeSummaryCsv(std::ostream& os, const DelayReport& report)
{
    os << "flow_rank,metric,min,q1,median,q3,max\n";
    auto row = [&](std::size_t rank, const char* metric, const Quartiles& q) {
        os << rank + 1 << ',' << metric << ',' << fmt(q.min) << ',' << fmt(q.q1) << ',' << fmt(q.median) << ','
           << fmt(q.q3) << ',' << fmt(q.max) << '\n';
    };
    for (const RankSummary& r : report.summary) {
        row(r.rank, "wrr_bound_ms", r.wrrMs);
        row(r.rank, "iwrr_bound_ms", r.iwrrMs);
        row(r.rank, "diff_ms", r.diffMs);
        row(r.rank, "diff_norm", r.diffNorm);
    }
}

}  // namespace iwrr

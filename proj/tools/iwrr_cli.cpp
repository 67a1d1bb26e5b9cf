// iwrr - command-line front end.
//
// Exit codes: 0 ok, 2 configuration error, 3 math-domain error, 4 internal.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "iwrr/config.hpp"
#include "iwrr/csv.hpp"
#include "iwrr/errors.hpp"
#include "iwrr/experiments.hpp"
#include "iwrr/service.hpp"
#include "iwrr/sim.hpp"
#include "json.hpp"

using namespace iwrr;
using json = nlohmann::json;

namespace {

bool jsonOut = false;

json num(const Rat& v) { return {{"exact", v.str()}, {"value", v.toDouble()}}; }
std::string dual(const Rat& v) { return v.str() + " (" + formatFloat(v) + ")"; }

Policy policyOf(const std::string& s) { return s == "wrr" ? Policy::WRR : Policy::IWRR; }

std::size_t flowIndex(const SystemSpec& sys, std::int64_t flow)
{
    if (flow < 1 || static_cast<std::size_t>(flow) > sys.flows.size())
        throw ConfigError("--flow must be between 1 and " + std::to_string(sys.flows.size()));
    return static_cast<std::size_t>(flow - 1);
}

void writeTo(const std::string& path, const std::function<void(std::ostream&)>& body)
{
    if (path.empty() || path == "-") {
        body(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    body(out);
}

// "r,b" token bucket parameters
std::pair<Rat, Rat> parseBucket(const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError("--arrival expects r,b");
    try {
        Rat r = Rat::parse(text.substr(0, comma));
        Rat b = Rat::parse(text.substr(comma + 1));
        if (r.sign() < 0 || b.sign() < 0) throw ConfigError("--arrival needs r, b >= 0");
        return {r, b};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--arrival: ") + e.what());
    }
}

Rat parseRat(const std::string& text, const char* what)
{
    try {
        return Rat::parse(text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

struct ArrivalOptions {
    std::string bucket;
    std::string packetize;
    std::string greedy;

    void add(CLI::App* cmd, bool required)
    {
        auto* opt = cmd->add_option("--arrival", bucket, "token bucket r,b (bits/s, bits)");
        if (required) opt->required();
        cmd->add_option("--packetize", packetize, "use ceil(alpha / l) l with packet length l");
        cmd->add_option("--greedy", greedy, "use a greedy source of packets of length l")->excludes("--packetize");
    }

    Curve curve() const
    {
        auto [r, b] = parseBucket(bucket);
        if (!packetize.empty()) return packetizeCeil(tokenBucket(r, b), parseRat(packetize, "--packetize"));
        if (!greedy.empty()) return greedyPacketSource(r, b, parseRat(greedy, "--greedy"));
        return tokenBucket(r, b);
    }
};

void emit(const json& report, const std::string& text)
{
    if (jsonOut)
        std::cout << report.dump(2) << '\n';
    else
        std::cout << text;
}

// ---- curve ------------------------------------------------------------------

struct CurveCmd {
    std::string config;
    std::int64_t flow = 1;
    std::string policy = "iwrr";
    int periods = 3;
    std::string out;
    std::string format = "csv";

    void run()
    {
        const SystemSpec sys = parseSystemConfig(readTextFile(config));
        const std::size_t i = flowIndex(sys, flow);
        if (periods < 1) throw ConfigError("--periods must be at least 1");
        if (policy == "family") {
            const RateLatencyFamily fam = rateLatencyFamily(sys, i);
            writeTo(out, [&](std::ostream& os) { writeFamilyCsv(os, fam); });
            if (out.empty() || out == "-") return;
            json members = json::array();
            std::ostringstream text;
            text << "flow " << flow << ": r* = " << dual(fam.rStar) << ", k* = " << fam.kStar << ", "
                 << fam.members.size() << " member(s)\n";
            for (const FamilyMember& m : fam.members) {
                members.push_back({{"k", m.ks.front()}, {"rate", num(m.rate)}, {"latency", num(m.latency)}});
                text << "  k = " << m.ks.front() << ": rate " << dual(m.rate) << ", latency " << dual(m.latency)
                     << '\n';
            }
            emit({{"flow", flow}, {"r_star", num(fam.rStar)}, {"k_star", fam.kStar}, {"members", members}},
                 text.str());
            return;
        }
        const Curve f = policy == "wrr" ? wrrServiceCurve(sys, i) : iwrrServiceCurve(sys, i);
        const Rat horizon = f.transient() + f.period() * Rat(periods);
        if (format == "aggregate")
            writeTo(out, [&](std::ostream& os) { os << aggregateJson(f) << '\n'; });
        else
            writeTo(out, [&](std::ostream& os) { writeCurveCsv(os, f, horizon); });
        if (out.empty() || out == "-") return;
        std::ostringstream text;
        text << "flow " << flow << " (" << policy << "): T = " << dual(f.transient()) << ", d = " << dual(f.period())
             << ", c = " << dual(f.increment()) << ", rate " << dual(f.rate()) << "\nwrote " << out << '\n';
        emit({{"flow", flow},
              {"policy", policy},
              {"T", num(f.transient())},
              {"d", num(f.period())},
              {"c", num(f.increment())},
              {"file", out}},
             text.str());
    }
};

// ---- delay ------------------------------------------------------------------

struct DelayCmd {
    std::string config;
    std::int64_t flow = 1;
    std::string policy = "iwrr";
    ArrivalOptions arrival;

    void run()
    {
        const SystemSpec sys = parseSystemConfig(readTextFile(config));
        const std::size_t i = flowIndex(sys, flow);
        const Curve alpha = arrival.curve();
        json report = {{"flow", flow}};
        std::ostringstream text;
        std::vector<Policy> policies;
        if (policy == "both")
            policies = {Policy::IWRR, Policy::WRR};
        else
            policies = {policyOf(policy)};
        for (Policy p : policies) {
            const Rat h = delayBound(sys, i, alpha, p);
            report[policyName(p)] = num(h);
            text << "delay bound, flow " << flow << " (" << policyName(p) << "): " << dual(h) << '\n';
        }
        emit(report, text.str());
    }
};

// ---- simulate ---------------------------------------------------------------

struct SimulateCmd {
    std::string scenario;
    std::string out;
    bool check = false;

    void run()
    {
        const Scenario sc = parseScenario(readTextFile(scenario));
        const Trace trace = iwrr::run(sc);
        if (!out.empty()) writeTo(out, [&](std::ostream& os) { writeTraceCsv(os, trace); });

        json flows = json::array();
        std::ostringstream text;
        text << policyName(sc.policy) << ": " << trace.records().size() << " sends before horizon "
             << dual(sc.horizon) << '\n';
        bool violated = false;
        for (std::size_t j = 0; j < sc.system.flows.size(); ++j) {
            const DelayMeasurement d = maxPacketDelay(trace, j);
            json entry = {{"flow", j + 1},
                          {"packets", d.packets},
                          {"sent_bits", num(trace.output(j, sc.horizon))},
                          {"max_delay", num(d.maxDelay)},
                          {"unfinished", d.unfinished}};
            text << "  flow " << j + 1 << ": " << d.packets << " packets, max delay " << dual(d.maxDelay)
                 << (d.unfinished ? " (some packets unfinished; lower bound)" : "");
            if (check) {
                const Curve beta = sc.policy == Policy::IWRR ? iwrrServiceCurve(sc.system, j)
                                                             : wrrServiceCurve(sc.system, j);
                const StrictServiceReport r = verifyStrictService(trace, j, beta);
                entry["strict_service"] = {{"holds", r.holds()}, {"checks", r.checks}, {"violations", r.violationCount}};
                text << ", strict service " << (r.holds() ? "holds" : "VIOLATED") << " (" << r.checks << " checks)";
                violated = violated || !r.holds();
            }
            text << '\n';
            flows.push_back(entry);
        }
        if (!out.empty()) text << "wrote " << out << '\n';
        emit({{"policy", policyName(sc.policy)}, {"sends", trace.records().size()}, {"flows", flows}}, text.str());
        if (violated) throw DomainError("strict service curve violated");
    }
};

// ---- tightness --------------------------------------------------------------

struct TightnessCmd {
    std::string config;
    std::int64_t flow = 1;
    std::string policy = "iwrr";
    std::string tau;
    bool delay = false;
    int m = 6;
    ArrivalOptions arrival;
    std::string out;

    void run()
    {
        const SystemSpec sys = parseSystemConfig(readTextFile(config));
        const std::size_t i = flowIndex(sys, flow);
        const Policy p = policyOf(policy);
        const char* curveName = p == Policy::IWRR ? "beta_i" : "beta'_i";
        std::ostringstream text;
        json report = {{"flow", flow}, {"policy", policyName(p)}};
        if (delay) {
            if (arrival.bucket.empty()) throw ConfigError("--delay needs --arrival");
            const TightnessSetup st = buildDelayTightnessScenario(sys, i, arrival.curve(), p, m);
            const Trace trace = iwrr::run(st.scenario);
            const DelayMeasurement d = maxPacketDelay(trace, st.flow);
            const bool ok = !d.unfinished && d.maxDelay <= st.expected && st.expected - d.maxDelay <= st.offset;
            report.update({{"bound", num(st.expected)},
                           {"measured", num(d.maxDelay)},
                           {"epsilon", num(st.offset)},
                           {"match", ok}});
            text << "delay bound h = " << dual(st.expected) << "\nmeasured worst delay = " << dual(d.maxDelay)
                 << "\nepsilon = " << dual(st.offset) << '\n'
                 << (ok ? "measured == h - epsilon: within epsilon\n" : "measured delay outside [h - epsilon, h]\n");
            if (!out.empty()) writeTo(out, [&](std::ostream& os) { writeTraceCsv(os, trace); });
            emit(report, text.str());
            if (!ok) throw DomainError("delay trajectory missed the bound");
            return;
        }
        if (tau.empty()) throw ConfigError("tightness needs --tau or --delay");
        const Rat t = parseRat(tau, "--tau");
        const TightnessSetup st = buildTightnessScenario(sys, i, t, p);
        const Trace trace = iwrr::run(st.scenario);
        const Rat measured = measuredService(trace, st, t);
        const bool ok = measured == st.expected;
        report.update({{"tau", num(t)}, {"s", num(st.s)}, {"expected", num(st.expected)}, {"measured", num(measured)},
                       {"match", ok}});
        text << curveName << "(tau) = " << dual(st.expected) << "\nR*_i(s + tau) - R*_i(s) = " << dual(measured)
             << " with s = " << dual(st.s) << '\n'
             << (ok ? std::string("measured == ") + curveName + "(tau): exact match\n" : "MISMATCH\n");
        if (!out.empty()) writeTo(out, [&](std::ostream& os) { writeTraceCsv(os, trace); });
        emit(report, text.str());
        if (!ok) throw DomainError("tightness trajectory missed the service curve");
    }
};

// ---- experiment -------------------------------------------------------------

struct ExperimentCmd {
    bool fixed = false;
    bool randomized = false;
    std::uint64_t seed = 1;
    std::size_t samples = 1000;
    std::size_t systems = 200;
    std::string rate;
    unsigned threads = 0;
    std::size_t spotChecks = 5;
    std::string out;

    void run()
    {
        if (fixed == randomized) throw ConfigError("choose exactly one of --fig6 and --fig7");
        ExperimentConfig cfg = randomized ? randomizedDefaults() : ExperimentConfig{};
        cfg.seed = seed;
        cfg.samples = samples;
        cfg.systems = systems;
        cfg.threads = threads;
        if (!rate.empty()) cfg.arrivalRate = parseRat(rate, "--rate");
        const DelayReport report = randomized ? runRandomizedExperiment(cfg) : runFixedExperiment(cfg);
        const std::string prefix = out.empty() ? (randomized ? "randomized" : "fixed") : out;
        writeTo(prefix + ".csv", [&](std::ostream& os) { writeExperimentCsv(os, report); });
        writeTo(prefix + "_summary.csv", [&](std::ostream& os) { writeSummaryCsv(os, report); });

        std::ostringstream text;
        json ranks = json::array();
        text << "rank  median WRR ms  median IWRR ms  median diff ms  median diff/WRR\n";
        for (const RankSummary& r : report.summary) {
            char line[128];
            std::snprintf(line, sizeof line, "%4zu  %13.3f  %14.3f  %14.3f  %14.1f%%\n", r.rank + 1, r.wrrMs.median,
                          r.iwrrMs.median, r.diffMs.median, r.diffNorm.median * 100);
            text << line;
            ranks.push_back({{"rank", r.rank + 1},
                             {"wrr_ms", r.wrrMs.median},
                             {"iwrr_ms", r.iwrrMs.median},
                             {"diff_ms", r.diffMs.median},
                             {"diff_norm", r.diffNorm.median}});
        }
        bool sound = true;
        json spots = json::array();
        for (const SpotCheck& c : spotCheckBounds(cfg, report, spotChecks)) {
            const bool ok = c.simulated <= c.bound;
            sound = sound && ok;
            spots.push_back({{"sample", c.sample}, {"policy", policyName(c.policy)}, {"bound", num(c.bound)},
                             {"simulated", num(c.simulated)}, {"ok", ok}});
        }
        text << "spot checks: " << spots.size() << " replayed trajectories, bound "
             << (sound ? ">= simulated delay in all" : "BELOW a simulated delay") << '\n';
        text << "wrote " << prefix << ".csv and " << prefix << "_summary.csv\n";
        emit({{"experiment", randomized ? "randomized" : "fixed"}, {"seed", seed}, {"ranks", ranks}, {"spot_checks", spots},
              {"files", {prefix + ".csv", prefix + "_summary.csv"}}},
             text.str());
        if (!sound) throw DomainError("a delay bound is below a simulated delay");
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Interleaved weighted round-robin: service curves, delay bounds and simulation"};
    app.require_subcommand(1);
    app.add_flag("--json", jsonOut, "machine-readable report on stdout");

    CurveCmd curve;
    auto* c = app.add_subcommand("curve", "export the service curve of a flow");
    c->add_option("config", curve.config, "system JSON")->required();
    c->add_option("--flow", curve.flow, "flow number, from 1")->required();
    c->add_option("--policy", curve.policy)->check(CLI::IsMember({"iwrr", "wrr", "family"}));
    c->add_option("--periods", curve.periods, "periods exported after the transient");
    c->add_option("--out", curve.out, "output file (default stdout)");
    c->add_option("--format", curve.format, "csv or aggregate JSON")->check(CLI::IsMember({"csv", "aggregate"}));
    c->callback([&] { curve.run(); });

    DelayCmd delay;
    auto* d = app.add_subcommand("delay", "delay bound of a token-bucket flow");
    d->add_option("config", delay.config, "system JSON")->required();
    d->add_option("--flow", delay.flow, "flow number, from 1")->required();
    d->add_option("--policy", delay.policy)->check(CLI::IsMember({"iwrr", "wrr", "both"}));
    delay.arrival.add(d, true);
    d->callback([&] { delay.run(); });

    SimulateCmd sim;
    auto* s = app.add_subcommand("simulate", "simulate a scenario file");
    s->add_option("scenario", sim.scenario, "scenario JSON")->required();
    s->add_option("--out", sim.out, "trace CSV");
    s->add_flag("--check", sim.check, "verify the strict service curve of every flow");
    s->callback([&] { sim.run(); });

    TightnessCmd tight;
    auto* t = app.add_subcommand("tightness", "replay the trajectory that reaches a bound");
    t->add_option("config", tight.config, "system JSON")->required();
    t->add_option("--flow", tight.flow, "flow number, from 1")->required();
    t->add_option("--policy", tight.policy)->check(CLI::IsMember({"iwrr", "wrr"}));
    auto* tauOpt = t->add_option("--tau", tight.tau, "interval length");
    t->add_flag("--delay", tight.delay, "delay trajectory instead")->excludes(tauOpt);
    t->add_option("--m", tight.m, "epsilon = l / (2^m K)");
    t->add_option("--out", tight.out, "trace CSV");
    tight.arrival.add(t, false);
    t->callback([&] { tight.run(); });

    ExperimentCmd exp;
    auto* e = app.add_subcommand("experiment", "IWRR vs WRR delay bounds over random bursts");
    auto* f6 = e->add_flag("--fig6", exp.fixed, "fixed 8-flow system");
    e->add_flag("--fig7", exp.randomized, "randomly drawn systems")->excludes(f6);
    e->add_option("--seed", exp.seed);
    e->add_option("--N", exp.samples, "bursts per flow");
    e->add_option("--M", exp.systems, "systems (--fig7)");
    e->add_option("--rate", exp.rate, "arrival rate in bits/s");
    e->add_option("--threads", exp.threads, "worker threads, 0 = all cores");
    e->add_option("--spot-checks", exp.spotChecks, "trajectories replayed against their bound");
    e->add_option("--out", exp.out, "output prefix");
    e->callback([&] { exp.run(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return app.exit(err);
        app.exit(err);
        return 2;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return 2;
    } catch (const DomainError& err) {
        std::cerr << "domain error: " << err.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return 2;
    } catch (const std::domain_error& err) {
        std::cerr << "domain error: " << err.what() << '\n';
        return 3;
    } catch (const std::overflow_error& err) {
        std::cerr << "domain error: " << err.what() << '\n';
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return 4;
    }
    return 0;
}

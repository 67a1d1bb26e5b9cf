// sim.hpp - exact packet-level simulation of interleaved and plain weighted
// round-robin, plus the adversarial trajectories that reach the bounds.
//
// Queues are visited in flow-index order. A visit to an empty queue takes no
// time; a send of L bits that starts when the aggregate has delivered S bits
// ends at the first instant the service model has delivered S + L.

#ifndef IWRR_SIM_HPP
#define IWRR_SIM_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "iwrr/curve.hpp"
#include "iwrr/service.hpp"

namespace iwrr {

enum class Policy { IWRR, WRR };

const char* policyName(Policy p);

struct PacketArrival {
    std::size_t flow = 0;
    Rat time;
    Rat size;
};

// Line of rate c whenever a packet is being sent.
struct ConstantRate {
    Rat rate;
};

// The aggregate output follows `profile` from t = 0; the system must stay
// backlogged until the horizon.
struct ScriptedBusy {
    Curve profile;
};

using ServiceModel = std::variant<ConstantRate, ScriptedBusy>;

struct Scenario {
    SystemSpec system;
    std::vector<PacketArrival> arrivals;
    ServiceModel service = ConstantRate{1};
    Rat horizon = 1;  // no send starts at or after the horizon
    Policy policy = Policy::IWRR;
    // an arrival at the instant of a visit is enqueued before the visit
    bool arrivalsBeforeVisit = true;
};

struct ServiceRecord {
    Rat start;
    Rat end;
    std::size_t flow = 0;
    Rat size;
    std::int64_t round = 0;  // 1-based
    std::int64_t cycle = 0;  // IWRR cycle, or position within the WRR visit
    std::size_t packet = 0;  // index into Trace::arrivals()
};

class Trace {
public:
    Trace(std::vector<PacketArrival> arrivals, std::vector<ServiceRecord> records, std::size_t flows, Rat horizon,
          ServiceModel service);

    const std::vector<PacketArrival>& arrivals() const { return arrivals_; }
    const std::vector<ServiceRecord>& records() const { return records_; }
    std::size_t flowCount() const { return flows_; }
    Rat horizon() const { return horizon_; }

    // R_j(t): bits of flow j that arrived in [0, t)
    Rat input(std::size_t flow, const Rat& t) const;
    // R*_j(t): bits of flow j sent by t, partially sent packets counted fluidly
    Rat output(std::size_t flow, const Rat& t) const;
    // abscissas where R*_j changes slope inside [a, b]
    std::vector<Rat> outputBreakpoints(std::size_t flow, const Rat& a, const Rat& b) const;

    // Completion time of each packet, nullopt when not sent before the horizon.
    const std::vector<std::optional<Rat>>& completions() const { return completion_; }

    // R_j and R*_j as curves, constant after the last event.
    Curve cumulativeInput(std::size_t flow) const;
    Curve cumulativeOutput(std::size_t flow) const;

private:
    // aggregate service delivered between a and b inside one send
    Rat served(const Rat& a, const Rat& b) const;

    std::vector<PacketArrival> arrivals_;
    std::vector<ServiceRecord> records_;
    std::size_t flows_;
    Rat horizon_;
    ServiceModel service_;
    std::vector<std::vector<std::size_t>> byFlow_;  // record indices
    std::vector<std::vector<Rat>> sentBefore_;      // bits of the flow sent before each record
    std::vector<std::optional<Rat>> completion_;
};

// Throws ConfigError on malformed scenarios and DomainError("busy-period
// violation ...") when a scripted service finds every queue empty early.
Trace run(const Scenario& sc);

// ---- checks on traces --------------------------------------------------------

struct Violation {
    Rat s;
    Rat t;
    Rat served;    // R*(t) - R*(s)
    Rat required;  // candidate(t - s)
};

struct StrictServiceReport {
    std::size_t periods = 0;
    std::size_t checks = 0;
    std::size_t violationCount = 0;
    std::vector<Violation> violations;  // the first few
    bool holds() const { return violationCount == 0; }
};

// Checks R*(t) - R*(s) >= candidate(t - s) on every maximal backlogged period
// of the flow (cut at the horizon), at all vertices of the arrangement formed
// by the output breakpoints and the candidate's breakpoints. Exact for a
// continuous candidate.
StrictServiceReport verifyStrictService(const Trace& trace, std::size_t flow, const Curve& candidate,
                                        std::size_t maxWitnesses = 10);

struct DelayMeasurement {
    Rat maxDelay;
    std::size_t packets = 0;
    // some packet was still queued at the horizon; maxDelay is then a lower bound
    bool unfinished = false;
};

DelayMeasurement maxPacketDelay(const Trace& trace, std::size_t flow);

// ---- adversarial trajectories -----------------------------------------------------

struct TightnessSetup {
    Scenario scenario;
    std::vector<std::size_t> order;  // order[k] = original index of simulated flow k
    std::size_t flow = 0;            // index of the studied flow in the scenario
    Rat s;                           // start of the studied interval
    Rat offset;                      // flow-i arrivals lag s by this much
    Rat expected;                    // beta_i(tau), or h(alpha, beta_i) for delays
};

// Flows sorted by weight, the studied flow first among equal weights.
std::vector<std::size_t> tightnessOrder(const SystemSpec& sys, std::size_t i);

// Trajectory with R*_i(s + tau) - R*_i(s) = beta_i(tau) (beta'_i under WRR).
TightnessSetup buildTightnessScenario(const SystemSpec& sys, std::size_t i, const Rat& tau,
                                      Policy policy = Policy::IWRR);
TightnessSetup buildWrrTightnessScenario(const SystemSpec& sys, std::size_t i, const Rat& tau);

// R*_i(s + tau) - R*_i(s) on the simulated trajectory
Rat measuredService(const Trace& trace, const TightnessSetup& setup, const Rat& tau);

// Trajectory where one packet of flow i waits h(alpha, beta_i) - offset. Needs
// lmin_i = lmax_i = l and a sub-additive staircase alpha in multiples of l;
// offset = l / (2^m K), or 0 for a single flow.
TightnessSetup buildDelayTightnessScenario(const SystemSpec& sys, std::size_t i, const Curve& alpha,
                                           Policy policy = Policy::IWRR, int m = 6);

// inf { u > 0 | alpha(u) <= beta(u) } for a staircase alpha and continuous beta
Rat firstCrossing(const Curve& alpha, const Curve& beta);

}  // namespace iwrr

#endif  // IWRR_SIM_HPP

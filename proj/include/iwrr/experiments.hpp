// experiments.hpp - delay-bound comparison of IWRR and WRR over randomized
// token-bucket arrivals, on a fixed system or on randomly drawn systems.
//
// Delays are exact rationals in seconds; reports convert to milliseconds.

#ifndef IWRR_EXPERIMENTS_HPP
#define IWRR_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "iwrr/curve.hpp"
#include "iwrr/service.hpp"
#include "iwrr/sim.hpp"

namespace iwrr {

// h(alpha, beta_i) under IWRR or h(alpha, beta'_i) under WRR. Throws
// DomainError("unbounded ...") when the bound is infinite.
Rat delayBound(const SystemSpec& sys, std::size_t i, const Curve& alpha, Policy policy);

struct ExperimentConfig {
    // fixed system; the randomized runner ignores weights and packetBits
    std::vector<std::int64_t> weights{22, 27, 28, 30, 30, 34, 41, 45};
    Rat packetBits = 7119;
    Rat linkRate = 10000000;       // bits/s, constant-rate aggregate
    Rat arrivalRate = 500000;      // bits/s, every flow
    std::int64_t burstLo = 1;      // packets, drawn uniformly from the integers
    std::int64_t burstHi = 20;
    std::size_t samples = 1000;    // N arrival curves per flow
    std::size_t systems = 200;     // M, randomized runner only
    std::int64_t weightLo = 10;    // randomized weights
    std::int64_t weightHi = 50;
    std::int64_t packetBytesLo = 64;  // randomized packet length
    std::int64_t packetBytesHi = 1522;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = hardware concurrency
};

// Randomized-system preset: a 50 kb/s arrival rate keeps every drawn system
// stable, which 0.5 Mb/s does not.
ExperimentConfig randomizedDefaults();

// Throws ConfigError when an invariant of the configuration fails.
void validateExperiment(const ExperimentConfig& cfg);

struct DelaySample {
    std::size_t system = 0;
    std::size_t rank = 0;  // 0-based position after sorting flows by weight
    std::int64_t burstPackets = 0;
    Rat wrr;   // seconds
    Rat iwrr;  // seconds
    Rat diff() const { return wrr - iwrr; }
    double diffNorm = 0;  // diff over the median WRR bound of the same flow and system
};

struct Quartiles {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Linear interpolation between order statistics; throws on an empty sample.
Quartiles quartiles(std::vector<double> xs);

struct RankSummary {
    std::size_t rank = 0;
    Quartiles wrrMs;
    Quartiles iwrrMs;
    Quartiles diffMs;
    Quartiles diffNorm;
};

struct DelayReport {
    std::vector<SystemSpec> systems;  // flows sorted by weight
    std::vector<DelaySample> samples;  // ordered by system, rank, draw
    std::vector<RankSummary> summary;
};

DelayReport runFixedExperiment(const ExperimentConfig& cfg);
DelayReport runRandomizedExperiment(const ExperimentConfig& cfg);

// The arrival curve used for a burst of b packets on system `sys`.
Curve experimentArrival(const ExperimentConfig& cfg, const SystemSpec& sys, std::int64_t burstPackets);

// Replays the delay trajectory for `count` evenly spaced samples and returns
// (bound, simulated worst delay) pairs, both policies per sample.
struct SpotCheck {
    std::size_t sample = 0;
    Policy policy = Policy::IWRR;
    Rat bound;
    Rat simulated;
};
std::vector<SpotCheck> spotCheckBounds(const ExperimentConfig& cfg, const DelayReport& report, std::size_t count = 5);

// flow_rank,b_packets,wrr_bound_ms,iwrr_bound_ms,diff_ms,diff_norm (ranks from 1)
void writeExperimentCsv(std::ostream& os, const DelayReport& report);
// flow_rank,metric,min,q1,median,q3,max
void writeSummaryCsv(std::ostream& os, const DelayReport& report);

}  // namespace iwrr

#endif  // IWRR_EXPERIMENTS_HPP

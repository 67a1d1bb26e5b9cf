// service.hpp - closed-form service curves of interleaved and plain weighted
// round-robin, per flow, for an aggregate strict service curve beta.
//
// Flow indices are positions in SystemSpec::flows, starting at 0.

#ifndef IWRR_SERVICE_HPP
#define IWRR_SERVICE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "iwrr/curve.hpp"

namespace iwrr {

struct FlowSpec {
    std::int64_t weight = 1;
    Rat lmin = 1;  // bits
    Rat lmax = 1;  // bits
    std::string name;
};

struct SystemSpec {
    std::vector<FlowSpec> flows;
    Curve aggregate = unitRate();
    Rat lipschitz = 1;  // K, bits per second
};

// Throws ConfigError when weights, packet sizes or K are invalid, or when the
// aggregate is discontinuous, not super-additive or steeper than K.
void validateSystem(const SystemSpec& sys);

// Number of emission opportunities of flow j during x complete services of
// flow i (interleaved schedule).
std::int64_t phi(const SystemSpec& sys, std::size_t i, std::size_t j, std::int64_t x);
// Same under plain WRR: (1 + floor(x / w_i)) w_j.
std::int64_t phiWrr(const SystemSpec& sys, std::size_t i, std::size_t j, std::int64_t x);

// psi_i(x) = x + sum_{j != i} phi_{i,j}(floor(x / lmin_i)) lmax_j
Rat psi(const SystemSpec& sys, std::size_t i, const Rat& x);
Rat psiWrr(const SystemSpec& sys, std::size_t i, const Rat& x);
Curve psiCurve(const SystemSpec& sys, std::size_t i);
Curve psiWrrCurve(const SystemSpec& sys, std::size_t i);

// L_tot = q_i + Q_i with q_i = w_i lmin_i and Q_i = sum_{j != i} w_j lmax_j
Rat lTot(const SystemSpec& sys, std::size_t i);
std::pair<Rat, Rat> qQ(const SystemSpec& sys, std::size_t i);

// gamma_i = psi_i^(lower inverse)
Curve gamma(const SystemSpec& sys, std::size_t i);
// gamma_i built as lambda_1 (x) U_i from shifted stairs; must equal gamma().
Curve gammaViaU(const SystemSpec& sys, std::size_t i);
// The WRR counterpart for a unit-rate aggregate: (lambda_1 (x) nu_{q,L})([x - Q]^+)
Curve gammaWrr(const SystemSpec& sys, std::size_t i);

// beta_i = gamma_i o beta
Curve iwrrServiceCurve(const SystemSpec& sys, std::size_t i);
// beta'_i = gammaWrr o beta
Curve wrrServiceCurve(const SystemSpec& sys, std::size_t i);

struct FamilyMember {
    std::vector<std::int64_t> ks;  // indices k sharing this (rate, latency)
    Rat rate;
    Rat latency;
    Rat touch;  // abscissa where the member meets gamma_i away from its latency
};

// Non-dominated rate-latency lower bounds of gamma_i, in the unit-rate domain.
struct RateLatencyFamily {
    Rat rStar;
    std::vector<Rat> rks;
    std::int64_t kStar = 0;
    std::vector<FamilyMember> members;  // k = 0..kStar, duplicates merged

    const FamilyMember& minLatency() const { return members.front(); }
    const FamilyMember& maxRate() const { return members.back(); }
};

RateLatencyFamily rateLatencyFamily(const SystemSpec& sys, std::size_t i);

// Maps a unit-rate-domain member to the aggregate beta_{c,T0}: beta_{r c, T/c + T0}.
std::pair<Rat, Rat> rescaleMember(const FamilyMember& m, const Rat& c, const Rat& T0);

}  // namespace iwrr

#endif  // IWRR_SERVICE_HPP

// config.hpp - JSON system and scenario files.
//
// System file:
//   { "flows": [ {"name", "weight", "lmin_bits", "lmax_bits"}, ... ],
//     "aggregate": {"type": "rate_latency", "rate_bps", "latency_s"}
//                | {"type": "unit_rate"}
//                | {"type": "piecewise", "points": [[t, v], ...], "period": [d, c]},
//     "lipschitz_bps": K }
// Scenario file: the system keys plus
//   "horizon_s", "policy": "iwrr" | "wrr",
//   "service": {"type": "constant_rate", "rate_bps"} | {"type": "aggregate"},
//   "arrivals": [ {"flow", "time_s", "size_bits", "count"}, ... ],
//   "arrivals_before_visit": bool
//
// Numbers may be JSON numbers or "p/q" strings; decimals are read exactly.
// Flow numbers in files are 1-based. Every schema violation throws
// ConfigError naming the offending key.

#ifndef IWRR_CONFIG_HPP
#define IWRR_CONFIG_HPP

#include <string>
#include <string_view>

#include "iwrr/service.hpp"
#include "iwrr/sim.hpp"

namespace iwrr {

SystemSpec parseSystemConfig(std::string_view json);
Scenario parseScenario(std::string_view json);

// Reads a whole file; ConfigError when it cannot be opened.
std::string readTextFile(const std::string& path);

// {"type": "piecewise", ...} reproducing a continuous, unbounded curve.
std::string aggregateJson(const Curve& f);

}  // namespace iwrr

#endif  // IWRR_CONFIG_HPP

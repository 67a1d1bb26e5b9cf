#include "iwrr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "iwrr/errors.hpp"
#include "json.hpp"

namespace iwrr {

namespace {

using json = nlohmann::json;

// DOM builder that keeps floating-point literals as their source text, so
// that 0.1 parses to 1/10 rather than to the nearest double.
class ExactDom : public nlohmann::detail::json_sax_dom_parser<json> {
public:
    explicit ExactDom(json& root) : json_sax_dom_parser(root, true) {}

    bool number_float(double, const std::string& text)
    {
        std::string copy = text;
        return string(copy);
    }
};

json parseExact(std::string_view text)
{
    json root;
    ExactDom dom(root);
    try {
        json::sax_parse(text, &dom);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return root;
}

Rat ratAt(const json& v, const std::string& where)
{
    try {
        if (v.is_number_integer()) return Rat(v.get<std::int64_t>());
        if (v.is_string()) return Rat::parse(v.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(where + ": expected a number or a \"p/q\" string");
}

const json& need(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing \"" + key + "\"");
    return *it;
}

void onlyKeys(const json& obj, std::initializer_list<const char*> keys, const std::string& where)
{
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

std::int64_t intAt(const json& v, const std::string& where)
{
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return v.get<std::int64_t>();
}

Curve aggregateFrom(const json& a)
{
    const std::string where = "aggregate";
    if (!a.is_object()) throw ConfigError(where + ": expected an object");
    const json& type = need(a, "type", where);
    if (!type.is_string()) throw ConfigError(where + ".type: expected a string");
    const std::string t = type.get<std::string>();
    if (t == "unit_rate") {
        onlyKeys(a, {"type"}, where);
        return unitRate();
    }
    if (t == "rate_latency") {
        onlyKeys(a, {"type", "rate_bps", "latency_s"}, where);
        const Rat rate = ratAt(need(a, "rate_bps", where), where + ".rate_bps");
        const Rat latency = a.contains("latency_s") ? ratAt(a["latency_s"], where + ".latency_s") : Rat(0);
        if (rate.sign() <= 0 || latency.sign() < 0) throw ConfigError(where + ": need rate_bps > 0, latency_s >= 0");
        return rateLatency(rate, latency);
    }
    if (t == "piecewise") {
        onlyKeys(a, {"type", "points", "period"}, where);
        const json& pts = need(a, "points", where);
        const json& per = need(a, "period", where);
        if (!pts.is_array() || pts.empty()) throw ConfigError(where + ".points: expected a nonempty array");
        if (!per.is_array() || per.size() != 2) throw ConfigError(where + ".period: expected [d, c]");
        std::vector<std::pair<Rat, Rat>> points;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const std::string at = where + ".points[" + std::to_string(k) + "]";
            if (!pts[k].is_array() || pts[k].size() != 2) throw ConfigError(at + ": expected [t, v]");
            points.emplace_back(ratAt(pts[k][0], at), ratAt(pts[k][1], at));
        }
        try {
            return piecewiseLinear(points, ratAt(per[0], where + ".period"), ratAt(per[1], where + ".period"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    throw ConfigError(where + ".type: unknown aggregate type \"" + t + "\"");
}

Rat maxSlope(const Curve& f)
{
    Rat m;
    for (const Piece& p : f.pieces()) m = max(m, p.slope);
    return m;
}

SystemSpec systemFrom(const json& doc)
{
    const json& flows = need(doc, "flows", "config");
    if (!flows.is_array() || flows.empty()) throw ConfigError("flows: expected a nonempty array");
    SystemSpec sys;
    for (std::size_t k = 0; k < flows.size(); ++k) {
        const std::string where = "flows[" + std::to_string(k) + "]";
        const json& f = flows[k];
        onlyKeys(f, {"name", "weight", "lmin_bits", "lmax_bits"}, where);
        FlowSpec spec;
        spec.name = "flow " + std::to_string(k + 1);
        if (f.contains("name")) {
            if (!f["name"].is_string()) throw ConfigError(where + ".name: expected a string");
            spec.name = f["name"].get<std::string>();
        }
        spec.weight = intAt(need(f, "weight", where), where + ".weight");
        spec.lmin = ratAt(need(f, "lmin_bits", where), where + ".lmin_bits");
        spec.lmax = ratAt(need(f, "lmax_bits", where), where + ".lmax_bits");
        sys.flows.push_back(spec);
    }
    sys.aggregate = doc.contains("aggregate") ? aggregateFrom(doc["aggregate"]) : unitRate();
    sys.lipschitz = doc.contains("lipschitz_bps") ? ratAt(doc["lipschitz_bps"], "lipschitz_bps") : maxSlope(sys.aggregate);
    validateSystem(sys);
    return sys;
}

}  // namespace

SystemSpec parseSystemConfig(std::string_view text)
{
    const json doc = parseExact(text);
    onlyKeys(doc, {"flows", "aggregate", "lipschitz_bps"}, "config");
    return systemFrom(doc);
}

Scenario parseScenario(std::string_view text)
{
    const json doc = parseExact(text);
    onlyKeys(doc,
             {"flows", "aggregate", "lipschitz_bps", "horizon_s", "policy", "service", "arrivals",
              "arrivals_before_visit"},
             "scenario");
    Scenario sc;
    sc.system = systemFrom(doc);
    sc.horizon = ratAt(need(doc, "horizon_s", "scenario"), "horizon_s");

    if (doc.contains("policy")) {
        const json& p = doc["policy"];
        if (p == "iwrr")
            sc.policy = Policy::IWRR;
        else if (p == "wrr")
            sc.policy = Policy::WRR;
        else
            throw ConfigError("policy: expected \"iwrr\" or \"wrr\"");
    }

    sc.service = ConstantRate{sc.system.lipschitz};
    if (doc.contains("service")) {
        const json& s = doc["service"];
        onlyKeys(s, {"type", "rate_bps"}, "service");
        const json& type = need(s, "type", "service");
        if (type == "constant_rate") {
            if (s.contains("rate_bps")) sc.service = ConstantRate{ratAt(s["rate_bps"], "service.rate_bps")};
        } else if (type == "aggregate") {
            if (s.contains("rate_bps")) throw ConfigError("service: rate_bps only applies to constant_rate");
            sc.service = ScriptedBusy{sc.system.aggregate};
        } else {
            throw ConfigError("service.type: expected \"constant_rate\" or \"aggregate\"");
        }
    }

    if (doc.contains("arrivals_before_visit")) {
        if (!doc["arrivals_before_visit"].is_boolean()) throw ConfigError("arrivals_before_visit: expected a boolean");
        sc.arrivalsBeforeVisit = doc["arrivals_before_visit"].get<bool>();
    }

    if (doc.contains("arrivals")) {
        const json& arr = doc["arrivals"];
        if (!arr.is_array()) throw ConfigError("arrivals: expected an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string where = "arrivals[" + std::to_string(k) + "]";
            const json& a = arr[k];
            onlyKeys(a, {"flow", "time_s", "size_bits", "count"}, where);
            const std::int64_t flow = intAt(need(a, "flow", where), where + ".flow");
            if (flow < 1 || static_cast<std::size_t>(flow) > sc.system.flows.size())
                throw ConfigError(where + ".flow: no flow " + std::to_string(flow));
            const Rat time = ratAt(need(a, "time_s", where), where + ".time_s");
            const Rat size = a.contains("size_bits") ? ratAt(a["size_bits"], where + ".size_bits")
                                                     : sc.system.flows[static_cast<std::size_t>(flow - 1)].lmax;
            const std::int64_t count = a.contains("count") ? intAt(a["count"], where + ".count") : 1;
            if (count < 0 || count > 10000000) throw ConfigError(where + ".count: out of range");
            for (std::int64_t c = 0; c < count; ++c)
                sc.arrivals.push_back(PacketArrival{static_cast<std::size_t>(flow - 1), time, size});
        }
    }
    return sc;
}

std::string readTextFile(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string aggregateJson(const Curve& f)
{
    if (!f.isContinuous() || f.isBounded()) throw DomainError("only continuous, unbounded curves can be aggregates");
    const Rat end = f.transient() + f.period();
    json points = json::array();
    for (const Piece& p : f.unrolled(end)) points.push_back({p.x.str(), p.value.str()});
    points.push_back({end.str(), f(end).str()});
    json out = {{"type", "piecewise"}, {"points", points}, {"period", {f.period().str(), f.increment().str()}}};
    return out.dump();
}

}  // namespace iwrr

#include "iwrr/csv.hpp"

#include <cstdio>
#include <ostream>

namespace iwrr {

std::string formatFloat(const Rat& v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v.toDouble());
    return buf;
}

namespace {

void row(std::ostream& os, const Rat& x, const Rat& y, const char* kind)
{
    os << x.num() << ',' << x.den() << ',' << y.num() << ',' << y.den() << ',' << kind << ',' << formatFloat(x)
       << ',' << formatFloat(y) << '\n';
}

}  // namespace

void writeCurveCsv(std::ostream& os, const Curve& f, const Rat& horizon)
{
    os << "# T=" << f.transient() << " d=" << f.period() << " c=" << f.increment() << '\n';
    os << "x_num,x_den,y_num,y_den,kind,x_f,y_f\n";
    for (const Piece& p : f.unrolled(horizon)) {
        if (p.x.sign() > 0 && f.leftLimit(p.x) != p.value) row(os, p.x, f.leftLimit(p.x), "seg_end");
        row(os, p.x, p.value, "point");
        row(os, p.x, p.right, "seg_start");
    }
    if (horizon.sign() > 0 && f.leftLimit(horizon) != f.value(horizon)) row(os, horizon, f.leftLimit(horizon), "seg_end");
    row(os, horizon, f.value(horizon), "point");
}

void writeFamilyCsv(std::ostream& os, const RateLatencyFamily& fam)
{
    os << "k,r_num,r_den,T_num,T_den\n";
    for (const FamilyMember& m : fam.members)
        os << m.ks.front() << ',' << m.rate.num() << ',' << m.rate.den() << ',' << m.latency.num() << ','
           << m.latency.den() << '\n';
}

void writeTraceCsv(std::ostream& os, const Trace& trace)
{
    os << "start_num,start_den,end_num,end_den,flow,size_bits,round,cycle\n";
    for (const ServiceRecord& r : trace.records())
        os << r.start.num() << ',' << r.start.den() << ',' << r.end.num() << ',' << r.end.den() << ',' << r.flow + 1
           << ',' << r.size << ',' << r.round << ',' << r.cycle << '\n';
}

}  // namespace iwrr

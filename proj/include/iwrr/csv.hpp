// csv.hpp - plain CSV exports of curves, rate-latency families and traces.
//
// Exact values come as numerator/denominator column pairs; the trailing _f
// columns repeat them as floats with 12 significant digits for plotting.

#ifndef IWRR_CSV_HPP
#define IWRR_CSV_HPP

#include <iosfwd>
#include <string>

#include "iwrr/curve.hpp"
#include "iwrr/service.hpp"
#include "iwrr/sim.hpp"

namespace iwrr {

// "%.12g" of the exact value
std::string formatFloat(const Rat& v);

// Columns x_num,x_den,y_num,y_den,kind,x_f,y_f after a "# T=.. d=.. c=.."
// comment line. Each breakpoint in [0, horizon] gives a `point` row f(x) and
// a `seg_start` row f(x+); a `seg_end` row carries f(x-) where a jump follows
// a segment, so that the rows alone determine the curve on [0, horizon].
void writeCurveCsv(std::ostream& os, const Curve& f, const Rat& horizon);

// k,r_num,r_den,T_num,T_den; one row per member, first index of merged ones.
void writeFamilyCsv(std::ostream& os, const RateLatencyFamily& fam);

// start_num,start_den,end_num,end_den,flow,size_bits,round,cycle; one row per
// send in time order, flows numbered from 1.
void writeTraceCsv(std::ostream& os, const Trace& trace);

}  // namespace iwrr

#endif  // IWRR_CSV_HPP

#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "iwrr/csv.hpp"
#include "iwrr/errors.hpp"
#include "iwrr/service.hpp"

using namespace iwrr;

namespace {

SystemSpec makeSystem(std::vector<std::int64_t> weights, Rat l = 1)
{
    SystemSpec sys;
    for (std::int64_t w : weights) sys.flows.push_back(FlowSpec{w, l, l, ""});
    return sys;
}

SystemSpec fourFlowSystem()
{
    SystemSpec sys;
    sys.flows = {FlowSpec{4, 4096, 8704, ""}, FlowSpec{6, 3072, 5632, ""}, FlowSpec{7, 4608, 6656, ""},
                 FlowSpec{10, 3072, 8192, ""}};
    sys.aggregate = rateLatency(10000000, 0);
    sys.lipschitz = 10000000;
    return sys;
}

}  // namespace

TEST_CASE("phi on the three-flow schedule")
{
    SystemSpec sys = makeSystem({2, 3, 5});
    CHECK(phi(sys, 0, 2, 0) == 4);
    CHECK(phi(sys, 0, 2, 1) == 5);
    CHECK(phi(sys, 0, 2, 2) == 9);
    SystemSpec toy = makeSystem({2, 3});
    CHECK(phi(toy, 0, 1, 0) == 2);
    CHECK(phi(toy, 0, 1, 1) == 3);
    CHECK(phi(toy, 0, 1, 2) == 5);
    SystemSpec same = makeSystem({4, 4});
    CHECK(phi(same, 0, 1, 0) == 1);
    CHECK_THROWS_AS(phi(toy, 1, 1, 0), std::invalid_argument);
    CHECK(phiWrr(toy, 0, 1, 0) == 3);
    CHECK(phiWrr(toy, 0, 1, 2) == 6);
}

TEST_CASE("psi and round lengths")
{
    SystemSpec toy = makeSystem({2, 3});
    CHECK(psi(toy, 0, 0) == Rat(2));
    CHECK(psi(toy, 0, 1) == Rat(4));
    CHECK(psi(toy, 0, 2) == Rat(7));
    CHECK(psi(toy, 0, Rat(1, 2)) == Rat(5, 2));
    CHECK(psi(toy, 1, 0) == Rat(1));
    CHECK(psi(toy, 1, 1) == Rat(3));
    CHECK(psi(toy, 1, 2) == Rat(4));
    CHECK(psi(toy, 1, 3) == Rat(6));
    CHECK(lTot(toy, 0) == Rat(5));
    CHECK(qQ(toy, 0) == std::make_pair(Rat(2), Rat(3)));

    SystemSpec one = makeSystem({3}, 7);
    CHECK(psi(one, 0, Rat(22, 3)) == Rat(22, 3));
    CHECK(lTot(one, 0) == Rat(21));
    CHECK(qQ(one, 0).second == Rat(0));

    CHECK(lTot(fourFlowSystem(), 0) == Rat(178688));

    Curve p = psiCurve(toy, 0);
    for (int k = 0; k < 60; ++k) CHECK(p(Rat(k, 4)) == psi(toy, 0, Rat(k, 4)));
}

TEST_CASE("gamma of the toy system")
{
    SystemSpec toy = makeSystem({2, 3});
    Curve g1 = gamma(toy, 0);
    CHECK(g1(2) == Rat(0));
    CHECK(g1(3) == Rat(1));
    CHECK(g1(4) == Rat(1));
    CHECK(g1(5) == Rat(2));
    CHECK(g1(7) == Rat(2));
    CHECK(g1(Rat(9, 2)) == Rat(3, 2));
    CHECK(g1(6) == Rat(2));
    CHECK(g1.period() == Rat(5));
    CHECK(g1.increment() == Rat(2));
    Curve g2 = gamma(toy, 1);
    CHECK(g2(2) == Rat(1));
    CHECK(g2(3) == Rat(1));
    CHECK(g2(4) == Rat(2));
    CHECK(g2(5) == Rat(3));
    CHECK(equivalent(gamma(makeSystem({5}, 3), 0), unitRate()));
}

TEST_CASE("gamma from stairs matches the pseudo-inverse")
{
    SystemSpec toy = makeSystem({2, 3});
    CHECK(equivalent(gammaViaU(toy, 0), gamma(toy, 0)));
    CHECK(equivalent(gammaViaU(toy, 1), gamma(toy, 1)));
    SystemSpec f4 = fourFlowSystem();
    for (std::size_t i = 0; i < f4.flows.size(); ++i) CHECK(equivalent(gammaViaU(f4, i), gamma(f4, i)));
}

TEST_CASE("IWRR service curve")
{
    SystemSpec toy = makeSystem({2, 3});
    CHECK(equivalent(iwrrServiceCurve(toy, 0), gamma(toy, 0)));
    CHECK(iwrrServiceCurve(toy, 0)(7) == Rat(2));
    toy.aggregate = rateLatency(4, 3);
    toy.lipschitz = 4;
    Curve b = iwrrServiceCurve(toy, 0);
    Curve g = gamma(toy, 0);
    for (int k = 0; k < 50; ++k) {
        Rat t = Rat(3) + Rat(k, 3);
        CHECK(b(t) == g(Rat(4) * (t - Rat(3))));
    }
    CHECK(b(3) == Rat(0));
    CHECK(checkSuperadditive(b).holds);
    CHECK(checkSuperadditive(iwrrServiceCurve(fourFlowSystem(), 2)).holds);
}

TEST_CASE("WRR service curve")
{
    SystemSpec toy = makeSystem({2, 3});
    CHECK(wrrServiceCurve(toy, 1)(2) == Rat(0));
    CHECK(gamma(toy, 1)(2) == Rat(1));
    CHECK(wrrServiceCurve(toy, 0)(4) == Rat(1));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(equivalent(lowerPseudoInverse(psiWrrCurve(toy, i)), gammaWrr(toy, i)));
        CHECK(curveLeq(wrrServiceCurve(toy, i), iwrrServiceCurve(toy, i)).holds);
    }
    auto strict = curveLeq(iwrrServiceCurve(toy, 1), wrrServiceCurve(toy, 1));
    CHECK_FALSE(strict.holds);
    REQUIRE(strict.witness);
    CHECK(iwrrServiceCurve(toy, 1)(*strict.witness) > wrrServiceCurve(toy, 1)(*strict.witness));

    SystemSpec one = makeSystem({4}, 5);
    one.aggregate = rateLatency(3, 2);
    one.lipschitz = 3;
    CHECK(equivalent(wrrServiceCurve(one, 0), one.aggregate));
    CHECK(psiWrr(toy, 0, 0) == Rat(3));
    CHECK(psiWrr(toy, 0, 2) == Rat(8));

    SystemSpec f4 = fourFlowSystem();
    for (std::size_t i = 0; i < f4.flows.size(); ++i)
        CHECK(curveLeq(wrrServiceCurve(f4, i), iwrrServiceCurve(f4, i)).holds);
}

TEST_CASE("rate-latency family")
{
    SystemSpec toy = makeSystem({2, 3});
    RateLatencyFamily f1 = rateLatencyFamily(toy, 0);
    CHECK(f1.rStar == Rat(2, 5));
    CHECK(f1.rks.front() == Rat(1, 2));
    CHECK(f1.kStar == 0);
    REQUIRE(f1.members.size() == 1);
    CHECK(f1.members[0].rate == Rat(2, 5));
    CHECK(f1.members[0].latency == Rat(2));
    CHECK(f1.members[0].touch == Rat(7));

    RateLatencyFamily f2 = rateLatencyFamily(toy, 1);
    CHECK(f2.rStar == Rat(3, 5));
    CHECK(f2.rks == std::vector<Rat>{Rat(1, 2), Rat(1), Rat(1)});
    CHECK(f2.kStar == 1);
    CHECK(f2.minLatency().rate == Rat(1, 2));
    CHECK(f2.minLatency().latency == Rat(1));
    CHECK(f2.maxRate().rate == Rat(3, 5));
    CHECK(f2.maxRate().latency == Rat(4, 3));

    for (std::size_t i = 0; i < 2; ++i) {
        Curve g = gamma(toy, i);
        for (const FamilyMember& m : rateLatencyFamily(toy, i).members) {
            Curve b = rateLatency(m.rate, m.latency);
            CHECK(curveLeq(b, g).holds);
            CHECK(b(m.touch) == g(m.touch));
        }
    }
    std::vector<Curve> members;
    for (const FamilyMember& m : f2.members) members.push_back(rateLatency(m.rate, m.latency));
    Curve hull = maxOf(members);
    CHECK(curveLeq(hull, gamma(toy, 1)).holds);
    CHECK(hull(3) == Rat(1));

    RateLatencyFamily f4 = rateLatencyFamily(fourFlowSystem(), 0);
    CHECK(f4.rks.front() == Rat(1, 6));
    CHECK(f4.rStar == Rat(16384, 178688));
    CHECK(f4.kStar == 0);
    REQUIRE(f4.members.size() == 1);
    CHECK(f4.members[0].latency == psi(fourFlowSystem(), 0, 0));
    auto [r, T] = rescaleMember(f4.members[0], 10000000, 0);
    CHECK(r == Rat(16384, 178688) * Rat(10000000));
    CHECK(T == Rat(100864, 10000000));

    std::ostringstream os;
    writeFamilyCsv(os, f2);
    CHECK(os.str() == "k,r_num,r_den,T_num,T_den\n0,1,2,1,1\n1,3,5,4,3\n");
}

TEST_CASE("system validation")
{
    SystemSpec ok = makeSystem({2, 3});
    CHECK_NOTHROW(validateSystem(ok));
    SystemSpec bad = ok;
    bad.flows[0].weight = 0;
    CHECK_THROWS_AS(validateSystem(bad), ConfigError);
    bad = ok;
    bad.flows[1].lmax = Rat(1, 2);
    CHECK_THROWS_AS(validateSystem(bad), ConfigError);
    bad = ok;
    bad.aggregate = rateLatency(2, 0);
    CHECK_THROWS_AS(validateSystem(bad), ConfigError);
    bad = ok;
    bad.aggregate = convolveUnitRate(tokenBucket(Rat(1, 2), 1));
    CHECK_THROWS_AS(validateSystem(bad), ConfigError);
    bad = ok;
    bad.flows.clear();
    CHECK_THROWS_AS(validateSystem(bad), ConfigError);
}

TEST_CASE("curve CSV lists the toy gamma breakpoints")
{
    std::ostringstream os;
    writeCurveCsv(os, gamma(makeSystem({2, 3}), 0), 7);
    const std::string s = os.str();
    CHECK(s.rfind("# T=2 d=5 c=2\nx_num,x_den,y_num,y_den,kind,x_f,y_f\n", 0) == 0);
    for (const char* r : {"0,1,0,1,point", "2,1,0,1,point", "3,1,1,1,point", "4,1,1,1,point", "5,1,2,1,point",
                          "7,1,2,1,point"})
        CHECK(s.find(r) != std::string::npos);
    CHECK(s.find("seg_end") == std::string::npos);

    std::ostringstream st;
    writeCurveCsv(st, stair(1, 5), 6);
    CHECK(st.str().find("5,1,1,1,point,5,1\n5,1,2,1,seg_start") != std::string::npos);
    CHECK(formatFloat(Rat(1, 3)) == "0.333333333333");
}

#include <doctest.h>

#include <cmath>

#include "kerrsim/flatten.hpp"
#include "kerrsim/stdcells.hpp"

using namespace kerrsim;

namespace {

CircuitReport report_for(CellKind kind, double e_high = 50.0) {
    CellSpec spec;
    spec.kind = kind;
    spec.e_high = e_high;
    Netlist nl = build_cell(spec);
    validate_netlist(nl);
    return check_circuit(flatten(nl));
}

const NetEntry* find_in_compound(const Netlist& nl, const std::string& def,
                                 const std::string& inst) {
    for (const auto& e : nl.compounds.at(def).entries)
        if (e.name == inst) return &e;
    return nullptr;
}

} // namespace

TEST_CASE("cell kinds parse and reject unknowns") {
    CHECK(parse_cell_kind("and") == CellKind::AndGate);
    CHECK(parse_cell_kind("fanout") == CellKind::Fanout);
    CHECK(parse_cell_kind("latch") == CellKind::Latch);
    CHECK(parse_cell_kind("dflipflop") == CellKind::DFlipFlop);
    CHECK(parse_cell_kind("counter") == CellKind::Counter4);
    CHECK(parse_cell_kind("amplifier") == CellKind::AmplifierStage);
    CHECK_THROWS_AS(parse_cell_kind("nandgate"), ValidationError);
}

TEST_CASE("AND gate carries the tabulated parameters") {
    CellSpec spec;
    spec.kind = CellKind::AndGate;
    spec.e_high = 50.0;
    Netlist nl = build_cell(spec);
    CircuitReport rep = check_circuit(flatten(nl));
    CHECK(rep.simulable());
    CHECK(rep.counts.at("resonator") == 1);
    CHECK(rep.counts.at("beamsplitter") == 2);
    CHECK(rep.counts.at("phaseshifter") == 2);
    const NetEntry* r = find_in_compound(nl, "and_gate", "r");
    REQUIRE(r != nullptr);
    // chi scales as -653.4 / E_high^2
    CHECK(r->kind.resonator.chi == doctest::Approx(-653.4 / 2500.0));
    CHECK(r->kind.resonator.delta == 50.0);
    REQUIRE(r->kind.resonator.couplings.size() == 3);
    CHECK(r->kind.resonator.couplings[0].kappa == 20.0);
    CHECK(r->kind.resonator.couplings[1].kappa == 20.0);
    CHECK(r->kind.resonator.couplings[2].kappa == 10.0);
}

TEST_CASE("fanout and latch component counts match their topologies") {
    CircuitReport fo = report_for(CellKind::Fanout);
    CHECK(fo.simulable());
    CHECK(fo.counts.at("resonator") == 1);
    CHECK(fo.counts.at("beamsplitter") == 3);
    CHECK(fo.counts.at("phaseshifter") == 2);

    CircuitReport la = report_for(CellKind::Latch);
    CHECK(la.simulable());
    CHECK(la.counts.at("resonator") == 2);
    CHECK(la.counts.at("beamsplitter") == 5);
    CHECK(la.counts.at("phaseshifter") == 4);
    CHECK(la.counts.at("vacuum_input") == 5);
    CHECK(la.counts.at("driven_input") == 3); // set, reset, bias
}

TEST_CASE("flattened flip-flop has the published component counts") {
    CircuitReport rep = report_for(CellKind::DFlipFlop);
    CHECK(rep.simulable());
    CHECK(rep.counts.at("resonator") == 20);
    CHECK(rep.counts.at("beamsplitter") == 54);
    CHECK(rep.counts.at("phaseshifter") == 40);
    CHECK(rep.counts.at("vacuum_input") == 54);
    CHECK(rep.counts.at("driven_input") == 16);
}

TEST_CASE("flattened 4-bit counter has the published component counts") {
    CircuitReport rep = report_for(CellKind::Counter4);
    CHECK(rep.simulable());
    CHECK(rep.counts.at("resonator") == 88);
    CHECK(rep.counts.at("beamsplitter") == 240);
    CHECK(rep.counts.at("phaseshifter") == 176);
    CHECK(rep.counts.at("vacuum_input") == 233);
    CHECK(rep.counts.at("driven_input") == 72);
}

TEST_CASE("amplifier stages use the tabulated rates") {
    for (int stage = 0; stage < 4; ++stage) {
        CellSpec spec;
        spec.kind = CellKind::AmplifierStage;
        spec.stage = stage;
        Netlist nl = build_cell(spec);
        CHECK(check_circuit(flatten(nl)).simulable());
        bool found = false;
        for (const auto& [name, def] : nl.compounds)
            for (const auto& e : def.entries)
                if (e.kind.tag == ComponentKind::Tag::Resonator) {
                    found = true;
                    double expect_kappa = 25.0 * (1 << stage);
                    CHECK(e.kind.resonator.couplings[0].kappa == expect_kappa);
                    CHECK(e.kind.resonator.delta == 2.0 * expect_kappa);
                    CHECK(e.kind.resonator.chi == -0.5);
                }
        CHECK(found);
    }
    CellSpec bad;
    bad.kind = CellKind::AmplifierStage;
    bad.stage = 7;
    CHECK_THROWS_AS(build_cell(bad), ValidationError);
}

TEST_CASE("non-positive E_high is rejected") {
    CellSpec spec;
    spec.kind = CellKind::AndGate;
    spec.e_high = 0.0;
    CHECK_THROWS_AS(build_cell(spec), ValidationError);
}

TEST_CASE("auxiliary drives follow the scaling laws") {
    CellSpec spec;
    spec.kind = CellKind::Fanout;
    spec.e_high = 50.0;
    DriveProgram dp = cell_drives(spec);
    REQUIRE(dp.find("fanout_bc") != nullptr);
    CHECK(dp.find("fanout_bc")->eval(0.0).real() == doctest::Approx(-122.5));

    spec.kind = CellKind::Latch;
    DriveProgram lp = cell_drives(spec);
    REQUIRE(lp.find("latch_bc") != nullptr);
    CHECK(std::abs(lp.find("latch_bc")->eval(0.0)) == doctest::Approx(87.5));
}

TEST_CASE("undriven classical response is the zero state") {
    ResonatorParams p;
    p.delta = 50.0;
    p.chi = -0.5;
    p.couplings = {{25.0, -kPi / 2}, {25.0, -kPi / 2}};
    ClassicalResponse r = classical_response(p, 25.0, 0.0);
    REQUIRE(r.photon_numbers.size() == 1);
    CHECK(r.photon_numbers[0] == doctest::Approx(0.0));
    CHECK_FALSE(r.bistable);
}

TEST_CASE("classical roots satisfy the cubic balance") {
    ResonatorParams p;
    p.delta = 50.0;
    p.chi = -0.5;
    p.couplings = {{25.0, -kPi / 2}, {25.0, -kPi / 2}};
    for (double b : {10.0, 30.04, 39.53, 60.0}) {
        ClassicalResponse r = classical_response(p, 25.0, b);
        REQUIRE_FALSE(r.photon_numbers.empty());
        for (double n : r.photon_numbers) {
            double rhs = n * (std::pow(p.total_kappa() / 2.0, 2) +
                              std::pow(p.delta + 2.0 * p.chi * n, 2));
            CHECK(rhs == doctest::Approx(25.0 * b * b).epsilon(1e-9));
        }
    }
}

TEST_CASE("inflection point sits at -Delta/(3 chi)") {
    // at the inflection drive the three roots merge near n = 33.33
    ResonatorParams p;
    p.delta = 50.0;
    p.chi = -0.5;
    p.couplings = {{25.0, -kPi / 2}, {25.0, -kPi / 2}};
    double n_inf = -p.delta / (3.0 * p.chi);
    CHECK(n_inf == doctest::Approx(33.3333333));
    // kappa=50 = delta: Delta/kappa = 1 > sqrt(3)/2 so bistability exists;
    // the critical drive for the merged root: kappa1 b^2 = n [(k/2)^2 + (Delta+2 chi n)^2]
    double b_inf = std::sqrt(n_inf * (625.0 + std::pow(50.0 - n_inf, 2)) / 25.0);
    ClassicalResponse at = classical_response(p, 25.0, b_inf);
    // near-critical drive: middle roots cluster around n_inflection
    bool near = false;
    for (double n : at.photon_numbers)
        if (std::abs(n - n_inf) < 8.0) near = true;
    CHECK(near);
}

TEST_CASE("bistability onset requires Delta > sqrt(3)/2 kappa") {
    const double kappa = 50.0;
    for (double ratio : {0.80, 0.85, 0.8661, 0.90, 1.0}) {
        ResonatorParams p;
        p.delta = ratio * kappa;
        p.chi = -0.5;
        p.couplings = {{25.0, -kPi / 2}, {25.0, -kPi / 2}};
        // local extrema of n [(kappa/2)^2 + (Delta + 2 chi n)^2] sit at the
        // roots of 12 chi^2 n^2 + 8 Delta chi n + (kappa^2/4 + Delta^2); a
        // drive between the fold levels yields three roots iff they exist
        double a2 = 12.0 * p.chi * p.chi, a1 = 8.0 * p.delta * p.chi;
        double a0 = kappa * kappa / 4.0 + p.delta * p.delta;
        double disc = a1 * a1 - 4.0 * a2 * a0;
        bool expect = ratio > std::sqrt(3.0) / 2.0;
        CHECK((disc > 0.0) == expect);
        if (disc > 0.0) {
            double n_mid = -a1 / (2.0 * a2); // midpoint of the two extrema
            double b_mid = std::sqrt(
                n_mid * (a0 + 4.0 * p.delta * p.chi * n_mid +
                         4.0 * p.chi * p.chi * n_mid * n_mid) / 25.0);
            CHECK(classical_response(p, 25.0, b_mid).bistable);
        } else {
            bool any_bistable = false;
            for (double b = 0.5; b < 80.0; b += 0.25)
                if (classical_response(p, 25.0, b).bistable) any_bistable = true;
            CHECK_FALSE(any_bistable);
        }
    }
}

TEST_CASE("switching energy evaluates kappa^2/(|chi| kappa1)") {
    CHECK(switching_energy(50.0, 20.0, -0.26136) == doctest::Approx(478.3).epsilon(1e-3));
    CHECK_THROWS_AS(switching_energy(50.0, 0.0, -0.5), ValidationError);
    CHECK_THROWS_AS(switching_energy(50.0, 20.0, 0.0), ValidationError);
}

TEST_CASE("parameter table is embedded and parseable") {
    const std::string& j = cell_params_json();
    CHECK(j.find("and_gate") != std::string::npos);
    CHECK(j.find("latch") != std::string::npos);
    CHECK(j.find("amplifier") != std::string::npos);
}

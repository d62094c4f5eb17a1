#include <doctest.h>

#include "kerrsim/drives.hpp"
#include "kerrsim/errors.hpp"

using namespace kerrsim;

TEST_CASE("constant waveform") {
    Waveform w = Waveform::constant({2.0, -3.0});
    CHECK(w.eval(0.0) == Complex(2.0, -3.0));
    CHECK(w.eval(123.0) == Complex(2.0, -3.0));
}

TEST_CASE("square wave is left-continuous at its edges") {
    Waveform w = Waveform::square(0.0, 1.0, 2.0, 0.5, 0.0);
    CHECK(w.eval(0.0) == Complex(0.0, 0.0));     // start of period: still low
    CHECK(w.eval(0.5) == Complex(1.0, 0.0));     // inside the high interval
    CHECK(w.eval(1.0) == Complex(1.0, 0.0));     // falling edge: old (high) value
    CHECK(w.eval(1.0 + 1e-9) == Complex(0.0, 0.0));
    CHECK(w.eval(2.0) == Complex(0.0, 0.0));     // rising edge: old (low) value
    CHECK(w.eval(2.5) == Complex(1.0, 0.0));
}

TEST_CASE("square wave honors duty and phase") {
    Waveform w = Waveform::square(-1.0, 1.0, 4.0, 0.25, 0.5);
    // phase offset of half a period: u(t) = t/4 + 0.5 mod 1
    CHECK(w.eval(0.1).real() == doctest::Approx(-1.0)); // u ~ 0.525 > duty
    CHECK(w.eval(2.5).real() == doctest::Approx(1.0));  // u ~ 0.125 <= 0.25
}

TEST_CASE("triangle wave hits its extremes") {
    Waveform w = Waveform::triangle(1.0, 5.0, 2.0, 0.0);
    CHECK(w.eval(0.0).real() == doctest::Approx(1.0));
    CHECK(w.eval(0.5).real() == doctest::Approx(3.0));
    CHECK(w.eval(1.0).real() == doctest::Approx(5.0));
    CHECK(w.eval(1.5).real() == doctest::Approx(3.0));
    CHECK(w.eval(2.0).real() == doctest::Approx(1.0));
}

TEST_CASE("piecewise waveform holds the old value at a breakpoint") {
    Waveform w = Waveform::piecewise({{0.0, 0.0}, {1.5, {50.0, 0.0}}, {3.0, 0.0}});
    CHECK(w.eval(-1.0) == Complex(0.0, 0.0));
    CHECK(w.eval(1.0) == Complex(0.0, 0.0));
    CHECK(w.eval(1.5) == Complex(0.0, 0.0)); // left-continuous
    CHECK(w.eval(1.5 + 1e-9) == Complex(50.0, 0.0));
    CHECK(w.eval(3.0) == Complex(50.0, 0.0));
    CHECK(w.eval(4.0) == Complex(0.0, 0.0));
}

TEST_CASE("drive program parses every waveform kind") {
    DriveProgram dp = parse_drive_program(R"(
# comment line
in constant level=(3,-2)
clk square low=0 high=50 period=4 duty=0.5 phase=0.25
ramp triangle low=0 high=20 period=10
steps piecewise 0:0 1.5:(50,0) 3:0
)");
    REQUIRE(dp.waveforms.size() == 4);
    CHECK(dp.find("in")->eval(0.0) == Complex(3.0, -2.0));
    CHECK(dp.find("clk")->duty == 0.5);
    CHECK(dp.find("ramp")->eval(5.0).real() == doctest::Approx(20.0));
    CHECK(dp.find("steps")->eval(2.0) == Complex(50.0, 0.0));
    CHECK(dp.find("absent") == nullptr);
}

TEST_CASE("drive program round-trips through its serializer") {
    DriveProgram dp = parse_drive_program(R"(
a constant level=1.5
b square low=(0,0) high=(50,0) period=4 duty=0.25 phase=0.125
c triangle low=-1 high=1 period=2 phase=0.5
d piecewise 0:1 2:(0,-3)
)");
    DriveProgram dp2 = parse_drive_program(serialize_drive_program(dp));
    REQUIRE(dp2.waveforms.size() == dp.waveforms.size());
    for (double t : {0.0, 0.3, 1.0, 1.9, 2.0, 2.7, 5.1})
        for (const auto& [name, w] : dp.waveforms)
            CHECK(w.eval(t) == dp2.find(name)->eval(t));
}

TEST_CASE("parser rejects malformed drive programs") {
    CHECK_THROWS_AS(parse_drive_program("x wobble level=1\n"), ParseError);
    CHECK_THROWS_AS(parse_drive_program("x constant\n"), ParseError);
    CHECK_THROWS_AS(parse_drive_program("x square low=0 high=1 period=0\n"), ParseError);
    CHECK_THROWS_AS(parse_drive_program("x square low=0 high=1 period=1 duty=1.5\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_drive_program("x piecewise\n"), ParseError);
    CHECK_THROWS_AS(parse_drive_program("x piecewise 1\n"), ParseError);
    CHECK_THROWS_AS(parse_drive_program("x constant level=1\nx constant level=2\n"),
                    ParseError);
}

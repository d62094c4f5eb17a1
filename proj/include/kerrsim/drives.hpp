#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kerrsim/types.hpp"

namespace kerrsim {

/// Deterministic drive waveform in photon-flux-amplitude units. Evaluation is
/// pure; discontinuous waveforms are left-continuous so that step-boundary
/// sampling is reproducible.
struct Waveform {
    enum class Kind { Constant, Square, Triangle, Piecewise };

    Kind kind = Kind::Constant;
    Complex level{0.0, 0.0};           // Constant
    Complex low{0.0, 0.0};             // Square / Triangle
    Complex high{0.0, 0.0};            // Square / Triangle
    double period = 1.0;               // Square / Triangle
    double duty = 0.5;                 // Square
    double phase = 0.0;                // Square / Triangle, in periods
    std::vector<std::pair<double, Complex>> breakpoints; // Piecewise, sorted by time

    Complex eval(double t) const;

    static Waveform constant(Complex level);
    static Waveform square(Complex low, Complex high, double period, double duty = 0.5,
                           double phase = 0.0);
    static Waveform triangle(Complex low, Complex high, double period, double phase = 0.0);
    static Waveform piecewise(std::vector<std::pair<double, Complex>> breakpoints);

    bool operator==(const Waveform&) const = default;
};

/// Named waveforms. A driven external input resolves its waveform by drive
/// label first, then by its own input name.
struct DriveProgram {
    std::map<std::string, Waveform> waveforms;

    const Waveform* find(const std::string& name) const;
    bool operator==(const DriveProgram&) const = default;
};

/// Parse the line-oriented drive-program format (see docs/netlist_format.md).
DriveProgram parse_drive_program(std::string_view text);
std::string serialize_drive_program(const DriveProgram& dp);

} // namespace kerrsim

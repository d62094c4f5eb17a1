#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kerrsim/drives.hpp"
#include "kerrsim/netlist.hpp"

namespace kerrsim {

enum class CellKind { AmplifierStage, AndGate, Fanout, Latch, DFlipFlop, Counter4 };

CellKind parse_cell_kind(std::string_view name); // throws ValidationError
const char* cell_kind_name(CellKind kind);

struct CellSpec {
    CellKind kind = CellKind::AndGate;
    double e_high = 50.0;
    int stage = 0;         // AmplifierStage only: 0..3
    bool inverting = false; // AmplifierStage only
};

/// Build a complete netlist for the cell: compound definitions plus a
/// top-level instance with named external inputs and outputs. Drive labels:
/// gate inputs "a"/"b"/"in"/"set"/"reset"/"d"/"clock"; auxiliary coherent
/// drives "and_bc" (none), "fanout_bc", "latch_bc", "amp_bc_<stage>_<n|i>",
/// "trim" (zero-amplitude, counter only).
Netlist build_cell(const CellSpec& spec);

/// Constant waveforms for every auxiliary drive the cell needs (beta_c
/// levels, zero trim). Cell signal inputs (a/b/in/set/...) are not included.
DriveProgram cell_drives(const CellSpec& spec);

struct ClassicalResponse {
    std::vector<double> photon_numbers; // non-negative real roots, ascending
    bool bistable = false;              // three distinct positive roots
};

/// Steady-state photon numbers n solving
/// kappa1 |beta_in|^2 = n [ (kappa/2)^2 + (Delta + 2 chi n)^2 ].
ClassicalResponse classical_response(const ResonatorParams& params, double kappa1,
                                     double beta_in1);

/// kappa^2 / (|chi| kappa1), in photon units.
double switching_energy(double kappa, double kappa1, double chi);

/// Parsed table of cell parameters (data/cell_params.json, embedded at build
/// time). Returned as generic JSON to keep the table the single source of
/// truth.
const std::string& cell_params_json();

namespace cells_detail {
/// Beamsplitter port-orientation masks frozen by the numeric search in
/// tools/cell_search.cpp; two bits per beamsplitter (swap inputs, swap
/// outputs).
inline constexpr unsigned kAndWiring = 10;
inline constexpr unsigned kFanoutWiring = 10;
inline constexpr unsigned kLatchWiring = 63;
inline constexpr unsigned kLatchVariant = 3;

void add_and_gate(Netlist& nl, double e_high, unsigned wiring = kAndWiring);
void add_fanout(Netlist& nl, double e_high, bool trimmed = false,
                unsigned wiring = kFanoutWiring);
void add_latch(Netlist& nl, double e_high, unsigned wiring = kLatchWiring,
               unsigned variant = kLatchVariant);
void add_amplifier_stage(Netlist& nl, int stage, bool inverting);
void add_dflipflop(Netlist& nl, double e_high);
void add_counter4(Netlist& nl, double e_high);
} // namespace cells_detail

} // namespace kerrsim

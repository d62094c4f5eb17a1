#pragma once

#include <map>
#include <string>
#include <vector>

#include "kerrsim/netlist.hpp"

namespace kerrsim {

/// One primitive component in a flattened circuit. Never Input or Compound.
struct FlatComponent {
    std::string name; // path-joined: parent.child
    ComponentKind kind;
};

/// Producer output port -> consumer input port, both component-internal.
struct Connection {
    int from_comp = -1;
    int from_port = 0;
    int to_comp = -1;
    int to_port = 0;
    bool operator==(const Connection&) const = default;
};

struct ExternalInput {
    std::string name;  // path of the input entry (or auto-generated for implicit vacuum)
    std::string drive; // empty = vacuum
    int to_comp = -1;  // consumer
    int to_port = 0;

    bool is_vacuum() const { return drive.empty(); }
};

struct ExternalOutput {
    std::string name;
    int from_comp = -1;
    int from_port = 0;
};

struct FlatCircuit {
    std::string name;
    std::vector<FlatComponent> components;
    std::vector<Connection> connections;
    std::vector<ExternalInput> inputs;   // ordered: declaration order, implicit vacuum appended
    std::vector<ExternalOutput> outputs; // ordered

    int n_resonators() const;
    int find_component(std::string_view name) const; // -1 if absent
};

/// Expand compounds, namespace instance names, rewire across compound
/// boundaries, and bind unconnected inputs to fresh vacuum inputs.
/// Throws ValidationError on cyclic compounds or arity mismatches.
FlatCircuit flatten(const Netlist& nl);

/// Re-express a FlatCircuit as an (already flat) Netlist; flatten of the
/// result reproduces the FlatCircuit.
Netlist to_netlist(const FlatCircuit& fc);

struct CircuitReport {
    std::map<std::string, int> counts; // by kind name + "vacuum_input"/"driven_input"/"output"
    std::vector<std::string> violations;

    bool simulable() const { return violations.empty(); }
    std::string to_text() const;
};

/// Component statistics and bad-connection diagnostics.
CircuitReport check_circuit(const FlatCircuit& fc);

} // namespace kerrsim

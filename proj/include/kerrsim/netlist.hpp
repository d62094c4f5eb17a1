#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kerrsim/errors.hpp"
#include "kerrsim/types.hpp"

namespace kerrsim {

struct ResonatorCoupling {
    double kappa = 0.0;
    double psi = -kPi / 2; // default coupling phase
    bool operator==(const ResonatorCoupling&) const = default;
};

struct ResonatorParams {
    double delta = 0.0;
    double chi = 0.0;
    std::vector<ResonatorCoupling> couplings;

    double total_kappa() const;
    bool operator==(const ResonatorParams&) const = default;
};

/// What a netlist entry instantiates. Primitive kinds carry their parameters
/// inline; Compound refers to a definition by name.
struct ComponentKind {
    enum class Tag {
        Resonator,
        Beamsplitter,
        Phaseshifter,
        Displacement,
        Identity,
        Input, // external input; drive empty means vacuum
        Compound,
    };

    Tag tag = Tag::Identity;
    ResonatorParams resonator; // Tag::Resonator
    double theta = 0.0;        // Tag::Beamsplitter
    double phi = 0.0;          // Tag::Phaseshifter
    Complex beta0{0.0, 0.0};   // Tag::Displacement
    std::string drive;         // Tag::Input
    std::string compound;      // Tag::Compound

    bool is_primitive() const { return tag != Tag::Compound; }
    /// Port counts for primitive kinds; compound arity comes from its definition.
    int n_inputs() const;
    int n_outputs() const;

    static ComponentKind make_resonator(ResonatorParams p);
    static ComponentKind make_beamsplitter(double theta);
    static ComponentKind make_phaseshifter(double phi);
    static ComponentKind make_displacement(Complex beta0);
    static ComponentKind make_identity();
    static ComponentKind make_input(std::string drive = ""); // "" = vacuum
    static ComponentKind make_compound(std::string defname);

    bool operator==(const ComponentKind&) const = default;
};

const char* kind_name(ComponentKind::Tag tag);

/// Source feeding one input port of an entry.
struct SourceRef {
    enum class Tag {
        Unconnected,  // becomes a fresh vacuum input at flatten time
        Vacuum,       // explicit vacuum input
        Drive,        // external coherent input, referenced by drive name
        Port,         // output port of another entry: name.port
        CompoundPort, // j-th input of the enclosing compound definition
    };

    Tag tag = Tag::Unconnected;
    std::string name; // Drive: drive name; Port: instance name
    int port = 0;     // Port: output index; CompoundPort: input index

    static SourceRef unconnected() { return {}; }
    static SourceRef vacuum() { return {Tag::Vacuum, "", 0}; }
    static SourceRef drive(std::string n) { return {Tag::Drive, std::move(n), 0}; }
    static SourceRef from_port(std::string inst, int p) { return {Tag::Port, std::move(inst), p}; }
    static SourceRef compound_port(int j) { return {Tag::CompoundPort, "", j}; }

    bool operator==(const SourceRef&) const = default;
};

struct NetEntry {
    std::string name;
    ComponentKind kind;
    std::vector<SourceRef> inputs; // positional; may be shorter than arity

    bool operator==(const NetEntry&) const = default;
};

struct OutputDecl {
    std::string name;     // external output name (top level) or index as string (in compound)
    std::string instance; // producer entry
    int port = 0;         // producer output index

    bool operator==(const OutputDecl&) const = default;
};

struct CompoundDef {
    std::string name;
    int n_in = 0;
    int n_out = 0;
    std::vector<NetEntry> entries;
    /// outputs[j] = producer of the compound's j-th output port.
    std::vector<std::pair<std::string, int>> outputs;

    bool operator==(const CompoundDef&) const = default;
};

struct Netlist {
    std::string name = "circuit";
    std::vector<NetEntry> entries;
    std::vector<OutputDecl> outputs;
    std::map<std::string, CompoundDef> compounds;

    const NetEntry* find_entry(std::string_view n) const;
    bool operator==(const Netlist&) const = default;
};

/// Parse the line-oriented netlist format (see docs/netlist_format.md).
/// Throws ParseError on malformed input.
Netlist parse_netlist(std::string_view text);

/// Inverse of parse_netlist on valid netlists.
std::string serialize_netlist(const Netlist& nl);

/// Structural checks: arity, unique sources, resolvable and acyclic compound
/// references, unique drive bindings per port. Throws ValidationError.
void validate_netlist(const Netlist& nl);

/// Input/output arity of a kind in the context of a netlist (resolves compounds).
int input_arity(const Netlist& nl, const ComponentKind& k);
int output_arity(const Netlist& nl, const ComponentKind& k);

} // namespace kerrsim

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kerrsim/flatten.hpp"
#include "kerrsim/types.hpp"

namespace kerrsim {

/// Per-resonator nonlinear data. The linear matrices never carry the Kerr
/// term; it is applied per state by the integrator.
struct ResonatorState {
    std::string name;
    double delta = 0.0;
    double kappa = 0.0; // total decay rate
    double chi = 0.0;
};

/// Linear input-output block: d/dt alpha = A alpha + a + B b_in (+ nonlinear),
/// b_out = C alpha + c + D b_in. Static components have zero states.
struct ComponentBlock {
    CMatrix A, B, C, D;
    CVector a, c;
    std::vector<ResonatorState> resonators; // one per state row

    int n_states() const { return static_cast<int>(A.rows()); }
    int n_inputs() const { return static_cast<int>(D.cols()); }
    int n_outputs() const { return static_cast<int>(D.rows()); }
};

/// Block for a single primitive component. Throws std::logic_error for
/// compound or input kinds.
ComponentBlock component_block(const ComponentKind& kind, const std::string& name = "");

/// Block-diagonal composition of unconnected components.
ComponentBlock concatenate(const std::vector<ComponentBlock>& blocks);

/// Compiled system over external ports only.
struct ReducedSystem {
    CMatrix A;  // feedback-induced linear coupling; bare diagonal excluded
    CVector a;
    CMatrix B;  // n_res x n_ext_in
    CMatrix C;  // n_ext_out x n_res
    CVector c;
    CMatrix D;  // n_ext_out x n_ext_in

    std::vector<ResonatorState> resonators;
    CVector bare; // -i*delta - kappa/2 per state

    std::vector<std::string> input_names;
    std::vector<std::string> input_drives; // empty string = vacuum
    std::vector<std::string> output_names;

    int n_states() const { return static_cast<int>(resonators.size()); }
    int n_inputs() const { return static_cast<int>(input_names.size()); }
    int n_outputs() const { return static_cast<int>(output_names.size()); }
    int state_index(std::string_view name) const;  // -1 if absent
    int output_index(std::string_view name) const; // -1 if absent
};

/// Algebraic internal-field elimination. `connections` pairs the block's
/// output port `first` with input port `second`; unlisted ports are external
/// and keep their relative order. Throws ValidationError when (1 - D_II) is
/// numerically singular (condition number above `cond_limit`).
ReducedSystem eliminate_internal(const ComponentBlock& block,
                                 const std::vector<std::pair<int, int>>& connections,
                                 double cond_limit = 1e12);

/// Full pipeline: blocks, concatenation, elimination, index maps.
ReducedSystem reduce(const FlatCircuit& fc);

/// Independent reduction by backward propagation through the static
/// connection graph. Refuses circuits whose static subgraph has a loop.
ReducedSystem backprop_reduce(const FlatCircuit& fc);

/// Serialize to the structured text format of the `reduce` CLI subcommand.
std::string serialize_reduced(const ReducedSystem& rs);

} // namespace kerrsim

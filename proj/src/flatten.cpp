#include "kerrsim/flatten.hpp"

#include <functional>
#include <set>
#include <sstream>

namespace kerrsim {

int FlatCircuit::n_resonators() const {
    int n = 0;
    for (const auto& c : components)
        if (c.kind.tag == ComponentKind::Tag::Resonator) ++n;
    return n;
}

int FlatCircuit::find_component(std::string_view name) const {
    for (size_t i = 0; i < components.size(); ++i)
        if (components[i].name == name) return static_cast<int>(i);
    return -1;
}

namespace {

// Flat-level entry produced by compound expansion. Sources are already
// rewritten to refer to flat names.
struct Expander {
    const Netlist& nl;
    std::vector<NetEntry> flat;           // primitives + input entries, flat names
    std::vector<OutputDecl> flat_outputs; // flat producers

    // For a compound instance at some prefix: output port j -> flat producer.
    // Computed structurally (does not depend on wiring).
    std::pair<std::string, int> export_of(const CompoundDef& def, const std::string& prefix,
                                          int j) const {
        const auto& [inst, port] = def.outputs[j];
        const NetEntry* inner = nullptr;
        for (const auto& e : def.entries)
            if (e.name == inst) inner = &e;
        if (!inner)
            throw ValidationError("compound '" + def.name + "' exports unknown instance '" +
                                  inst + "'");
        if (inner->kind.tag == ComponentKind::Tag::Compound) {
            auto it = nl.compounds.find(inner->kind.compound);
            return export_of(it->second, prefix + inst + ".", port);
        }
        return {prefix + inst, port};
    }

    // env: resolved sources for the enclosing compound's input ports.
    void expand_scope(const std::string& prefix, const std::vector<NetEntry>& entries,
                      const std::vector<SourceRef>& env) {
        auto find_local = [&](const std::string& name) -> const NetEntry* {
            for (const auto& e : entries)
                if (e.name == name) return &e;
            return nullptr;
        };

        std::function<SourceRef(const SourceRef&)> resolve = [&](const SourceRef& s) -> SourceRef {
            switch (s.tag) {
                case SourceRef::Tag::Unconnected:
                case SourceRef::Tag::Vacuum:
                case SourceRef::Tag::Drive: return s;
                case SourceRef::Tag::CompoundPort:
                    if (s.port < 0 || s.port >= static_cast<int>(env.size()))
                        throw ValidationError(prefix + ": compound input index out of range");
                    return env[s.port];
                case SourceRef::Tag::Port: {
                    const NetEntry* producer = find_local(s.name);
                    if (!producer)
                        throw ValidationError(prefix + ": unknown source '" + s.name + "'");
                    if (producer->kind.tag == ComponentKind::Tag::Compound) {
                        const auto& def = nl.compounds.at(producer->kind.compound);
                        if (s.port < 0 || s.port >= def.n_out)
                            throw ValidationError(prefix + ": port " + std::to_string(s.port) +
                                                  " out of range for '" + s.name + "'");
                        auto [inst, port] = export_of(def, prefix + s.name + ".", s.port);
                        return SourceRef::from_port(inst, port);
                    }
                    return SourceRef::from_port(prefix + s.name, s.port);
                }
            }
            return s;
        };

        for (const auto& e : entries) {
            if (e.kind.tag == ComponentKind::Tag::Compound) {
                const auto& def = nl.compounds.at(e.kind.compound);
                if (static_cast<int>(e.inputs.size()) > def.n_in)
                    throw ValidationError(prefix + e.name + ": too many sources for compound '" +
                                          e.kind.compound + "'");
                std::vector<SourceRef> child_env(def.n_in, SourceRef::unconnected());
                for (size_t j = 0; j < e.inputs.size(); ++j)
                    child_env[j] = resolve(e.inputs[j]);
                expand_scope(prefix + e.name + ".", def.entries, child_env);
            } else {
                NetEntry out;
                out.name = prefix + e.name;
                out.kind = e.kind;
                int arity = e.kind.n_inputs();
                out.inputs.resize(arity, SourceRef::unconnected());
                for (size_t j = 0; j < e.inputs.size(); ++j)
                    out.inputs[j] = resolve(e.inputs[j]);
                flat.push_back(std::move(out));
            }
        }
        (void)find_local;
    }
};

} // namespace

FlatCircuit flatten(const Netlist& nl) {
    validate_netlist(nl);

    Expander ex{nl, {}, {}};
    ex.expand_scope("", nl.entries, {});

    // resolve top-level output declarations
    for (const auto& o : nl.outputs) {
        const NetEntry* producer = nl.find_entry(o.instance);
        OutputDecl fo;
        fo.name = o.name;
        if (producer && producer->kind.tag == ComponentKind::Tag::Compound) {
            const auto& def = nl.compounds.at(producer->kind.compound);
            auto [inst, port] = ex.export_of(def, o.instance + ".", o.port);
            fo.instance = inst;
            fo.port = port;
        } else {
            fo.instance = o.instance;
            fo.port = o.port;
        }
        ex.flat_outputs.push_back(std::move(fo));
    }

    // assemble the FlatCircuit
    FlatCircuit fc;
    fc.name = nl.name;
    std::map<std::string, int> comp_index;  // flat component name -> index
    std::map<std::string, int> input_index; // input entry name -> index in fc.inputs

    std::set<std::string> seen;
    for (const auto& e : ex.flat)
        if (!seen.insert(e.name).second)
            throw ValidationError("name collision after flattening: '" + e.name + "'");

    for (const auto& e : ex.flat) {
        if (e.kind.tag == ComponentKind::Tag::Input) {
            input_index[e.name] = static_cast<int>(fc.inputs.size());
            fc.inputs.push_back({e.name, e.kind.drive, -1, 0});
        } else {
            comp_index[e.name] = static_cast<int>(fc.components.size());
            fc.components.push_back({e.name, e.kind});
        }
    }

    auto bind_input_entry = [&](int input_idx, int comp, int port) {
        auto& in = fc.inputs[input_idx];
        if (in.to_comp >= 0)
            throw ValidationError("input '" + in.name + "' feeds more than one port");
        in.to_comp = comp;
        in.to_port = port;
    };

    for (const auto& e : ex.flat) {
        if (e.kind.tag == ComponentKind::Tag::Input) continue;
        int ci = comp_index.at(e.name);
        for (size_t p = 0; p < e.inputs.size(); ++p) {
            const SourceRef& s = e.inputs[p];
            switch (s.tag) {
                case SourceRef::Tag::Unconnected:
                case SourceRef::Tag::Vacuum:
                    fc.inputs.push_back(
                        {e.name + ".in" + std::to_string(p), "", ci, static_cast<int>(p)});
                    break;
                case SourceRef::Tag::Drive:
                    fc.inputs.push_back(
                        {e.name + ".in" + std::to_string(p), s.name, ci, static_cast<int>(p)});
                    break;
                case SourceRef::Tag::Port: {
                    auto it = comp_index.find(s.name);
                    if (it != comp_index.end()) {
                        fc.connections.push_back({it->second, s.port, ci, static_cast<int>(p)});
                    } else {
                        auto ii = input_index.find(s.name);
                        if (ii == input_index.end())
                            throw ValidationError("unknown flat source '" + s.name + "'");
                        bind_input_entry(ii->second, ci, static_cast<int>(p));
                    }
                    break;
                }
                case SourceRef::Tag::CompoundPort:
                    throw ValidationError("unresolved compound port after flattening");
            }
        }
    }

    for (const auto& o : ex.flat_outputs) {
        auto it = comp_index.find(o.instance);
        if (it == comp_index.end()) {
            if (input_index.count(o.instance))
                throw ValidationError("output '" + o.name +
                                      "' wired directly to an external input; insert an "
                                      "identity component");
            throw ValidationError("output '" + o.name + "' references unknown instance '" +
                                  o.instance + "'");
        }
        int arity = fc.components[it->second].kind.n_outputs();
        if (o.port < 0 || o.port >= arity)
            throw ValidationError("output '" + o.name + "' port out of range");
        fc.outputs.push_back({o.name, it->second, o.port});
    }

    return fc;
}

Netlist to_netlist(const FlatCircuit& fc) {
    Netlist nl;
    nl.name = fc.name;
    // input entries first so entry order is stable
    for (const auto& in : fc.inputs) {
        NetEntry e;
        e.name = in.name;
        e.kind = ComponentKind::make_input(in.drive);
        nl.entries.push_back(std::move(e));
    }
    for (const auto& c : fc.components) {
        NetEntry e;
        e.name = c.name;
        e.kind = c.kind;
        e.inputs.resize(c.kind.n_inputs(), SourceRef::unconnected());
        nl.entries.push_back(std::move(e));
    }
    int n_inputs = static_cast<int>(fc.inputs.size());
    auto comp_entry = [&](int ci) -> NetEntry& { return nl.entries[n_inputs + ci]; };
    for (const auto& conn : fc.connections)
        comp_entry(conn.to_comp).inputs[conn.to_port] =
            SourceRef::from_port(fc.components[conn.from_comp].name, conn.from_port);
    for (int i = 0; i < n_inputs; ++i) {
        const auto& in = fc.inputs[i];
        if (in.to_comp >= 0)
            comp_entry(in.to_comp).inputs[in.to_port] = SourceRef::from_port(in.name, 0);
    }
    for (const auto& o : fc.outputs)
        nl.outputs.push_back({o.name, fc.components[o.from_comp].name, o.from_port});
    return nl;
}

std::string CircuitReport::to_text() const {
    std::ostringstream os;
    os << "counts:\n";
    for (const auto& [k, v] : counts) os << "  " << k << ": " << v << "\n";
    if (violations.empty()) {
        os << "violations: none\n";
    } else {
        os << "violations (" << violations.size() << "):\n";
        for (const auto& v : violations) os << "  " << v << "\n";
    }
    return os.str();
}

CircuitReport check_circuit(const FlatCircuit& fc) {
    CircuitReport rep;
    auto& c = rep.counts;
    c["resonator"] = c["beamsplitter"] = c["phaseshifter"] = c["displacement"] =
        c["identity"] = 0;
    for (const auto& comp : fc.components) ++c[kind_name(comp.kind.tag)];
    int vac = 0, driven = 0;
    for (const auto& in : fc.inputs) (in.is_vacuum() ? vac : driven)++;
    c["vacuum_input"] = vac;
    c["driven_input"] = driven;
    c["output"] = static_cast<int>(fc.outputs.size());

    // every component output must be consumed exactly once (connection or output decl)
    std::map<std::pair<int, int>, int> consumed;
    for (const auto& conn : fc.connections) consumed[{conn.from_comp, conn.from_port}]++;
    for (const auto& o : fc.outputs) consumed[{o.from_comp, o.from_port}]++;
    for (size_t i = 0; i < fc.components.size(); ++i) {
        int arity = fc.components[i].kind.n_outputs();
        for (int p = 0; p < arity; ++p) {
            auto it = consumed.find({static_cast<int>(i), p});
            int n = it == consumed.end() ? 0 : it->second;
            if (n == 0)
                rep.violations.push_back("dangling output " + fc.components[i].name + "." +
                                         std::to_string(p));
            else if (n > 1)
                rep.violations.push_back("output " + fc.components[i].name + "." +
                                         std::to_string(p) + " consumed " + std::to_string(n) +
                                         " times");
        }
    }
    for (const auto& in : fc.inputs)
        if (in.to_comp < 0) rep.violations.push_back("unused external input " + in.name);

    // input ports: every port must have exactly one feeder
    std::map<std::pair<int, int>, int> fed;
    for (const auto& conn : fc.connections) fed[{conn.to_comp, conn.to_port}]++;
    for (const auto& in : fc.inputs)
        if (in.to_comp >= 0) fed[{in.to_comp, in.to_port}]++;
    for (size_t i = 0; i < fc.components.size(); ++i) {
        int arity = fc.components[i].kind.n_inputs();
        for (int p = 0; p < arity; ++p) {
            int n = fed.count({static_cast<int>(i), p}) ? fed[{static_cast<int>(i), p}] : 0;
            if (n != 1)
                rep.violations.push_back("input port " + fc.components[i].name + "." +
                                         std::to_string(p) + " has " + std::to_string(n) +
                                         " feeders");
        }
    }
    return rep;
}

} // namespace kerrsim

#include "kerrsim/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

#include "kerrsim/textutil.hpp"

namespace kerrsim {

double ResonatorParams::total_kappa() const {
    double k = 0;
    for (const auto& c : couplings) k += c.kappa;
    return k;
}

int ComponentKind::n_inputs() const {
    switch (tag) {
        case Tag::Resonator: return static_cast<int>(resonator.couplings.size());
        case Tag::Beamsplitter: return 2;
        case Tag::Phaseshifter:
        case Tag::Displacement:
        case Tag::Identity: return 1;
        case Tag::Input: return 0;
        case Tag::Compound: return -1;
    }
    return -1;
}

int ComponentKind::n_outputs() const {
    switch (tag) {
        case Tag::Resonator: return static_cast<int>(resonator.couplings.size());
        case Tag::Beamsplitter: return 2;
        case Tag::Phaseshifter:
        case Tag::Displacement:
        case Tag::Identity:
        case Tag::Input: return 1;
        case Tag::Compound: return -1;
    }
    return -1;
}

ComponentKind ComponentKind::make_resonator(ResonatorParams p) {
    ComponentKind k;
    k.tag = Tag::Resonator;
    k.resonator = std::move(p);
    return k;
}
ComponentKind ComponentKind::make_beamsplitter(double theta) {
    ComponentKind k;
    k.tag = Tag::Beamsplitter;
    k.theta = theta;
    return k;
}
ComponentKind ComponentKind::make_phaseshifter(double phi) {
    ComponentKind k;
    k.tag = Tag::Phaseshifter;
    k.phi = phi;
    return k;
}
ComponentKind ComponentKind::make_displacement(Complex beta0) {
    ComponentKind k;
    k.tag = Tag::Displacement;
    k.beta0 = beta0;
    return k;
}
ComponentKind ComponentKind::make_identity() {
    ComponentKind k;
    k.tag = Tag::Identity;
    return k;
}
ComponentKind ComponentKind::make_input(std::string drive) {
    ComponentKind k;
    k.tag = Tag::Input;
    k.drive = std::move(drive);
    return k;
}
ComponentKind ComponentKind::make_compound(std::string defname) {
    ComponentKind k;
    k.tag = Tag::Compound;
    k.compound = std::move(defname);
    return k;
}

const char* kind_name(ComponentKind::Tag tag) {
    switch (tag) {
        case ComponentKind::Tag::Resonator: return "resonator";
        case ComponentKind::Tag::Beamsplitter: return "beamsplitter";
        case ComponentKind::Tag::Phaseshifter: return "phaseshifter";
        case ComponentKind::Tag::Displacement: return "displacement";
        case ComponentKind::Tag::Identity: return "identity";
        case ComponentKind::Tag::Input: return "input";
        case ComponentKind::Tag::Compound: return "compound";
    }
    return "?";
}

const NetEntry* Netlist::find_entry(std::string_view n) const {
    for (const auto& e : entries)
        if (e.name == n) return &e;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Tokenizer {
    std::vector<std::string> tokens;
    int line;
};

bool is_reserved_kind(const std::string& s) {
    return s == "resonator" || s == "beamsplitter" || s == "phaseshifter" ||
           s == "displacement" || s == "identity" || s == "input";
}

void check_name(const std::string& name, int line) {
    if (name.empty()) throw ParseError("empty name", line, 1);
    // '.' is permitted: flattened netlists use path-joined instance names.
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '=' ||
            c == '{' || c == '}')
            throw ParseError("invalid character in name '" + name + "'", line, 1);
    }
}

double require_double(const std::map<std::string, std::string>& kv, const std::string& key,
                      int line) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing parameter '" + key + "'", line, 1);
    auto v = parse_complex(it->second);
    if (!v || v->imag() != 0.0)
        throw ParseError("parameter '" + key + "' must be real", line, 1);
    return v->real();
}

SourceRef parse_source(const std::string& tok, int line) {
    if (tok == "vacuum") return SourceRef::vacuum();
    if (tok == "_") return SourceRef::unconnected();
    if (tok.rfind("input:", 0) == 0) {
        std::string d = tok.substr(6);
        check_name(d, line);
        return SourceRef::drive(d);
    }
    if (tok.rfind("port:", 0) == 0) {
        auto v = parse_complex(tok.substr(5));
        if (!v || v->imag() != 0.0 || v->real() < 0 || v->real() != static_cast<int>(v->real()))
            throw ParseError("bad compound port index in '" + tok + "'", line, 1);
        return SourceRef::compound_port(static_cast<int>(v->real()));
    }
    auto dot = tok.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == tok.size())
        throw ParseError("bad source reference '" + tok + "' (expected inst.port)", line, 1);
    std::string inst = tok.substr(0, dot);
    std::string portstr = tok.substr(dot + 1);
    for (char c : portstr)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError("bad port index in '" + tok + "'", line, 1);
    return SourceRef::from_port(inst, std::stoi(portstr));
}

NetEntry parse_comp_line(const std::vector<std::string>& toks, int line, bool in_compound) {
    if (toks.size() < 3) throw ParseError("expected: comp <name> <kind> ...", line, 1);
    NetEntry e;
    e.name = toks[1];
    check_name(e.name, line);
    const std::string& kindstr = toks[2];

    std::map<std::string, std::string> kv;
    std::vector<SourceRef> inputs;
    bool have_in = false;
    for (size_t i = 3; i < toks.size(); ++i) {
        auto eq = toks[i].find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key=value, got '" + toks[i] + "'", line, 1);
        std::string key = toks[i].substr(0, eq);
        std::string val = toks[i].substr(eq + 1);
        if (key == "in") {
            have_in = true;
            if (!val.empty())
                for (const auto& s : split(val, ','))
                    inputs.push_back(parse_source(s, line));
        } else {
            if (!kv.emplace(key, val).second)
                throw ParseError("duplicate parameter '" + key + "'", line, 1);
        }
    }
    (void)have_in;

    if (kindstr == "resonator") {
        ResonatorParams p;
        p.delta = require_double(kv, "delta", line);
        p.chi = require_double(kv, "chi", line);
        auto it = kv.find("kappa");
        if (it == kv.end()) throw ParseError("resonator needs kappa=...", line, 1);
        std::vector<double> kappas, psis;
        for (const auto& s : split(it->second, ',')) {
            auto v = parse_complex(s);
            if (!v || v->imag() != 0.0) throw ParseError("bad kappa list", line, 1);
            kappas.push_back(v->real());
        }
        if (auto ip = kv.find("psi"); ip != kv.end()) {
            for (const auto& s : split(ip->second, ',')) {
                auto v = parse_complex(s);
                if (!v || v->imag() != 0.0) throw ParseError("bad psi list", line, 1);
                psis.push_back(v->real());
            }
            if (psis.size() != kappas.size())
                throw ParseError("psi list length must match kappa list", line, 1);
        }
        for (size_t j = 0; j < kappas.size(); ++j) {
            ResonatorCoupling c;
            c.kappa = kappas[j];
            if (!psis.empty()) c.psi = psis[j];
            p.couplings.push_back(c);
        }
        e.kind = ComponentKind::make_resonator(std::move(p));
    } else if (kindstr == "beamsplitter") {
        e.kind = ComponentKind::make_beamsplitter(require_double(kv, "theta", line));
    } else if (kindstr == "phaseshifter") {
        e.kind = ComponentKind::make_phaseshifter(require_double(kv, "phi", line));
    } else if (kindstr == "displacement") {
        auto it = kv.find("beta0");
        if (it == kv.end()) throw ParseError("displacement needs beta0=...", line, 1);
        auto v = parse_complex(it->second);
        if (!v) throw ParseError("bad beta0 value", line, 1);
        e.kind = ComponentKind::make_displacement(*v);
    } else if (kindstr == "identity") {
        e.kind = ComponentKind::make_identity();
    } else if (kindstr == "input") {
        std::string d;
        if (auto it = kv.find("drive"); it != kv.end()) {
            d = it->second;
            check_name(d, line);
        }
        e.kind = ComponentKind::make_input(d);
        if (!inputs.empty()) throw ParseError("input components take no in= list", line, 1);
    } else {
        check_name(kindstr, line);
        e.kind = ComponentKind::make_compound(kindstr);
    }

    if (!in_compound)
        for (const auto& s : inputs)
            if (s.tag == SourceRef::Tag::CompoundPort)
                throw ParseError("port:<j> sources are only valid inside compound definitions",
                                 line, 1);
    e.inputs = std::move(inputs);
    return e;
}

OutputDecl parse_output_line(const std::vector<std::string>& toks, int line) {
    // output <name> from <inst>.<port>
    if (toks.size() != 4 || toks[2] != "from")
        throw ParseError("expected: output <name> from <inst>.<port>", line, 1);
    OutputDecl o;
    o.name = toks[1];
    check_name(o.name, line);
    SourceRef s = parse_source(toks[3], line);
    if (s.tag != SourceRef::Tag::Port)
        throw ParseError("output must come from an instance port", line, 1);
    o.instance = s.name;
    o.port = s.port;
    return o;
}

} // namespace

Netlist parse_netlist(std::string_view text) {
    Netlist nl;
    std::istringstream in{std::string(text)};
    std::string rawline;
    int lineno = 0;
    CompoundDef* open_def = nullptr;

    std::set<std::string> top_names;
    std::set<std::string> def_names;

    while (std::getline(in, rawline)) {
        ++lineno;
        auto hash = rawline.find('#');
        if (hash != std::string::npos) rawline.erase(hash);
        std::istringstream ls(rawline);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (toks.empty()) continue;

        if (toks[0] == "}") {
            if (!open_def) throw ParseError("unmatched '}'", lineno, 1);
            if (toks.size() != 1) throw ParseError("trailing tokens after '}'", lineno, 1);
            open_def = nullptr;
            continue;
        }

        if (toks[0] == "compound") {
            if (open_def) throw ParseError("nested compound definitions are not allowed",
                                           lineno, 1);
            // compound <name> ports in=<k> out=<m> {
            if (toks.size() != 6 || toks[2] != "ports" || toks[5] != "{")
                throw ParseError("expected: compound <name> ports in=<k> out=<m> {", lineno, 1);
            CompoundDef def;
            def.name = toks[1];
            check_name(def.name, lineno);
            if (is_reserved_kind(def.name) || def.name == "output" || def.name == "comp")
                throw ParseError("compound name '" + def.name + "' is reserved", lineno, 1);
            auto parse_count = [&](const std::string& tok, const char* key) {
                if (tok.rfind(std::string(key) + "=", 0) != 0)
                    throw ParseError(std::string("expected ") + key + "=<count>", lineno, 1);
                auto v = parse_complex(tok.substr(std::string(key).size() + 1));
                if (!v || v->imag() != 0.0 || v->real() < 0 ||
                    v->real() != static_cast<int>(v->real()))
                    throw ParseError("bad port count", lineno, 1);
                return static_cast<int>(v->real());
            };
            def.n_in = parse_count(toks[3], "in");
            def.n_out = parse_count(toks[4], "out");
            if (!def_names.insert(def.name).second)
                throw ParseError("duplicate compound definition '" + def.name + "'", lineno, 1);
            open_def = &nl.compounds.emplace(def.name, std::move(def)).first->second;
            open_def->outputs.resize(open_def->n_out, {"", -1});
            continue;
        }

        if (toks[0] == "comp") {
            NetEntry e = parse_comp_line(toks, lineno, open_def != nullptr);
            if (open_def) {
                for (const auto& prev : open_def->entries)
                    if (prev.name == e.name)
                        throw ParseError("duplicate instance name '" + e.name + "'", lineno, 1);
                open_def->entries.push_back(std::move(e));
            } else {
                if (!top_names.insert(e.name).second)
                    throw ParseError("duplicate instance name '" + e.name + "'", lineno, 1);
                nl.entries.push_back(std::move(e));
            }
            continue;
        }

        if (toks[0] == "output") {
            OutputDecl o = parse_output_line(toks, lineno);
            if (open_def) {
                // inside a compound, <name> is the output port index
                int idx = -1;
                try {
                    idx = std::stoi(o.name);
                } catch (...) {
                    throw ParseError("compound output name must be a port index", lineno, 1);
                }
                if (idx < 0 || idx >= open_def->n_out)
                    throw ParseError("compound output index out of range", lineno, 1);
                if (open_def->outputs[idx].second >= 0)
                    throw ParseError("compound output " + o.name + " declared twice", lineno, 1);
                open_def->outputs[idx] = {o.instance, o.port};
            } else {
                for (const auto& prev : nl.outputs)
                    if (prev.name == o.name)
                        throw ParseError("duplicate output name '" + o.name + "'", lineno, 1);
                nl.outputs.push_back(std::move(o));
            }
            continue;
        }

        if (toks[0] == "circuit") {
            if (toks.size() != 2) throw ParseError("expected: circuit <name>", lineno, 1);
            check_name(toks[1], lineno);
            nl.name = toks[1];
            continue;
        }

        throw ParseError("unknown directive '" + toks[0] + "'", lineno, 1);
    }
    if (open_def)
        throw ParseError("unterminated compound definition '" + open_def->name + "'", lineno, 1);
    return nl;
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

namespace {

std::string source_str(const SourceRef& s) {
    switch (s.tag) {
        case SourceRef::Tag::Unconnected: return "_";
        case SourceRef::Tag::Vacuum: return "vacuum";
        case SourceRef::Tag::Drive: return "input:" + s.name;
        case SourceRef::Tag::Port: return s.name + "." + std::to_string(s.port);
        case SourceRef::Tag::CompoundPort: return "port:" + std::to_string(s.port);
    }
    return "?";
}

void write_entry(std::ostream& os, const NetEntry& e) {
    os << "comp " << e.name << " ";
    const auto& k = e.kind;
    switch (k.tag) {
        case ComponentKind::Tag::Resonator: {
            os << "resonator delta=" << format_double(k.resonator.delta)
               << " chi=" << format_double(k.resonator.chi) << " kappa=";
            for (size_t i = 0; i < k.resonator.couplings.size(); ++i)
                os << (i ? "," : "") << format_double(k.resonator.couplings[i].kappa);
            os << " psi=";
            for (size_t i = 0; i < k.resonator.couplings.size(); ++i)
                os << (i ? "," : "") << format_double(k.resonator.couplings[i].psi);
            break;
        }
        case ComponentKind::Tag::Beamsplitter:
            os << "beamsplitter theta=" << format_double(k.theta);
            break;
        case ComponentKind::Tag::Phaseshifter:
            os << "phaseshifter phi=" << format_double(k.phi);
            break;
        case ComponentKind::Tag::Displacement:
            os << "displacement beta0=" << format_complex(k.beta0);
            break;
        case ComponentKind::Tag::Identity: os << "identity"; break;
        case ComponentKind::Tag::Input:
            os << "input";
            if (!k.drive.empty()) os << " drive=" << k.drive;
            break;
        case ComponentKind::Tag::Compound: os << k.compound; break;
    }
    if (!e.inputs.empty()) {
        os << " in=";
        for (size_t i = 0; i < e.inputs.size(); ++i)
            os << (i ? "," : "") << source_str(e.inputs[i]);
    }
    os << "\n";
}

} // namespace

std::string serialize_netlist(const Netlist& nl) {
    std::ostringstream os;
    os << "circuit " << nl.name << "\n";
    for (const auto& [name, def] : nl.compounds) {
        os << "compound " << name << " ports in=" << def.n_in << " out=" << def.n_out << " {\n";
        for (const auto& e : def.entries) {
            os << "  ";
            write_entry(os, e);
        }
        for (int j = 0; j < def.n_out; ++j)
            os << "  output " << j << " from " << def.outputs[j].first << "."
               << def.outputs[j].second << "\n";
        os << "}\n";
    }
    for (const auto& e : nl.entries) write_entry(os, e);
    for (const auto& o : nl.outputs)
        os << "output " << o.name << " from " << o.instance << "." << o.port << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

const CompoundDef& resolve_compound(const Netlist& nl, const std::string& name) {
    auto it = nl.compounds.find(name);
    if (it == nl.compounds.end())
        throw ValidationError("unresolved compound reference '" + name + "'");
    return it->second;
}

void validate_scope(const Netlist& nl, const std::vector<NetEntry>& entries,
                    const std::vector<std::pair<std::string, int>>* exported, int n_in,
                    const std::vector<OutputDecl>* top_outputs, const std::string& scope) {
    std::map<std::string, const NetEntry*> by_name;
    for (const auto& e : entries) by_name[e.name] = &e;

    // consumption map for fan-out detection
    std::set<std::pair<std::string, int>> consumed;
    std::set<int> compound_ports_used;

    auto consume = [&](const SourceRef& s, const std::string& where) {
        if (s.tag == SourceRef::Tag::Port) {
            auto it = by_name.find(s.name);
            if (it == by_name.end())
                throw ValidationError(scope + ": unknown source instance '" + s.name + "' (" +
                                      where + ")");
            int arity = output_arity(nl, it->second->kind);
            if (s.port < 0 || s.port >= arity)
                throw ValidationError(scope + ": source port " + s.name + "." +
                                      std::to_string(s.port) + " out of range (" + where + ")");
            if (!consumed.insert({s.name, s.port}).second)
                throw ValidationError(scope + ": output " + s.name + "." +
                                      std::to_string(s.port) +
                                      " feeds more than one input (" + where +
                                      "); use an explicit fan-out component");
        } else if (s.tag == SourceRef::Tag::CompoundPort) {
            if (s.port < 0 || s.port >= n_in)
                throw ValidationError(scope + ": compound input index " +
                                      std::to_string(s.port) + " out of range");
            if (!compound_ports_used.insert(s.port).second)
                throw ValidationError(scope + ": compound input " + std::to_string(s.port) +
                                      " feeds more than one port; use an explicit fan-out");
        }
    };

    for (const auto& e : entries) {
        int arity = input_arity(nl, e.kind);
        if (static_cast<int>(e.inputs.size()) > arity)
            throw ValidationError(scope + ": '" + e.name + "' has " +
                                  std::to_string(e.inputs.size()) + " sources but only " +
                                  std::to_string(arity) + " input ports");
        for (const auto& s : e.inputs) consume(s, e.name);
    }
    if (exported) {
        for (size_t j = 0; j < exported->size(); ++j) {
            const auto& [inst, port] = (*exported)[j];
            if (port < 0)
                throw ValidationError(scope + ": compound output " + std::to_string(j) +
                                      " is not declared");
            consume(SourceRef::from_port(inst, port), "output " + std::to_string(j));
        }
    }
    if (top_outputs) {
        for (const auto& o : *top_outputs) consume(SourceRef::from_port(o.instance, o.port), o.name);
    }
}

} // namespace

int input_arity(const Netlist& nl, const ComponentKind& k) {
    if (k.tag == ComponentKind::Tag::Compound) return resolve_compound(nl, k.compound).n_in;
    return k.n_inputs();
}

int output_arity(const Netlist& nl, const ComponentKind& k) {
    if (k.tag == ComponentKind::Tag::Compound) return resolve_compound(nl, k.compound).n_out;
    return k.n_outputs();
}

void validate_netlist(const Netlist& nl) {
    // compound references resolve acyclically
    std::map<std::string, int> state; // 0 unvisited, 1 in progress, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& name) {
        int& st = state[name];
        if (st == 1) throw ValidationError("cyclic compound definition involving '" + name + "'");
        if (st == 2) return;
        st = 1;
        const CompoundDef& def = resolve_compound(nl, name);
        for (const auto& e : def.entries)
            if (e.kind.tag == ComponentKind::Tag::Compound) visit(e.kind.compound);
        st = 2;
    };
    for (const auto& [name, def] : nl.compounds) visit(name);

    for (const auto& [name, def] : nl.compounds)
        validate_scope(nl, def.entries, &def.outputs, def.n_in, nullptr, "compound " + name);
    validate_scope(nl, nl.entries, nullptr, 0, &nl.outputs, nl.name);

    // resonator parameter sanity
    std::function<void(const std::vector<NetEntry>&)> check_params =
        [&](const std::vector<NetEntry>& entries) {
            for (const auto& e : entries) {
                if (e.kind.tag != ComponentKind::Tag::Resonator) continue;
                const auto& p = e.kind.resonator;
                if (p.couplings.empty())
                    throw ValidationError("resonator '" + e.name + "' has no coupling ports");
                for (const auto& c : p.couplings)
                    if (c.kappa < 0)
                        throw ValidationError("resonator '" + e.name + "' has negative kappa");
                if (p.total_kappa() <= 0)
                    throw ValidationError("resonator '" + e.name + "' has zero total kappa");
            }
        };
    check_params(nl.entries);
    for (const auto& [name, def] : nl.compounds) check_params(def.entries);
}

} // namespace kerrsim

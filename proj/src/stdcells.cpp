#include "kerrsim/stdcells.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "kerrsim/errors.hpp"
#include "cell_params_data.hpp"

namespace kerrsim {

using json = nlohmann::json;

const std::string& cell_params_json() {
    static const std::string text = detail::kCellParamsJson;
    return text;
}

namespace {

const json& params() {
    static const json j = json::parse(cell_params_json());
    return j;
}

ComponentKind bs(double t) { return ComponentKind::make_beamsplitter(std::acos(t)); }
ComponentKind ps(double phi) { return ComponentKind::make_phaseshifter(phi); }

ComponentKind resonator(double delta, double chi, std::vector<double> kappas) {
    ResonatorParams p;
    p.delta = delta;
    p.chi = chi;
    for (double k : kappas) p.couplings.push_back({k, -kPi / 2});
    return ComponentKind::make_resonator(std::move(p));
}

/// Assembles one compound definition, tracking which instance outputs are
/// consumed so the rest can be exported in deterministic order.
struct Builder {
    Netlist& nl;
    CompoundDef def;
    std::set<std::pair<std::string, int>> consumed;
    std::vector<std::pair<std::string, int>> arity; // instance -> n outputs, in order

    Builder(Netlist& netlist, std::string name, int n_in) : nl(netlist) {
        def.name = std::move(name);
        def.n_in = n_in;
    }

    SourceRef use(SourceRef s) {
        if (s.tag == SourceRef::Tag::Port) consumed.insert({s.name, s.port});
        return s;
    }

    void add(const std::string& name, ComponentKind kind, std::vector<SourceRef> ins) {
        NetEntry e;
        e.name = name;
        int n_out;
        if (kind.tag == ComponentKind::Tag::Compound)
            n_out = nl.compounds.at(kind.compound).n_out;
        else
            n_out = kind.n_outputs();
        e.kind = std::move(kind);
        for (auto& s : ins) e.inputs.push_back(use(std::move(s)));
        def.entries.push_back(std::move(e));
        arity.emplace_back(name, n_out);
    }

    void exp(const std::string& inst, int port) {
        def.outputs.emplace_back(inst, port);
        consumed.insert({inst, port});
    }

    void finish() {
        for (const auto& [name, n_out] : arity)
            for (int p = 0; p < n_out; ++p)
                if (!consumed.count({name, p})) def.outputs.emplace_back(name, p);
        def.n_out = static_cast<int>(def.outputs.size());
        nl.compounds.emplace(def.name, def);
    }
};

SourceRef pp(int j) { return SourceRef::compound_port(j); }
SourceRef fp(const std::string& inst, int port) { return SourceRef::from_port(inst, port); }
SourceRef vac() { return SourceRef::vacuum(); }
SourceRef drv(const std::string& name) { return SourceRef::drive(name); }

std::vector<SourceRef> in2(SourceRef a, SourceRef b, bool swap) {
    if (swap) std::swap(a, b);
    return {std::move(a), std::move(b)};
}

int swapped(unsigned wiring, int bit, int port) {
    return ((wiring >> bit) & 1u) ? 1 - port : port;
}

} // namespace

namespace cells_detail {

// Output-phase restoration trims, folded into each cell's final phase
// shifter. The orientation reconstruction leaves a small residual phase on
// the logic-high output amplitude; cascaded cells interfere coherently, so
// the high level must come out phase-0. Values measured noise-free with
// phase-0 inputs at E_high = 50 (tools/cell_search.cpp).
inline constexpr double kAndOutTrim = -0.160;
inline constexpr double kFanoutOutTrim = -0.019;
inline constexpr double kLatchOutTrim = -0.272;

void add_and_gate(Netlist& nl, double e_high, unsigned w) {
    if (nl.compounds.count("and_gate")) return;
    const json& p = params().at("and_gate");
    double chi = p.at("chi_scale").get<double>() / (e_high * e_high);
    Builder b(nl, "and_gate", 2);
    b.add("bs1", bs(p.at("t1")), in2(pp(0), pp(1), (w >> 0) & 1));
    b.add("r",
          resonator(p.at("delta"), chi, {p.at("kappa1"), p.at("kappa2"), p.at("kappa3")}),
          {fp("bs1", swapped(w, 1, 0)), vac(), vac()});
    b.add("ps1", ps(p.at("phi1")), {fp("r", 0)});
    b.add("bs2", bs(p.at("t2")), in2(fp("ps1", 0), fp("r", 1), (w >> 2) & 1));
    b.add("ps2", ps(p.at("phi2").get<double>() + kAndOutTrim), {fp("bs2", swapped(w, 3, 0))});
    b.exp("ps2", 0);
    b.finish();
}

void add_fanout(Netlist& nl, double e_high, bool trimmed, unsigned w) {
    std::string name = trimmed ? "fanout_t" : "fanout";
    if (nl.compounds.count(name)) return;
    const json& p = params().at("fanout");
    double chi = p.at("chi_scale").get<double>() / (e_high * e_high);
    Builder b(nl, name, 1);
    b.add("bs1", bs(p.at("t1")), in2(pp(0), drv("fanout_bc"), (w >> 0) & 1));
    b.add("r",
          resonator(p.at("delta"), chi, {p.at("kappa1"), p.at("kappa2"), p.at("kappa3")}),
          {fp("bs1", swapped(w, 1, 0)), vac(), vac()});
    b.add("ps1", ps(p.at("phi1")), {fp("r", 0)});
    b.add("bs2", bs(p.at("t2")), in2(fp("ps1", 0), fp("r", 1), (w >> 2) & 1));
    b.add("ps2", ps(p.at("phi2").get<double>() + kFanoutOutTrim),
          {fp("bs2", swapped(w, 3, 0))});
    b.add("bs3", bs(p.at("t3")),
          in2(fp("ps2", 0), trimmed ? drv("trim") : vac(), (w >> 4) & 1));
    b.exp("bs3", swapped(w, 5, 0));
    b.exp("bs3", swapped(w, 5, 1));
    b.finish();
}

void add_latch(Netlist& nl, double e_high, unsigned w, unsigned variant) {
    if (nl.compounds.count("latch")) return;
    const json& p = params().at("latch");
    double chi = p.at("chi_scale").get<double>() / (e_high * e_high);
    std::vector<double> kappas = {p.at("kappa1"), p.at("kappa2"), p.at("kappa3")};
    double delta = p.at("delta");
    // variant bits:
    //   0-1 beta_c injection point; with mirror feedback (bit 5 set) the
    //       codes are 0/1 = free input-mixer port of side 1/2, 2/3 = free tap
    //       port of side 1/2; with mixer feedback (bit 5 clear) they are
    //       0/1 = free tap port of side 1/2, 2/3 = kappa_2 mirror of side 1/2
    //   2-3 phi_1 location (0 bias path, 1 set path, 2 reset path)
    //   4   swap the roles of t1 (input mixers) and t3 (output taps)
    //   5   feedback destination: 0 = second input-mixer port, 1 = the
    //       kappa_2 mirror input
    //   6-8 assignment of the tabulated t values to the mixer/tap/output
    //       roles (0 keeps the default in=t1, tap=t3, out=t2)
    unsigned inj = variant & 3u;
    unsigned phi1loc = (variant >> 2) & 3u;
    bool tswap = (variant >> 4) & 1u;
    bool fb_mirror = (variant >> 5) & 1u;
    unsigned tperm = (variant >> 6) & 7u;
    if (tperm == 0 && tswap) tperm = 1;
    double tv[3] = {p.at("t1").get<double>(), p.at("t2").get<double>(),
                    p.at("t3").get<double>()};
    // role order: {mixer, tap, output combiner}
    static constexpr int kTRoles[6][3] = {{0, 2, 1}, {2, 0, 1}, {0, 1, 2},
                                          {1, 0, 2}, {1, 2, 0}, {2, 1, 0}};
    const int* roles = kTRoles[tperm % 6];
    double t_in = tv[roles[0]];
    double t_tap = tv[roles[1]];
    double t_out = tv[roles[2]];

    Builder b(nl, "latch", 2);
    SourceRef bias = drv("latch_bc");
    SourceRef set_src = pp(0), reset_src = pp(1);
    if (phi1loc == 0) {
        b.add("psc", ps(p.at("phi1")), {bias});
        bias = fp("psc", 0);
    } else if (phi1loc == 1) {
        b.add("psc", ps(p.at("phi1")), {pp(0)});
        set_src = fp("psc", 0);
    } else {
        b.add("psc", ps(p.at("phi1")), {pp(1)});
        reset_src = fp("psc", 0);
    }
    // port assignments per side: mixer free port, kappa_2 mirror, tap free port
    auto at = [&](bool cond, SourceRef dflt) { return cond ? bias : dflt; };
    SourceRef mixer_free[2], mirror2[2], tap_free[2];
    for (int s = 0; s < 2; ++s) {
        std::string fb = "psfb" + std::to_string(2 - s); // feedback from the other side
        if (fb_mirror) {
            mixer_free[s] = at(inj == static_cast<unsigned>(s), vac());
            mirror2[s] = fp(fb, 0);
            tap_free[s] = at(inj == static_cast<unsigned>(2 + s), vac());
        } else {
            mixer_free[s] = fp(fb, 0);
            mirror2[s] = at(inj == static_cast<unsigned>(2 + s), vac());
            tap_free[s] = at(inj == static_cast<unsigned>(s), vac());
        }
    }
    b.add("bsin1", bs(t_in), in2(set_src, mixer_free[0], (w >> 0) & 1));
    b.add("r1", resonator(delta, chi, kappas),
          {fp("bsin1", swapped(w, 1, 0)), mirror2[0], vac()});
    b.add("tap1", bs(t_tap), in2(fp("r1", 1), tap_free[0], (w >> 4) & 1));
    b.add("psfb1", ps(p.at("phi3")), {fp("tap1", swapped(w, 5, 0))});
    b.add("bsin2", bs(t_in), in2(reset_src, mixer_free[1], (w >> 2) & 1));
    b.add("r2", resonator(delta, chi, kappas),
          {fp("bsin2", swapped(w, 3, 0)), mirror2[1], vac()});
    b.add("tap2", bs(t_tap), in2(fp("r2", 1), tap_free[1], (w >> 6) & 1));
    b.add("psfb2", ps(p.at("phi3")), {fp("tap2", swapped(w, 7, 0))});
    // combined final output
    b.add("bsout", bs(t_out),
          in2(fp("tap1", swapped(w, 5, 1)), fp("tap2", swapped(w, 7, 1)), (w >> 8) & 1));
    b.add("psout", ps(p.at("phi2").get<double>() + kLatchOutTrim),
          {fp("bsout", swapped(w, 9, 0))});
    b.exp("psout", 0);
    b.finish();
}

void add_amplifier_stage(Netlist& nl, int stage, bool inverting) {
    if (stage < 0 || stage > 3) throw ValidationError("amplifier stage index must be 0..3");
    std::string name = "amp" + std::to_string(stage) + (inverting ? "i" : "n");
    if (nl.compounds.count(name)) return;
    const json& amp = params().at("amplifier");
    const json& st = amp.at("stages").at(stage);
    const json& var = amp.at(inverting ? "inverting" : "noninverting");
    Builder b(nl, name, 1);
    // bs output 1 carries t*beta_in + r*beta_c, matching the designed
    // resonator drive levels
    b.add("bs", bs(amp.at("t")), {drv(name + "_bc"), pp(0)});
    b.add("r", resonator(st.at("delta"), amp.at("chi"), {st.at("kappa1"), st.at("kappa2")}),
          {fp("bs", 1), vac()});
    b.add("pso", ps(var.at("phi").at(stage)), {fp("r", 1)});
    b.exp("pso", 0);
    b.finish();
}

void add_dflipflop(Netlist& nl, double e_high) {
    if (nl.compounds.count("dflipflop")) return;
    add_and_gate(nl, e_high);
    add_fanout(nl, e_high, false);
    add_latch(nl, e_high);
    auto fanout = ComponentKind::make_compound("fanout");
    auto gate = ComponentKind::make_compound("and_gate");
    auto latch = ComponentKind::make_compound("latch");

    Builder b(nl, "dflipflop", 2); // port 0 = D, port 1 = clock
    // data path: f1 makes two copies of !D, f2 restores D
    b.add("f1", fanout, {pp(0)});
    b.add("f2", fanout, {fp("f1", 1)});
    // clock tree: two levels give clock x2 and !clock x2
    b.add("f3", fanout, {pp(1)});
    b.add("f4", fanout, {fp("f3", 0)});
    b.add("f5", fanout, {fp("f3", 1)});
    b.add("f6", fanout, {fp("f5", 0)});
    // gating ANDs
    b.add("a1", gate, {fp("f2", 0), fp("f4", 0)});  // D AND clock
    b.add("a2", gate, {fp("f1", 0), fp("f4", 1)});  // !D AND clock
    // inverters driving the master latch (NAND = AND + NOT)
    b.add("f9", fanout, {fp("a1", 0)});
    b.add("f10", fanout, {fp("a2", 0)});
    b.add("ml", latch, {fp("f9", 0), fp("f10", 0)});
    // master output path: f7/f8 give !M and M copies
    b.add("f7", fanout, {fp("ml", 0)});
    b.add("f8", fanout, {fp("f7", 1)});
    b.add("a3", gate, {fp("f8", 0), fp("f6", 0)});  // M AND !clock
    b.add("a4", gate, {fp("f7", 0), fp("f6", 1)});  // !M AND !clock
    b.add("f11", fanout, {fp("a3", 0)});
    b.add("f12", fanout, {fp("a4", 0)});
    b.add("sl", latch, {fp("f11", 0), fp("f12", 0)});
    b.exp("sl", 0); // output 0: Q
    b.exp("f8", 1); // output 1: M monitor
    b.finish();
}

void add_counter4(Netlist& nl, double e_high) {
    if (nl.compounds.count("counter4")) return;
    add_dflipflop(nl, e_high);
    add_fanout(nl, e_high, true);
    auto ff = ComponentKind::make_compound("dflipflop");
    auto fo = ComponentKind::make_compound("fanout");
    auto fot = ComponentKind::make_compound("fanout_t");

    Builder b(nl, "counter4", 1); // port 0 = clock
    for (int i = 1; i <= 4; ++i) {
        std::string s = std::to_string(i);
        SourceRef clock = i == 1 ? pp(0) : fp("g2_" + std::to_string(i - 1), 0);
        b.add("ff" + s, ff, {fp("g1_" + s, 0), clock});
        b.add("g1_" + s, fot, {fp("ff" + s, 0)});
        // the last stage's copy fanout keeps its free splitter port on vacuum
        b.add("g2_" + s, i < 4 ? fot : fo, {fp("g1_" + s, 1)});
    }
    for (int i = 1; i <= 4; ++i) b.exp("g2_" + std::to_string(i), 1); // outputs 0-3: bits
    b.finish();
}

} // namespace cells_detail

namespace {

Netlist finish_cell(Netlist nl, const std::string& defname,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& primary_outputs) {
    nl.name = defname;
    const CompoundDef& def = nl.compounds.at(defname);
    NetEntry inst;
    inst.name = "cell";
    inst.kind = ComponentKind::make_compound(defname);
    for (const auto& [entry_name, drive_label] : inputs) {
        NetEntry e;
        e.name = entry_name;
        e.kind = ComponentKind::make_input(drive_label);
        nl.entries.push_back(std::move(e));
        inst.inputs.push_back(SourceRef::from_port(entry_name, 0));
    }
    nl.entries.push_back(std::move(inst));
    for (int j = 0; j < def.n_out; ++j) {
        std::string name = j < static_cast<int>(primary_outputs.size())
                               ? primary_outputs[j]
                               : "w" + std::to_string(j - primary_outputs.size());
        nl.outputs.push_back({name, "cell", j});
    }
    return nl;
}

} // namespace

CellKind parse_cell_kind(std::string_view name) {
    if (name == "amplifier_stage" || name == "amplifier") return CellKind::AmplifierStage;
    if (name == "and_gate" || name == "and") return CellKind::AndGate;
    if (name == "fanout") return CellKind::Fanout;
    if (name == "latch") return CellKind::Latch;
    if (name == "dflipflop") return CellKind::DFlipFlop;
    if (name == "counter4" || name == "counter") return CellKind::Counter4;
    throw ValidationError("unknown cell kind '" + std::string(name) + "'");
}

const char* cell_kind_name(CellKind kind) {
    switch (kind) {
        case CellKind::AmplifierStage: return "amplifier_stage";
        case CellKind::AndGate: return "and_gate";
        case CellKind::Fanout: return "fanout";
        case CellKind::Latch: return "latch";
        case CellKind::DFlipFlop: return "dflipflop";
        case CellKind::Counter4: return "counter4";
    }
    return "?";
}

Netlist build_cell(const CellSpec& spec) {
    if (spec.kind != CellKind::AmplifierStage && !(spec.e_high > 0.0))
        throw ValidationError("E_high must be positive");
    Netlist nl;
    using namespace cells_detail;
    switch (spec.kind) {
        case CellKind::AmplifierStage: {
            add_amplifier_stage(nl, spec.stage, spec.inverting);
            std::string name = "amp" + std::to_string(spec.stage) + (spec.inverting ? "i" : "n");
            return finish_cell(std::move(nl), name, {{"in_sig", "in"}}, {"out"});
        }
        case CellKind::AndGate:
            add_and_gate(nl, spec.e_high);
            return finish_cell(std::move(nl), "and_gate", {{"in_a", "a"}, {"in_b", "b"}},
                               {"out"});
        case CellKind::Fanout:
            add_fanout(nl, spec.e_high, false);
            return finish_cell(std::move(nl), "fanout", {{"in_sig", "in"}}, {"out0", "out1"});
        case CellKind::Latch:
            add_latch(nl, spec.e_high);
            return finish_cell(std::move(nl), "latch", {{"in_set", "set"}, {"in_reset", "reset"}},
                               {"out"});
        case CellKind::DFlipFlop:
            add_dflipflop(nl, spec.e_high);
            return finish_cell(std::move(nl), "dflipflop",
                               {{"in_d", "d"}, {"in_clock", "clock"}}, {"q", "m"});
        case CellKind::Counter4:
            add_counter4(nl, spec.e_high);
            return finish_cell(std::move(nl), "counter4", {{"in_clock", "clock"}},
                               {"bit1", "bit2", "bit3", "bit4"});
    }
    throw ValidationError("unreachable cell kind");
}

DriveProgram cell_drives(const CellSpec& spec) {
    DriveProgram dp;
    double e = spec.e_high;
    auto fanout_bc = [&] {
        double s = params().at("fanout").at("beta_c_scale");
        dp.waveforms.emplace("fanout_bc", Waveform::constant(Complex(s * e, 0.0)));
    };
    auto latch_bc = [&] {
        const json& p = params().at("latch");
        double mag = p.at("beta_c_mag"), phi1 = p.at("phi1");
        // overall sign and trim fixed by the hold-state bistability search in
        // tools/cell_search.cpp: the trim centers the hold window on input
        // levels 46..57 so restored logic levels from upstream cells hold
        constexpr double kBiasTrim = 0.15;
        dp.waveforms.emplace(
            "latch_bc",
            Waveform::constant(-mag * e * std::exp(Complex(0.0, kBiasTrim - phi1))));
    };
    switch (spec.kind) {
        case CellKind::AmplifierStage: {
            const json& amp = params().at("amplifier");
            const json& var = amp.at(spec.inverting ? "inverting" : "noninverting");
            std::string name =
                "amp" + std::to_string(spec.stage) + (spec.inverting ? "i" : "n") + "_bc";
            dp.waveforms.emplace(
                name, Waveform::constant(Complex(var.at("beta_c").at(spec.stage), 0.0)));
            break;
        }
        case CellKind::AndGate: break;
        case CellKind::Fanout: fanout_bc(); break;
        case CellKind::Latch: latch_bc(); break;
        case CellKind::DFlipFlop:
            fanout_bc();
            latch_bc();
            break;
        case CellKind::Counter4:
            fanout_bc();
            latch_bc();
            dp.waveforms.emplace("trim", Waveform::constant(Complex(0.0, 0.0)));
            break;
    }
    return dp;
}

ClassicalResponse classical_response(const ResonatorParams& params, double kappa1,
                                     double beta_in1) {
    double kappa = params.total_kappa();
    double delta = params.delta, chi = params.chi;
    double a1 = kappa * kappa / 4.0 + delta * delta;
    double rhs = kappa1 * beta_in1 * beta_in1;

    ClassicalResponse out;
    if (chi == 0.0) {
        out.photon_numbers.push_back(rhs / a1);
        return out;
    }
    // 4 chi^2 n^3 + 4 delta chi n^2 + a1 n - rhs = 0, solved as the
    // eigenvalues of the monic companion matrix
    double a3 = 4.0 * chi * chi;
    double c2 = 4.0 * delta * chi / a3, c1 = a1 / a3, c0 = -rhs / a3;
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 2) = -c0;
    comp(1, 0) = 1.0;
    comp(1, 2) = -c1;
    comp(2, 1) = 1.0;
    comp(2, 2) = -c2;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
    double scale = std::max({1.0, std::abs(c0), std::abs(c1), std::abs(c2)});
    for (int i = 0; i < 3; ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        if (std::abs(z.imag()) > 1e-8 * scale) continue;
        double n = z.real();
        if (n < -1e-9) continue;
        out.photon_numbers.push_back(std::max(n, 0.0));
    }
    std::sort(out.photon_numbers.begin(), out.photon_numbers.end());
    // collapse numerically coincident roots
    auto last = std::unique(out.photon_numbers.begin(), out.photon_numbers.end(),
                            [&](double x, double y) { return std::abs(x - y) < 1e-6 * scale; });
    out.photon_numbers.erase(last, out.photon_numbers.end());
    out.bistable = out.photon_numbers.size() == 3;
    return out;
}

double switching_energy(double kappa, double kappa1, double chi) {
    if (!(kappa1 > 0.0)) throw ValidationError("kappa1 must be positive");
    if (chi == 0.0) throw ValidationError("chi must be nonzero");
    return kappa * kappa / (std::abs(chi) * kappa1);
}

} // namespace kerrsim

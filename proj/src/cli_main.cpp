// kerrsim command-line tool: check, cell, reduce, simulate, analyze, sweep.
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kerrsim/analysis.hpp"
#include "kerrsim/drives.hpp"
#include "kerrsim/errors.hpp"
#include "kerrsim/flatten.hpp"
#include "kerrsim/netlist.hpp"
#include "kerrsim/reduction.hpp"
#include "kerrsim/sde.hpp"
#include "kerrsim/stdcells.hpp"
#include "kerrsim/textutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kerrsim;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Write via a temporary file in the same directory, then rename.
void write_atomic(const fs::path& path, const std::string& content) {
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write file '" + tmp.string() + "'");
        out << content;
        if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string fnv1a64(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        write_atomic(out_path, content);
}

int default_workers() {
    if (const char* env = std::getenv("KERRSIM_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

CellSpec parse_cell_spec(const std::string& kind, double e_high, int stage, bool inverting) {
    CellSpec spec;
    spec.kind = parse_cell_kind(kind);
    spec.e_high = e_high;
    spec.stage = stage;
    spec.inverting = inverting;
    return spec;
}

// ---------------------------------------------------------------------------
// Trajectory CSV reading (for analyze)
// ---------------------------------------------------------------------------

struct TrajTable {
    std::vector<double> time;
    std::vector<std::string> names;           // signal names in column order
    std::vector<std::vector<Complex>> series; // one per name

    const std::vector<Complex>& get(const std::string& name) const {
        for (size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return series[j];
        std::string known;
        for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
        throw ValidationError("no column '" + name + "' in trajectory (have: " + known + ")");
    }
    std::vector<double> magnitude(const std::string& name) const {
        const auto& s = get(name);
        std::vector<double> m(s.size());
        for (size_t i = 0; i < s.size(); ++i) m[i] = std::abs(s[i]);
        return m;
    }
    std::vector<double> photon(const std::string& name) const {
        const auto& s = get(name);
        std::vector<double> m(s.size());
        for (size_t i = 0; i < s.size(); ++i) m[i] = std::norm(s[i]);
        return m;
    }
};

TrajTable read_traj_csv(const std::string& path) {
    std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty trajectory file '" + path + "'");
    std::vector<std::string> cols = split(line, ',');
    if (cols.empty() || cols[0] != "time")
        throw ValidationError("trajectory file '" + path + "' must start with a 'time' column");
    TrajTable t;
    // expect re(name),im(name) pairs after the time column
    for (size_t j = 1; j < cols.size(); j += 2) {
        const std::string& re = cols[j];
        if (j + 1 >= cols.size() || re.size() < 4 || re.compare(0, 3, "re(") != 0 ||
            re.back() != ')')
            throw ValidationError("malformed trajectory header column '" + re + "'");
        t.names.push_back(re.substr(3, re.size() - 4));
    }
    t.series.resize(t.names.size());
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f = split(line, ',');
        if (f.size() != cols.size())
            throw ParseError("wrong field count in trajectory row", lineno, 1);
        t.time.push_back(std::strtod(f[0].c_str(), nullptr));
        for (size_t j = 0; j < t.names.size(); ++j)
            t.series[j].emplace_back(std::strtod(f[1 + 2 * j].c_str(), nullptr),
                                     std::strtod(f[2 + 2 * j].c_str(), nullptr));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

json manifest_config(const SimConfig& cfg, int n_traj, const ReducedSystem& sys) {
    json j;
    j["dt"] = cfg.dt > 0 ? cfg.dt : default_dt(sys);
    j["t_max"] = cfg.t_max;
    j["seed"] = cfg.seed;
    j["avg_window"] = cfg.avg_window;
    j["noise"] = cfg.noise;
    j["kerr_minus_one"] = cfg.kerr_minus_one;
    j["trajectory_index"] = cfg.trajectory_index;
    j["n_trajectories"] = n_traj;
    return j;
}

void write_manifest(const fs::path& dir, json manifest,
                    const std::vector<std::pair<std::string, std::string>>& outputs,
                    double runtime_s) {
    manifest["tool"] = std::string("kerrsim ") + kVersion;
    manifest["runtime_seconds"] = runtime_s;
    json outs = json::array();
    for (const auto& [name, hash] : outputs) outs.push_back({{"file", name}, {"fnv1a64", hash}});
    manifest["outputs"] = outs;
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Subcommand bodies (throw on failure)
// ---------------------------------------------------------------------------

int cmd_check(const std::string& netlist_path) {
    Netlist nl = parse_netlist(read_file(netlist_path));
    validate_netlist(nl);
    FlatCircuit fc = flatten(nl);
    CircuitReport rep = check_circuit(fc);
    std::cout << rep.to_text();
    if (!rep.simulable()) {
        std::cerr << "error: validation: circuit is not simulable\n";
        return 3;
    }
    return 0;
}

int cmd_cell(const std::string& kind, double e_high, int stage, bool inverting,
             const std::string& out_path, const std::string& drives_path) {
    CellSpec spec = parse_cell_spec(kind, e_high, stage, inverting);
    Netlist nl = build_cell(spec);
    validate_netlist(nl);
    emit(out_path, serialize_netlist(nl));
    if (!drives_path.empty())
        write_atomic(drives_path, serialize_drive_program(cell_drives(spec)));
    return 0;
}

int cmd_reduce(const std::string& netlist_path, const std::string& out_path, bool backprop) {
    Netlist nl = parse_netlist(read_file(netlist_path));
    validate_netlist(nl);
    FlatCircuit fc = flatten(nl);
    ReducedSystem sys = backprop ? backprop_reduce(fc) : reduce(fc);
    emit(out_path, serialize_reduced(sys));
    return 0;
}

struct SimulateArgs {
    std::string netlist_path, drives_path, out_dir;
    double dt = 0.0, t_max = 1.0, avg = 0.0;
    uint64_t seed = 0;
    int n_traj = 1, workers = 0;
    bool no_noise = false, kerr_minus_one = false;
    std::vector<std::string> traces;
};

int cmd_simulate(const SimulateArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    std::string netlist_text = read_file(a.netlist_path);
    std::string drives_text = read_file(a.drives_path);
    Netlist nl = parse_netlist(netlist_text);
    validate_netlist(nl);
    ReducedSystem sys = reduce(flatten(nl));
    DriveProgram dp = parse_drive_program(drives_text);

    SimConfig cfg;
    cfg.dt = a.dt;
    cfg.t_max = a.t_max;
    cfg.seed = a.seed;
    cfg.avg_window = a.avg;
    cfg.noise = !a.no_noise;
    cfg.kerr_minus_one = a.kerr_minus_one;

    // split trace names into resonators and outputs; default: outputs only
    std::vector<std::string> res_sel, out_sel;
    if (a.traces.empty()) {
        out_sel = sys.output_names;
    } else {
        for (const auto& n : a.traces) {
            if (sys.state_index(n) >= 0)
                res_sel.push_back(n);
            else if (sys.output_index(n) >= 0)
                out_sel.push_back(n);
            else
                throw ValidationError("trace '" + n + "' is neither a resonator nor an output");
        }
        if (out_sel.empty() && res_sel.empty()) out_sel = sys.output_names;
    }

    int workers = a.workers > 0 ? a.workers : default_workers();
    std::vector<Trajectory> trajs = run_ensemble(sys, dp, cfg, a.n_traj, workers);

    fs::path dir(a.out_dir);
    fs::create_directories(dir);
    std::vector<std::pair<std::string, std::string>> outputs;
    for (int m = 0; m < a.n_traj; ++m) {
        std::string name;
        if (a.n_traj == 1) {
            name = "traj.csv";
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "traj_%03d.csv", m);
            name = buf;
        }
        std::string csv = trajectory_csv(trajs[m], sys, res_sel, out_sel);
        write_atomic(dir / name, csv);
        outputs.emplace_back(name, fnv1a64(csv));
    }

    json manifest;
    manifest["netlist"] = {{"path", a.netlist_path}, {"fnv1a64", fnv1a64(netlist_text)}};
    manifest["drives"] = {{"path", a.drives_path}, {"fnv1a64", fnv1a64(drives_text)}};
    manifest["config"] = manifest_config(cfg, a.n_traj, sys);
    json traces = json::array();
    for (const auto& n : res_sel) traces.push_back(n);
    for (const auto& n : out_sel) traces.push_back(n);
    manifest["traces"] = traces;
    double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, manifest, outputs, runtime);
    return 0;
}

struct AnalyzeArgs {
    std::string traj_path, out_path, col, stim, resp, clock;
    std::vector<std::string> bits;
    bool jumps = false, autocorr = false, hist = false, delay = false, counter = false;
    bool photon = false;
    double low = 0.0, high = 1.0, dwell = 0.0;
    double stim_low = 0.0, stim_high = 1.0, resp_low = 0.0, resp_high = 1.0;
    double e_high = 50.0, t_start = 0.0, smooth = 0.0;
    HistGrid grid;
};

int cmd_analyze(const AnalyzeArgs& a) {
    TrajTable t = read_traj_csv(a.traj_path);
    // complex-field boxcar filter for signal columns (not the clock): output
    // columns carry transmitted input noise that instantaneous samples
    // cannot average away
    auto mag = [&](const std::string& col) {
        if (a.smooth <= 0.0 || t.time.size() < 2) return t.magnitude(col);
        double dt = t.time[1] - t.time[0];
        int win = std::max(1, static_cast<int>(std::lround(a.smooth / dt)));
        return smoothed_magnitude(t.get(col), win);
    };
    std::ostringstream os;
    if (a.jumps) {
        if (a.col.empty()) throw ValidationError("--jumps requires --col");
        JumpConfig jc;
        jc.low = a.low;
        jc.high = a.high;
        jc.min_dwell = a.dwell;
        std::vector<double> series = a.photon ? t.photon(a.col) : mag(a.col);
        JumpStatistics js = detect_jumps(t.time, series, jc);
        os << js.to_text();
    } else if (a.autocorr) {
        if (a.col.empty()) throw ValidationError("--autocorr requires --col");
        if (t.time.size() < 2) throw ValidationError("trajectory too short");
        AutocorrFit fit = autocorr_rate(t.get(a.col), t.time[1] - t.time[0]);
        os << "rate " << format_double(fit.rate) << "\n"
           << "residual " << format_double(fit.residual) << "\n"
           << "accepted " << (fit.accepted ? 1 : 0) << "\n";
    } else if (a.hist) {
        if (a.col.empty()) throw ValidationError("--hist requires --col");
        FieldHistogram h(a.grid);
        for (Complex z : t.get(a.col)) h.add(z);
        os << "# field histogram of " << a.col << ", log10(1+count)\n"
           << "# re: [" << format_double(a.grid.re_min) << ", " << format_double(a.grid.re_max)
           << "] x " << a.grid.n_re << "\n"
           << "# im: [" << format_double(a.grid.im_min) << ", " << format_double(a.grid.im_max)
           << "] x " << a.grid.n_im << "\n"
           << "# samples " << h.total << " overflow " << h.overflow << "\n"
           << h.to_text(true);
    } else if (a.delay) {
        if (a.stim.empty() || a.resp.empty())
            throw ValidationError("--delay requires --stim and --resp");
        auto meas = measure_delay(t.time, mag(a.stim), mag(a.resp), a.stim_low,
                                  a.stim_high, a.resp_low, a.resp_high);
        os << "edge_time,direction,tau,measurable\n";
        double sum = 0.0;
        int n = 0;
        for (const auto& m : meas) {
            os << format_double(m.edge_time) << "," << (m.rising ? "rise" : "fall") << ","
               << format_double(m.tau) << "," << (m.measurable ? 1 : 0) << "\n";
            if (m.measurable) {
                sum += m.tau;
                ++n;
            }
        }
        os << "# mean_tau " << format_double(n ? sum / n : 0.0) << " over " << n << " edges\n";
    } else if (a.counter) {
        if (a.bits.size() != 4 || a.clock.empty())
            throw ValidationError("--counter requires --clock and exactly four --bit columns");
        std::array<std::vector<double>, 4> bits;
        for (int j = 0; j < 4; ++j) bits[j] = mag(a.bits[j]);
        CounterErrors ce =
            counter_error_rate(t.time, bits, t.magnitude(a.clock), a.e_high, a.t_start);
        os << "checks " << ce.n_checks << "\n"
           << "errors " << ce.n_errors << "\n"
           << "undecodable " << ce.n_undecodable << "\n"
           << "t_observed " << format_double(ce.t_observed) << "\n"
           << "rate " << format_double(ce.rate) << "\n";
        for (double et : ce.error_times) os << "error_at " << format_double(et) << "\n";
    } else {
        throw ValidationError(
            "analyze needs one of --jumps, --autocorr, --hist, --delay, --counter");
    }
    emit(a.out_path, os.str());
    return 0;
}

struct SweepArgs {
    std::string cell = "latch";
    std::vector<double> e_highs;
    double t_max = 100.0, dt = 0.0, avg = 0.0;
    uint64_t seed = 0;
    int n_traj = 1, workers = 0;
    std::string out_dir;
};

/// Noise-free hold-state levels of the first latch resonator: drive the cell
/// into each state, then let it settle in the hold condition.
static std::pair<double, double> latch_hold_levels(const ReducedSystem& sys,
                                                   const DriveProgram& aux, double e_high) {
    auto settle_after = [&](bool set_state) {
        DriveProgram dp = aux;
        double t_pulse = 1.5;
        if (set_state) {
            dp.waveforms.emplace("set", Waveform::piecewise({{0.0, 0.0}, {t_pulse, e_high}}));
            dp.waveforms.emplace("reset", Waveform::constant(e_high));
        } else {
            dp.waveforms.emplace("set", Waveform::constant(e_high));
            dp.waveforms.emplace("reset", Waveform::piecewise({{0.0, 0.0}, {t_pulse, e_high}}));
        }
        SimConfig cfg;
        cfg.t_max = 2 * t_pulse;
        cfg.noise = false;
        Trajectory tr = run_trajectory(sys, dp, cfg);
        return std::norm(tr.alpha(tr.n_samples() - 1, 0));
    };
    double a = settle_after(true), b = settle_after(false);
    return {std::min(a, b), std::max(a, b)};
}

int cmd_sweep(const SweepArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    if (a.cell != "latch") throw ValidationError("sweep currently supports --cell latch");
    if (a.e_highs.empty()) throw ValidationError("sweep needs a non-empty --ehigh-list");
    fs::path dir(a.out_dir);
    fs::create_directories(dir);

    std::ostringstream os;
    os << "e_high,n_low,n_high,n_up,n_down,time_low,time_high,r_up,r_down,err_up,err_down\n";
    for (double e : a.e_highs) {
        CellSpec spec;
        spec.kind = CellKind::Latch;
        spec.e_high = e;
        ReducedSystem sys = reduce(flatten(build_cell(spec)));
        DriveProgram aux = cell_drives(spec);
        auto [n_low, n_high] = latch_hold_levels(sys, aux, e);

        DriveProgram dp = aux;
        dp.waveforms.emplace("set", Waveform::constant(e));
        dp.waveforms.emplace("reset", Waveform::constant(e));
        SimConfig cfg;
        cfg.dt = a.dt;
        cfg.t_max = a.t_max;
        cfg.seed = a.seed;
        cfg.avg_window = a.avg;
        int workers = a.workers > 0 ? a.workers : default_workers();
        std::vector<Trajectory> trajs = run_ensemble(sys, dp, cfg, a.n_traj, workers);

        JumpConfig jc;
        jc.low = n_low;
        jc.high = n_high;
        JumpStatistics total;
        int64_t n_up = 0, n_down = 0;
        double time_low = 0.0, time_high = 0.0;
        for (const Trajectory& tr : trajs) {
            std::vector<double> series(tr.n_samples());
            for (int n = 0; n < tr.n_samples(); ++n) series[n] = std::norm(tr.alpha(n, 0));
            JumpStatistics js = detect_jumps(tr.time, series, jc);
            n_up += js.n_up;
            n_down += js.n_down;
            time_low += js.time_low;
            time_high += js.time_high;
        }
        double r_up = time_low > 0 ? n_up / time_low : 0.0;
        double r_down = time_high > 0 ? n_down / time_high : 0.0;
        double err_up = time_low > 0 ? std::sqrt(static_cast<double>(n_up)) / time_low : 0.0;
        double err_down =
            time_high > 0 ? std::sqrt(static_cast<double>(n_down)) / time_high : 0.0;
        os << format_double(e) << "," << format_double(n_low) << "," << format_double(n_high)
           << "," << n_up << "," << n_down << "," << format_double(time_low) << ","
           << format_double(time_high) << "," << format_double(r_up) << ","
           << format_double(r_down) << "," << format_double(err_up) << ","
           << format_double(err_down) << "\n";
    }
    std::string table = os.str();
    write_atomic(dir / "rates.csv", table);

    json manifest;
    manifest["sweep"] = {{"cell", a.cell}, {"e_high", a.e_highs}};
    json cfgj;
    cfgj["dt"] = a.dt;
    cfgj["t_max"] = a.t_max;
    cfgj["seed"] = a.seed;
    cfgj["avg_window"] = a.avg;
    cfgj["n_trajectories"] = a.n_traj;
    manifest["config"] = cfgj;
    double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, manifest, {{"rates.csv", fnv1a64(table)}}, runtime);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kerrsim: semiclassical simulator for Kerr-nonlinear photonic circuits"};
    app.set_version_flag("--version", std::string("kerrsim ") + kVersion);
    app.require_subcommand(1);

    // check
    std::string check_netlist;
    auto* c_check = app.add_subcommand("check", "Validate a netlist and report statistics");
    c_check->add_option("netlist", check_netlist, "netlist file")->required();

    // cell
    std::string cell_kind, cell_out, cell_drives_out;
    double cell_ehigh = 50.0;
    int cell_stage = 0;
    bool cell_inverting = false;
    auto* c_cell = app.add_subcommand("cell", "Emit a standard cell as a netlist");
    c_cell->add_option("kind", cell_kind,
                       "amplifier|and|fanout|latch|dflipflop|counter")->required();
    c_cell->add_option("--ehigh", cell_ehigh, "logic-high amplitude E_high");
    c_cell->add_option("--stage", cell_stage, "amplifier stage index 0..3");
    c_cell->add_flag("--inverting", cell_inverting, "inverting amplifier variant");
    c_cell->add_option("-o,--output", cell_out, "output netlist path (default stdout)");
    c_cell->add_option("--drives-out", cell_drives_out, "also write the auxiliary drive program");

    // reduce
    std::string reduce_netlist, reduce_out;
    bool reduce_backprop = false;
    auto* c_reduce = app.add_subcommand("reduce", "Compile a netlist to a reduced system");
    c_reduce->add_option("netlist", reduce_netlist, "netlist file")->required();
    c_reduce->add_option("-o,--output", reduce_out, "output path (default stdout)");
    c_reduce->add_flag("--backprop", reduce_backprop,
                       "use the back-propagation compiler (loop-free circuits only)");

    // simulate
    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Integrate the stochastic field equations");
    c_sim->add_option("netlist", sim.netlist_path, "netlist file")->required();
    c_sim->add_option("--drives", sim.drives_path, "drive-program file")->required();
    c_sim->add_option("--dt", sim.dt, "time step (default 0.025/max{Delta,kappa})");
    c_sim->add_option("--tmax", sim.t_max, "integration time")->required();
    c_sim->add_option("--seed", sim.seed, "random seed");
    c_sim->add_option("--avg", sim.avg, "output averaging window");
    c_sim->add_option("--trace", sim.traces, "resonator/output names to record");
    c_sim->add_option("--ntraj", sim.n_traj, "number of trajectories");
    c_sim->add_option("--workers", sim.workers, "worker threads (default $KERRSIM_WORKERS)");
    c_sim->add_flag("--no-noise", sim.no_noise, "disable vacuum noise");
    c_sim->add_flag("--kerr-minus-one", sim.kerr_minus_one,
                    "use the |alpha|^2 - 1 Kerr detuning form");
    c_sim->add_option("-o,--output", sim.out_dir, "output directory")->required();
    c_sim->set_config("--config");

    // analyze
    AnalyzeArgs an;
    auto* c_an = app.add_subcommand("analyze", "Post-process a trajectory CSV");
    c_an->add_option("trajectory", an.traj_path, "trajectory CSV")->required();
    c_an->add_flag("--jumps", an.jumps, "jump statistics");
    c_an->add_flag("--autocorr", an.autocorr, "autocorrelation decay rate");
    c_an->add_flag("--hist", an.hist, "2D field histogram");
    c_an->add_flag("--delay", an.delay, "propagation delay");
    c_an->add_flag("--counter", an.counter, "counter error rate");
    c_an->add_option("--col", an.col, "signal column name");
    c_an->add_flag("--photon", an.photon, "use photon number |z|^2 instead of |z|");
    c_an->add_option("--low", an.low, "low-state level");
    c_an->add_option("--high", an.high, "high-state level");
    c_an->add_option("--dwell", an.dwell, "debounce dwell time");
    c_an->add_option("--stim", an.stim, "stimulus column (--delay)");
    c_an->add_option("--resp", an.resp, "response column (--delay)");
    c_an->add_option("--stim-low", an.stim_low);
    c_an->add_option("--stim-high", an.stim_high);
    c_an->add_option("--resp-low", an.resp_low);
    c_an->add_option("--resp-high", an.resp_high);
    c_an->add_option("--clock", an.clock, "clock column (--counter)");
    c_an->add_option("--bit", an.bits, "bit columns, LSB first (--counter, repeat 4x)");
    c_an->add_option("--ehigh", an.e_high, "logic-high amplitude (--counter)");
    c_an->add_option("--tstart", an.t_start, "ignore samples before this time (--counter)");
    c_an->add_option("--smooth", an.smooth,
                     "complex-field averaging window for signal columns (time units)");
    c_an->add_option("--re-min", an.grid.re_min);
    c_an->add_option("--re-max", an.grid.re_max);
    c_an->add_option("--im-min", an.grid.im_min);
    c_an->add_option("--im-max", an.grid.im_max);
    c_an->add_option("--n-re", an.grid.n_re);
    c_an->add_option("--n-im", an.grid.n_im);
    c_an->add_option("-o,--output", an.out_path, "output path (default stdout)");

    // sweep
    SweepArgs sw;
    auto* c_sw = app.add_subcommand("sweep", "Jump-rate sweep over E_high for a cell");
    c_sw->add_option("--cell", sw.cell, "cell kind (latch)");
    c_sw->add_option("--ehigh-list", sw.e_highs, "E_high values")
        ->required()
        ->delimiter(',');
    c_sw->add_option("--tmax", sw.t_max, "hold-condition observation time");
    c_sw->add_option("--dt", sw.dt, "time step override");
    c_sw->add_option("--avg", sw.avg, "output averaging window");
    c_sw->add_option("--seed", sw.seed, "random seed");
    c_sw->add_option("--ntraj", sw.n_traj, "trajectories per E_high");
    c_sw->add_option("--workers", sw.workers, "worker threads");
    c_sw->add_option("-o,--output", sw.out_dir, "output directory")->required();
    c_sw->set_config("--config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage errors -> exit 2
    }

    try {
        if (c_check->parsed()) return cmd_check(check_netlist);
        if (c_cell->parsed())
            return cmd_cell(cell_kind, cell_ehigh, cell_stage, cell_inverting, cell_out,
                            cell_drives_out);
        if (c_reduce->parsed()) return cmd_reduce(reduce_netlist, reduce_out, reduce_backprop);
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_an->parsed()) return cmd_analyze(an);
        if (c_sw->parsed()) return cmd_sweep(sw);
    } catch (const ParseError& e) {
        std::cerr << "error: parse: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "error: divergence: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

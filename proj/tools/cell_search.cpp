// Orientation search for the standard-cell beamsplitter wirings. Enumerates
// the port-swap masks, simulates each candidate noise-free, and scores it
// against the designed operating levels. The winning masks are frozen into
// stdcells.hpp.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <cstdio>
#include <vector>

#include "kerrsim/drives.hpp"
#include "kerrsim/flatten.hpp"
#include "kerrsim/reduction.hpp"
#include "kerrsim/sde.hpp"
#include "kerrsim/stdcells.hpp"

using namespace kerrsim;

static Netlist top_wrap(Netlist nl, const std::string& defname,
                        const std::vector<std::pair<std::string, std::string>>& ins) {
    const CompoundDef& def = nl.compounds.at(defname);
    NetEntry inst;
    inst.name = "cell";
    inst.kind = ComponentKind::make_compound(defname);
    for (auto& [n, d] : ins) {
        NetEntry e;
        e.name = n;
        e.kind = ComponentKind::make_input(d);
        nl.entries.push_back(e);
        inst.inputs.push_back(SourceRef::from_port(n, 0));
    }
    nl.entries.push_back(inst);
    for (int j = 0; j < def.n_out; ++j)
        nl.outputs.push_back({"o" + std::to_string(j), "cell", j});
    return nl;
}

struct Steady {
    CVector alpha;
    CVector out;
};

static Steady settle(const ReducedSystem& sys, const DriveProgram& dp, double t_max,
                     const CVector* init = nullptr) {
    SimConfig cfg;
    cfg.t_max = t_max;
    cfg.noise = false;
    if (init) cfg.alpha0 = *init;
    Trajectory tr = run_trajectory(sys, dp, cfg);
    Steady s;
    s.alpha = tr.alpha.row(tr.n_samples() - 1).transpose();
    s.out = tr.outputs.row(tr.n_samples() - 1).transpose();
    return s;
}

int main() {
    const double E = 50.0;

    // ---------------- AND gate ----------------
    printf("== and_gate ==\n");
    for (unsigned w = 0; w < 16; ++w) {
        Netlist nl;
        cells_detail::add_and_gate(nl, E, w);
        Netlist top = top_wrap(nl, "and_gate", {{"in_a", "a"}, {"in_b", "b"}});
        ReducedSystem sys;
        try {
            sys = reduce(flatten(top));
        } catch (const std::exception& e) {
            printf("w=%2u reduce failed: %s\n", w, e.what());
            continue;
        }
        double lev[4];
        double nres[4];
        int combo = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                DriveProgram dp;
                dp.waveforms.emplace("a", Waveform::constant(a ? E : 0.0));
                dp.waveforms.emplace("b", Waveform::constant(b ? E : 0.0));
                Steady s = settle(sys, dp, 3.0);
                lev[combo] = std::abs(s.out(0));
                nres[combo] = std::norm(s.alpha(0));
                ++combo;
            }
        bool good = lev[3] > 0.85 * E && lev[0] < 0.2 * E && lev[1] < 0.25 * E &&
                    lev[2] < 0.25 * E;
        printf("w=%2u out={%6.2f %6.2f %6.2f %6.2f} n={%7.2f %7.2f %7.2f %7.2f}%s\n", w,
               lev[0], lev[1], lev[2], lev[3], nres[0], nres[1], nres[2], nres[3],
               good ? "  <== GOOD" : "");
    }

    // ---------------- fanout ----------------
    printf("== fanout ==\n");
    for (unsigned w = 0; w < 64; ++w) {
        Netlist nl;
        cells_detail::add_fanout(nl, E, false, w);
        Netlist top = top_wrap(nl, "fanout", {{"in_sig", "in"}});
        ReducedSystem sys = reduce(flatten(top));
        DriveProgram base;
        base.waveforms.emplace("fanout_bc", Waveform::constant(-2.6 * E));
        double lo[2], hi[2], nlo, nhi;
        {
            DriveProgram dp = base;
            dp.waveforms.emplace("in", Waveform::constant(0.0));
            Steady s = settle(sys, dp, 3.0);
            lo[0] = std::abs(s.out(0));
            lo[1] = std::abs(s.out(1));
            nlo = std::norm(s.alpha(0));
        }
        {
            DriveProgram dp = base;
            dp.waveforms.emplace("in", Waveform::constant(E));
            Steady s = settle(sys, dp, 3.0);
            hi[0] = std::abs(s.out(0));
            hi[1] = std::abs(s.out(1));
            nhi = std::norm(s.alpha(0));
        }
        bool good = lo[0] > 0.9 * E && lo[1] > 0.9 * E && hi[0] < 0.2 * E && hi[1] < 0.2 * E;
        if (good || w < 8)
            printf("w=%2u in-low out={%6.2f %6.2f} n=%7.2f | in-high out={%6.2f %6.2f} "
                   "n=%7.2f%s\n",
                   w, lo[0], lo[1], nlo, hi[0], hi[1], nhi, good ? "  <== GOOD" : "");
    }

    // ---------------- latch ----------------
    printf("== latch ==\n");
    // schedule: set(set=0,reset=E) -> hold -> reset(set=E,reset=0) -> hold
    // expected photon numbers at the end of each phase:
    const double tgt1[4] = {0.45, 16.2, 151.0, 151.0};
    const double tgt2[4] = {151.0, 151.0, 0.45, 16.2};
    const double phi1 = 2.72;
    struct Hit {
        unsigned w, v;
        double bias_phase;
        double score, mem;
        double n1[4], n2[4], out[4];
    };
    struct Case {
        unsigned v;
        double bias_phase; // phase of the latch_bc drive value
    };
    // Focus on the mirror-injected-bias family (the only one where both
    // resonators can reach their hold-state thresholds): bias at the kappa_2
    // mirror of resonator 1 or 2, feedback into the input mixers, phi_1 on
    // the bias path. Scan the bias drive phase continuously and all six
    // assignments of {t1,t2,t3} to the mixer/tap/output roles.
    (void)phi1;
    std::vector<Case> cases;
    for (unsigned perm = 0; perm < 6; ++perm)
        for (unsigned inj = 2; inj < 4; ++inj)
            for (int k = 0; k < 16; ++k) {
                double ph = 2.0 * M_PI * k / 16.0;
                cases.push_back({inj | (0u << 2) | (perm << 6), ph});
            }
    std::vector<Hit> hits;
    std::mutex hits_mu;
    std::atomic<size_t> next_case{0};
    auto worker = [&]() {
        std::vector<Hit> local;
        for (;;) {
            size_t ci = next_case.fetch_add(1);
            if (ci >= cases.size()) break;
            const Case& cs = cases[ci];
            for (unsigned w = 0; w < 256; ++w) {
                Netlist nl;
                cells_detail::add_latch(nl, E, w, cs.v);
                Netlist top =
                    top_wrap(nl, "latch", {{"in_set", "set"}, {"in_reset", "reset"}});
                ReducedSystem sys;
                try {
                    sys = reduce(flatten(top));
                } catch (const std::exception&) {
                    continue;
                }
                int i1 = sys.state_index("cell.r1"), i2 = sys.state_index("cell.r2");
                DriveProgram dp;
                dp.waveforms.emplace(
                    "latch_bc",
                    Waveform::constant(1.75 * E * std::exp(Complex(0.0, cs.bias_phase))));
                dp.waveforms.emplace("set", Waveform::piecewise({{0.0, 0.0}, {1.0, E}}));
                dp.waveforms.emplace(
                    "reset", Waveform::piecewise({{0.0, E}, {2.0, 0.0}, {3.0, E}}));
                SimConfig cfg;
                cfg.t_max = 4.0;
                cfg.noise = false;
                Trajectory tr;
                try {
                    tr = run_trajectory(sys, dp, cfg);
                } catch (const std::exception&) {
                    continue;
                }
                Hit h;
                h.w = w;
                h.v = cs.v;
                h.bias_phase = cs.bias_phase;
                h.score = 0.0;
                auto lg = [](double v) { return std::log10(v + 0.1); };
                for (int p = 0; p < 4; ++p) {
                    double t_end = 1.0 * (p + 1) - 0.05;
                    int idx = static_cast<int>(t_end / tr.dt);
                    h.n1[p] = std::norm(tr.alpha(idx, i1));
                    h.n2[p] = std::norm(tr.alpha(idx, i2));
                    h.out[p] = std::abs(tr.outputs(idx, 0));
                    h.score += std::pow(lg(h.n1[p]) - lg(tgt1[p]), 2) +
                               std::pow(lg(h.n2[p]) - lg(tgt2[p]), 2);
                }
                // hold-state memory: the two hold phases must differ
                h.mem = std::fabs(lg(h.n1[1]) - lg(h.n1[3])) +
                        std::fabs(lg(h.n2[1]) - lg(h.n2[3]));
                local.push_back(h);
            }
        }
        std::lock_guard<std::mutex> lk(hits_mu);
        hits.insert(hits.end(), local.begin(), local.end());
    };
    {
        unsigned nthreads = std::max(2u, std::thread::hardware_concurrency());
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    auto print_hit = [](const Hit& h) {
        printf("v=%2u ph=%+5.2f w=%4u score=%7.3f mem=%5.2f n1={%7.2f %7.2f %7.2f %7.2f} "
               "n2={%7.2f %7.2f %7.2f %7.2f} out={%5.1f %5.1f %5.1f %5.1f}\n",
               h.v, h.bias_phase, h.w, h.score, h.mem, h.n1[0], h.n1[1], h.n1[2], h.n1[3],
               h.n2[0], h.n2[1], h.n2[2], h.n2[3], h.out[0], h.out[1], h.out[2], h.out[3]);
    };
    std::sort(hits.begin(), hits.end(),
              [](const Hit& a, const Hit& b) { return a.score < b.score; });
    printf("-- best by target score --\n");
    for (size_t i = 0; i < hits.size() && i < 25; ++i) print_hit(hits[i]);
    std::sort(hits.begin(), hits.end(),
              [](const Hit& a, const Hit& b) { return a.mem > b.mem; });
    printf("-- best by hold-state memory --\n");
    for (size_t i = 0; i < hits.size() && i < 25; ++i) print_hit(hits[i]);
    return 0;
}

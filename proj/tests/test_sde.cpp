#include <doctest.h>

#include <cmath>

#include "kerrsim/flatten.hpp"
#include "kerrsim/reduction.hpp"
#include "kerrsim/sde.hpp"

using namespace kerrsim;

namespace {

ReducedSystem make_single_resonator(double delta, double chi, double k1, double k2) {
    std::string text = "comp sig input drive=in\n"
                       "comp r resonator delta=" + std::to_string(delta) +
                       " chi=" + std::to_string(chi) + " kappa=" + std::to_string(k1) + "," +
                       std::to_string(k2) +
                       " in=sig.0\noutput o from r.1\noutput back from r.0\n";
    return reduce(flatten(parse_netlist(text)));
}

} // namespace

TEST_CASE("default timestep follows the largest rate") {
    ReducedSystem sys = make_single_resonator(50.0, 0.0, 25.0, 25.0);
    CHECK(default_dt(sys) == doctest::Approx(0.025 / 50.0));
    ReducedSystem fast = make_single_resonator(400.0, 0.0, 100.0, 100.0);
    CHECK(default_dt(fast) == doctest::Approx(0.025 / 400.0));
}

TEST_CASE("undriven linear resonator decays as exp(-kappa t / 2)") {
    ReducedSystem sys = make_single_resonator(0.0, 0.0, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(0.0));
    SimConfig cfg;
    cfg.t_max = 0.2;
    cfg.noise = false;
    cfg.alpha0 = CVector::Constant(1, Complex(1.0, 0.0));
    Trajectory tr = run_trajectory(sys, dp, cfg);
    for (int n = 0; n < tr.n_samples(); n += 50) {
        double expect = std::exp(-25.0 * tr.time[n]);
        CHECK(std::abs(tr.alpha(n, 0) - Complex(expect, 0.0)) < 1e-4);
    }
}

TEST_CASE("noise-free Kerr steady state satisfies the classical balance") {
    // kappa1 |b|^2 = n [ (kappa/2)^2 + (Delta + 2 chi n)^2 ]
    ReducedSystem sys = make_single_resonator(50.0, -0.5, 25.0, 25.0);
    for (double b : {30.04, 39.53}) {
        auto balance_error = [&](double dt) {
            DriveProgram dp;
            dp.waveforms.emplace("in", Waveform::constant(b));
            SimConfig cfg;
            cfg.t_max = 5.0;
            cfg.noise = false;
            cfg.dt = dt;
            Trajectory tr = run_trajectory(sys, dp, cfg);
            double n_ph = std::norm(tr.alpha(tr.n_samples() - 1, 0));
            double lhs = 25.0 * b * b;
            double rhs = n_ph * (25.0 * 25.0 + std::pow(50.0 - n_ph, 2));
            // the kappa_2 output amplitude is sqrt(kappa_2 n)
            double out = std::abs(tr.outputs(tr.n_samples() - 1, 0));
            CHECK(out == doctest::Approx(std::sqrt(25.0 * n_ph)).epsilon(1e-6));
            return std::abs(lhs - rhs) / lhs;
        };
        // the steady-state offset of the drive term is first order in dt
        double e1 = balance_error(5e-4);
        double e2 = balance_error(5e-5);
        CHECK(e1 < 0.03);
        CHECK(e2 < 0.15 * e1);
    }
}

TEST_CASE("trajectories are bit-reproducible for a fixed seed") {
    ReducedSystem sys = make_single_resonator(50.0, 0.0, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(5.0));
    SimConfig cfg;
    cfg.t_max = 0.5;
    cfg.seed = 99;
    Trajectory a = run_trajectory(sys, dp, cfg);
    Trajectory b = run_trajectory(sys, dp, cfg);
    CHECK(a.alpha == b.alpha);
    CHECK(a.outputs == b.outputs);
    cfg.seed = 100;
    Trajectory c = run_trajectory(sys, dp, cfg);
    CHECK(a.alpha != c.alpha);
}

TEST_CASE("vacuum-driven linear resonator reaches per-quadrature variance 1/4") {
    ReducedSystem sys = make_single_resonator(0.0, 0.0, 25.0, 25.0);
    DriveProgram dp; // zero drive: both inputs carry only vacuum noise
    dp.waveforms.emplace("in", Waveform::constant(0.0));
    SimConfig cfg;
    cfg.t_max = 200.0; // 1e4 / kappa
    cfg.seed = 7;
    Trajectory tr = run_trajectory(sys, dp, cfg);
    double skip = 1.0; // transient
    double sr = 0.0, si = 0.0, n = 0.0;
    for (int k = 0; k < tr.n_samples(); ++k) {
        if (tr.time[k] < skip) continue;
        sr += tr.alpha(k, 0).real() * tr.alpha(k, 0).real();
        si += tr.alpha(k, 0).imag() * tr.alpha(k, 0).imag();
        n += 1.0;
    }
    CHECK(sr / n == doctest::Approx(0.25).epsilon(0.05));
    CHECK(si / n == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("vacuum-only mean output amplitude is statistically zero") {
    ReducedSystem sys = make_single_resonator(0.0, 0.0, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(0.0));
    SimConfig cfg;
    cfg.t_max = 100.0;
    cfg.seed = 21;
    Trajectory tr = run_trajectory(sys, dp, cfg);
    Complex mean = 0.0;
    for (int k = 0; k < tr.n_samples(); ++k) mean += tr.outputs(k, 0);
    mean /= static_cast<double>(tr.n_samples());
    // independent noise samples with per-quadrature std 1/(2 sqrt(dt))
    double se = 1.0 / (2.0 * std::sqrt(tr.dt)) / std::sqrt(static_cast<double>(tr.n_samples()));
    CHECK(std::abs(mean.real()) < 3.0 * se);
    CHECK(std::abs(mean.imag()) < 3.0 * se);
}

TEST_CASE("with chi = 0 steady outputs superpose linearly") {
    Netlist nl = parse_netlist(R"(
comp d1 input drive=u
comp d2 input drive=v
comp bs beamsplitter theta=0.6 in=d1.0,d2.0
comp r resonator delta=30 chi=0 kappa=20,20 in=bs.0
comp p phaseshifter phi=0.9 in=bs.1
output o1 from r.1
output o2 from p.0
output o3 from r.0
)");
    ReducedSystem sys = reduce(flatten(nl));
    auto steady = [&](Complex u, Complex v) {
        DriveProgram dp;
        dp.waveforms.emplace("u", Waveform::constant(u));
        dp.waveforms.emplace("v", Waveform::constant(v));
        SimConfig cfg;
        cfg.t_max = 2.0;
        cfg.noise = false;
        Trajectory tr = run_trajectory(sys, dp, cfg);
        return std::make_pair(tr.outputs(tr.n_samples() - 1, 0),
                              tr.outputs(tr.n_samples() - 1, 1));
    };
    auto [a1, a2] = steady({3.0, 1.0}, {0.0, 0.0});
    auto [b1, b2] = steady({0.0, 0.0}, {-2.0, 4.0});
    auto [s1, s2] = steady({3.0, 1.0}, {-2.0, 4.0});
    CHECK(std::abs(s1 - (a1 + b1)) < 1e-8);
    CHECK(std::abs(s2 - (a2 + b2)) < 1e-8);
}

TEST_CASE("window averaging preserves means and shortens the record") {
    ReducedSystem sys = make_single_resonator(50.0, 0.0, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(10.0));
    SimConfig cfg;
    cfg.t_max = 1.0;
    cfg.noise = false;
    Trajectory fine = run_trajectory(sys, dp, cfg);
    cfg.avg_window = 0.01;
    Trajectory coarse = run_trajectory(sys, dp, cfg);
    CHECK(coarse.n_samples() < fine.n_samples() / 10);
    // steady-state averages agree
    CHECK(std::abs(coarse.alpha(coarse.n_samples() - 1, 0) -
                   fine.alpha(fine.n_samples() - 1, 0)) < 1e-3);
}

TEST_CASE("missing drive waveform is a validation error naming the input") {
    ReducedSystem sys = make_single_resonator(50.0, 0.0, 25.0, 25.0);
    DriveProgram dp; // no waveform for drive "in"
    SimConfig cfg;
    cfg.t_max = 0.1;
    CHECK_THROWS_WITH_AS(run_trajectory(sys, dp, cfg), doctest::Contains("in"),
                         ValidationError);
}

TEST_CASE("runaway feedback aborts with a divergence error") {
    // a near-unit-gain mirror loop produces a huge eliminated coupling term;
    // at the default step the explicit coupling update is unstable and the
    // state runs away, which must abort rather than return garbage
    Netlist nl = parse_netlist(R"(
comp sig input drive=d
comp r resonator delta=0 chi=0 kappa=2,98 in=sig.0,p.0
comp p phaseshifter phi=0.02 in=r.1
output o from r.0
)");
    ReducedSystem sys = reduce(flatten(nl));
    DriveProgram dp;
    dp.waveforms.emplace("d", Waveform::constant(1.0));
    SimConfig cfg;
    cfg.t_max = 2.0;
    cfg.noise = false;
    cfg.alpha0 = CVector::Constant(1, Complex(1.0, 0.0));
    CHECK_THROWS_AS(run_trajectory(sys, dp, cfg), DivergenceError);
}

TEST_CASE("ensemble of one equals a single trajectory") {
    ReducedSystem sys = make_single_resonator(50.0, 0.0, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(2.0));
    SimConfig cfg;
    cfg.t_max = 0.5;
    cfg.seed = 5;
    Trajectory single = run_trajectory(sys, dp, cfg);
    std::vector<Trajectory> ens = run_ensemble(sys, dp, cfg, 1);
    REQUIRE(ens.size() == 1);
    CHECK(ens[0].alpha == single.alpha);
}

TEST_CASE("ensemble results do not depend on the worker count") {
    ReducedSystem sys = make_single_resonator(50.0, 0.0, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(2.0));
    SimConfig cfg;
    cfg.t_max = 0.2;
    cfg.seed = 11;
    std::vector<Trajectory> a = run_ensemble(sys, dp, cfg, 6, 1);
    std::vector<Trajectory> b = run_ensemble(sys, dp, cfg, 6, 4);
    REQUIRE(a.size() == b.size());
    for (size_t m = 0; m < a.size(); ++m) CHECK(a[m].alpha == b[m].alpha);
    // distinct trajectories differ
    CHECK(a[0].alpha != a[1].alpha);
}

TEST_CASE("trajectory CSV has the declared column layout") {
    ReducedSystem sys = make_single_resonator(50.0, 0.0, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(1.0));
    SimConfig cfg;
    cfg.t_max = 0.01;
    cfg.noise = false;
    Trajectory tr = run_trajectory(sys, dp, cfg);
    std::string csv = trajectory_csv(tr, sys);
    CHECK(csv.rfind("time,re(r),im(r),re(o),im(o),re(back),im(back)", 0) == 0);
    std::string only_out = trajectory_csv(tr, sys, {}, {"o"});
    CHECK(only_out.rfind("time,re(o),im(o)", 0) == 0);
}

TEST_CASE("the documented Kerr-detuning toggle shifts the resonance by 2 chi") {
    // with the |alpha|^2 - 1 form, a resonator behaves like one with
    // Delta -> Delta - 2 chi in the default form
    ReducedSystem sys = make_single_resonator(50.0, -0.5, 25.0, 25.0);
    ReducedSystem shifted = make_single_resonator(51.0, -0.5, 25.0, 25.0);
    DriveProgram dp;
    dp.waveforms.emplace("in", Waveform::constant(20.0));
    SimConfig cfg;
    cfg.t_max = 2.0;
    cfg.noise = false;
    cfg.dt = 4e-4; // pinned: the two systems would pick different default steps
    cfg.kerr_minus_one = true;
    Trajectory a = run_trajectory(sys, dp, cfg);
    SimConfig cfg2 = cfg;
    cfg2.kerr_minus_one = false;
    Trajectory b = run_trajectory(shifted, dp, cfg2);
    CHECK(std::abs(std::norm(a.alpha(a.n_samples() - 1, 0)) -
                   std::norm(b.alpha(b.n_samples() - 1, 0))) < 1e-6);
}

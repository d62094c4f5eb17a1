#include "kerrsim/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "kerrsim/errors.hpp"
#include "kerrsim/rng.hpp"
#include "kerrsim/textutil.hpp"

namespace kerrsim {

double default_dt(const ReducedSystem& sys) {
    double m = 0.0;
    for (const auto& r : sys.resonators) m = std::max({m, std::abs(r.delta), r.kappa});
    return m > 0.0 ? 0.025 / m : 0.025;
}

void step(CVector& alpha, const CVector& beta_in, const ReducedSystem& sys, double dt,
          bool kerr_minus_one) {
    CVector euler = (sys.A * alpha + sys.a + sys.B * beta_in) * dt;
    double corr = kerr_minus_one ? 1.0 : 0.0;
    for (int j = 0; j < alpha.size(); ++j) {
        double n = std::norm(alpha(j));
        Complex expo = (sys.bare(j) + Complex(0.0, -2.0 * sys.resonators[j].chi * (n - corr))) * dt;
        alpha(j) = alpha(j) * std::exp(expo) + euler(j);
    }
}

std::vector<const Waveform*> bind_drives(const ReducedSystem& sys, const DriveProgram& drives) {
    std::vector<const Waveform*> bound(sys.n_inputs(), nullptr);
    for (int k = 0; k < sys.n_inputs(); ++k) {
        if (sys.input_drives[k].empty()) continue; // vacuum
        const Waveform* w = drives.find(sys.input_drives[k]);
        if (!w) w = drives.find(sys.input_names[k]);
        if (!w)
            throw ValidationError("no waveform for driven input '" + sys.input_names[k] +
                                  "' (drive label '" + sys.input_drives[k] + "')");
        bound[k] = w;
    }
    return bound;
}

Trajectory run_trajectory(const ReducedSystem& sys, const DriveProgram& drives,
                          const SimConfig& cfg) {
    const int ns = sys.n_states(), ni = sys.n_inputs(), no = sys.n_outputs();
    double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(sys);
    if (!(cfg.t_max > 0.0)) throw ValidationError("t_max must be positive");
    auto n_steps = static_cast<int64_t>(std::floor(cfg.t_max / dt + 1e-9));
    if (n_steps < 1) n_steps = 1;

    CVector alpha = CVector::Zero(ns);
    if (cfg.alpha0.size() > 0) {
        if (cfg.alpha0.size() != ns)
            throw ValidationError("initial state size does not match resonator count");
        alpha = cfg.alpha0;
    }

    auto bound = bind_drives(sys, drives);
    double sigma = cfg.noise ? 1.0 / (2.0 * std::sqrt(dt)) : 0.0;

    int64_t window = 1;
    if (cfg.avg_window > 0.0) {
        window = static_cast<int64_t>(std::llround(cfg.avg_window / dt));
        if (window < 1) window = 1;
    }
    int64_t n_samples = n_steps / window;

    Trajectory traj;
    traj.seed = cfg.seed;
    traj.dt = dt;
    traj.time.resize(n_samples);
    traj.alpha = CMatrix::Zero(n_samples, ns);
    traj.outputs = CMatrix::Zero(n_samples, no);

    CVector beta(ni), acc_alpha = CVector::Zero(ns), acc_out = CVector::Zero(no);
    double acc_t = 0.0;
    int64_t in_window = 0, sample = 0;
    double corr = cfg.kerr_minus_one ? 1.0 : 0.0;

    // precompute the drive-free exponential; the Kerr part varies per step
    CVector e_bare(ns);
    for (int j = 0; j < ns; ++j) e_bare(j) = std::exp(sys.bare(j) * dt);

    for (int64_t n = 0; n < n_steps; ++n) {
        double t = static_cast<double>(n) * dt;
        for (int k = 0; k < ni; ++k) {
            Complex v = bound[k] ? bound[k]->eval(t) : Complex(0.0, 0.0);
            if (sigma > 0.0) {
                auto [gr, gi] = gaussian_pair(cfg.seed, static_cast<uint32_t>(k),
                                              cfg.trajectory_index, static_cast<uint64_t>(n));
                v += Complex(sigma * gr, sigma * gi);
            }
            beta(k) = v;
        }

        // record with the same noise sample that drives the state update
        if (sample < n_samples) {
            acc_alpha += alpha;
            acc_out += sys.C * alpha + sys.c + sys.D * beta;
            acc_t += t;
            if (++in_window == window) {
                double inv = 1.0 / static_cast<double>(window);
                traj.time[sample] = acc_t * inv;
                traj.alpha.row(sample) = (acc_alpha * inv).transpose();
                traj.outputs.row(sample) = (acc_out * inv).transpose();
                acc_alpha.setZero();
                acc_out.setZero();
                acc_t = 0.0;
                in_window = 0;
                ++sample;
            }
        }

        // advance
        CVector euler = (sys.A * alpha + sys.a + sys.B * beta) * dt;
        for (int j = 0; j < ns; ++j) {
            double nn = std::norm(alpha(j));
            Complex kerr =
                std::exp(Complex(0.0, -2.0 * sys.resonators[j].chi * (nn - corr) * dt));
            alpha(j) = alpha(j) * e_bare(j) * kerr + euler(j);
        }

        for (int j = 0; j < ns; ++j) {
            if (!std::isfinite(alpha(j).real()) || !std::isfinite(alpha(j).imag()) ||
                std::abs(alpha(j)) > 1e6)
                throw DivergenceError("field diverged in resonator '" + sys.resonators[j].name +
                                      "' at step " + std::to_string(n + 1) + " (t=" +
                                      format_double(t + dt) + ")");
        }
    }
    return traj;
}

std::vector<Trajectory> run_ensemble(const ReducedSystem& sys, const DriveProgram& drives,
                                     const SimConfig& cfg, int n_traj, int n_workers) {
    if (n_traj < 1) throw ValidationError("ensemble size must be at least 1");
    if (n_workers <= 0) {
        n_workers = static_cast<int>(std::thread::hardware_concurrency());
        if (n_workers < 1) n_workers = 1;
    }
    n_workers = std::min(n_workers, n_traj);

    std::vector<Trajectory> out(n_traj);
    std::atomic<int> next{0};
    std::vector<std::string> errors(n_traj);
    auto worker = [&]() {
        for (;;) {
            int m = next.fetch_add(1);
            if (m >= n_traj) return;
            SimConfig c = cfg;
            c.trajectory_index = cfg.trajectory_index + static_cast<uint32_t>(m);
            try {
                out[m] = run_trajectory(sys, drives, c);
            } catch (const std::exception& e) {
                errors[m] = e.what();
            }
        }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (int m = 0; m < n_traj; ++m)
        if (!errors[m].empty())
            throw DivergenceError("trajectory " + std::to_string(m) + ": " + errors[m]);
    return out;
}

std::string trajectory_csv(const Trajectory& traj, const ReducedSystem& sys,
                           const std::vector<std::string>& resonator_names,
                           const std::vector<std::string>& output_names) {
    std::vector<int> res_idx, out_idx;
    if (resonator_names.empty() && output_names.empty()) {
        for (int j = 0; j < sys.n_states(); ++j) res_idx.push_back(j);
        for (int j = 0; j < sys.n_outputs(); ++j) out_idx.push_back(j);
    } else {
        for (const auto& n : resonator_names) {
            int j = sys.state_index(n);
            if (j < 0) throw ValidationError("unknown resonator '" + n + "'");
            res_idx.push_back(j);
        }
        for (const auto& n : output_names) {
            int j = sys.output_index(n);
            if (j < 0) throw ValidationError("unknown output '" + n + "'");
            out_idx.push_back(j);
        }
    }

    std::ostringstream os;
    os << "time";
    for (int j : res_idx)
        os << ",re(" << sys.resonators[j].name << "),im(" << sys.resonators[j].name << ")";
    for (int j : out_idx) os << ",re(" << sys.output_names[j] << "),im(" << sys.output_names[j]
                             << ")";
    os << "\n";
    for (int n = 0; n < traj.n_samples(); ++n) {
        os << format_double(traj.time[n]);
        for (int j : res_idx)
            os << "," << format_double(traj.alpha(n, j).real()) << ","
               << format_double(traj.alpha(n, j).imag());
        for (int j : out_idx)
            os << "," << format_double(traj.outputs(n, j).real()) << ","
               << format_double(traj.outputs(n, j).imag());
        os << "\n";
    }
    return os.str();
}

} // namespace kerrsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kerrsim/drives.hpp"
#include "kerrsim/reduction.hpp"
#include "kerrsim/types.hpp"

namespace kerrsim {

struct SimConfig {
    double dt = 0.0;     // <= 0 means use default_dt(sys)
    double t_max = 1.0;
    uint64_t seed = 0;
    CVector alpha0;      // empty means zero initial state
    double avg_window = 0.0; // 0 = record every step; else non-overlapping boxcar means
    bool noise = true;
    bool kerr_minus_one = false; // apply the |alpha|^2 - 1 form of the Kerr detuning
    uint32_t trajectory_index = 0;
};

/// 0.025 / max_j {Delta_j, kappa_j}; falls back to 0.025 for an all-static
/// circuit.
double default_dt(const ReducedSystem& sys);

struct Trajectory {
    std::vector<double> time;
    CMatrix alpha;   // n_samples x n_states
    CMatrix outputs; // n_samples x n_outputs
    uint64_t seed = 0;
    double dt = 0.0;

    int n_samples() const { return static_cast<int>(time.size()); }
};

/// One modified Euler-Maruyama step: the bare self-dynamics and the Kerr
/// detuning advance each state through an exponential factor; feedback
/// coupling and inputs enter as a plain Euler term.
void step(CVector& alpha, const CVector& beta_in, const ReducedSystem& sys, double dt,
          bool kerr_minus_one = false);

/// Resolve each driven input's waveform: by drive label first, then by input
/// name. Throws ValidationError naming the input when neither is present.
std::vector<const Waveform*> bind_drives(const ReducedSystem& sys, const DriveProgram& drives);

/// Integrate over [0, t_max]. Outputs are recorded with the same noise sample
/// that enters the state update. Throws DivergenceError when |alpha_j| > 1e6.
Trajectory run_trajectory(const ReducedSystem& sys, const DriveProgram& drives,
                          const SimConfig& cfg);

/// Independent trajectories m = 0..n_traj-1 (cfg.trajectory_index + m),
/// parallelized across threads; results independent of scheduling.
std::vector<Trajectory> run_ensemble(const ReducedSystem& sys, const DriveProgram& drives,
                                     const SimConfig& cfg, int n_traj, int n_workers = 0);

/// CSV with columns: time, then re/im pairs per selected signal. Empty
/// selections mean all resonators / all outputs.
std::string trajectory_csv(const Trajectory& traj, const ReducedSystem& sys,
                           const std::vector<std::string>& resonator_names = {},
                           const std::vector<std::string>& output_names = {});

} // namespace kerrsim

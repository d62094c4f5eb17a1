#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kerrsim/sde.hpp"
#include "kerrsim/types.hpp"

namespace kerrsim {

// --------------------------------------------------------------------------
// Jump detection
// --------------------------------------------------------------------------

struct JumpConfig {
    double low = 0.0;   // low-state level estimate (same units as the series)
    double high = 1.0;  // high-state level estimate
    double hysteresis_low = 0.25;  // thresholds as fractions of the separation
    double hysteresis_high = 0.75;
    double min_dwell = 0.0; // seconds a crossing must persist; 0 = 10 sample periods
};

struct JumpStatistics {
    double thr_low = 0.0, thr_high = 0.0;
    int64_t n_up = 0, n_down = 0;
    double time_low = 0.0, time_high = 0.0; // observation time per state
    double t_total = 0.0;
    double r_up = 0.0, r_down = 0.0;     // events per unit time in the source state
    double err_up = 0.0, err_down = 0.0; // Poisson error bars
    std::vector<int> state;              // debounced per-sample state (0 low, 1 high)

    std::string to_text() const;
};

/// Dual-threshold hysteresis transition counter with debouncing: a crossing
/// counts only when the new state persists for min_dwell.
JumpStatistics detect_jumps(const std::vector<double>& time, const std::vector<double>& series,
                            const JumpConfig& cfg);

// --------------------------------------------------------------------------
// Autocorrelation decay rate
// --------------------------------------------------------------------------

struct AutocorrFit {
    double rate = 0.0;      // exponential decay rate of |autocovariance|
    double residual = 0.0;  // rms residual of the log-linear fit
    bool accepted = false;
};

/// Least-squares exponential fit to the normalized autocovariance magnitude.
/// The window is chosen from an initial 1/e-crossing estimate and refined
/// once. Rejects series with no resolvable correlation time or a
/// non-decaying autocovariance.
AutocorrFit autocorr_rate(const std::vector<Complex>& series, double dt);

// --------------------------------------------------------------------------
// Field histograms
// --------------------------------------------------------------------------

struct HistGrid {
    double re_min = -10, re_max = 10, im_min = -10, im_max = 10;
    int n_re = 64, n_im = 64;
};

struct FieldHistogram {
    HistGrid grid;
    std::vector<int64_t> counts; // row-major, n_im rows x n_re cols
    int64_t total = 0;           // all accumulated samples
    int64_t overflow = 0;        // samples outside the grid

    explicit FieldHistogram(const HistGrid& g = {});
    void add(Complex z);
    void merge(const FieldHistogram& other); // grids must match
    int64_t at(int ire, int iim) const { return counts[iim * grid.n_re + ire]; }
    /// Plain-text matrix (one row per im bin); log10(1+count) when log_scale.
    std::string to_text(bool log_scale) const;
};

FieldHistogram accumulate_histogram(const Trajectory& traj, const ReducedSystem& sys,
                                    const std::string& resonator, const HistGrid& grid);

// --------------------------------------------------------------------------
// Propagation delays
// --------------------------------------------------------------------------

struct DelayMeasurement {
    double edge_time = 0.0;     // stimulus mid-level crossing
    double crossing_time = 0.0; // response mid-level crossing
    double tau = 0.0;
    bool rising = false;        // direction of the stimulus edge
    bool measurable = false;    // false when no response crossing before next edge
};

/// One measurement per stimulus mid-level edge; the response crossing is
/// searched forward from the edge until the next stimulus edge.
std::vector<DelayMeasurement> measure_delay(const std::vector<double>& time,
                                            const std::vector<double>& stimulus,
                                            const std::vector<double>& response,
                                            double stim_low, double stim_high, double resp_low,
                                            double resp_high);

// --------------------------------------------------------------------------
// Noise filtering
// --------------------------------------------------------------------------

/// Magnitude of a centered boxcar average of the complex series. Output
/// fields carry the transmitted input noise, whose per-sample deviation at
/// small time steps dwarfs the logic levels; averaging the complex field
/// (not its magnitude) over a window recovers the coherent amplitude.
std::vector<double> smoothed_magnitude(const std::vector<Complex>& series, int window);

// --------------------------------------------------------------------------
// Counter decoding
// --------------------------------------------------------------------------

struct CounterErrors {
    int64_t n_checks = 0;
    int64_t n_errors = 0;
    int64_t n_undecodable = 0;
    double t_observed = 0.0;
    double rate = 0.0;
    std::vector<double> error_times;
};

/// Decodes the 4 bit amplitudes late in each clock cycle (90% of the way
/// between consecutive falling edges, after ripple carries settle), counts
/// deviations from the modulo-16 increment sequence, and resynchronizes
/// after each error. Samples before t_start are ignored.
CounterErrors counter_error_rate(const std::vector<double>& time,
                                 const std::array<std::vector<double>, 4>& bits,
                                 const std::vector<double>& clock, double e_high,
                                 double t_start);

// --------------------------------------------------------------------------
// Small fitting helpers
// --------------------------------------------------------------------------

/// Least-squares polynomial fit; returns coefficients c0 + c1 x + ... and the
/// rms residual via out-parameter.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                            int degree, double* rms_residual = nullptr);

} // namespace kerrsim

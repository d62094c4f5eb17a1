#include "kerrsim/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "kerrsim/errors.hpp"
#include "kerrsim/textutil.hpp"

namespace kerrsim {

std::string JumpStatistics::to_text() const {
    std::ostringstream os;
    os << "thresholds " << format_double(thr_low) << " " << format_double(thr_high) << "\n"
       << "n_up " << n_up << "\nn_down " << n_down << "\n"
       << "time_low " << format_double(time_low) << "\ntime_high " << format_double(time_high)
       << "\n"
       << "r_up " << format_double(r_up) << " +- " << format_double(err_up) << "\n"
       << "r_down " << format_double(r_down) << " +- " << format_double(err_down) << "\n";
    return os.str();
}

JumpStatistics detect_jumps(const std::vector<double>& time, const std::vector<double>& series,
                            const JumpConfig& cfg) {
    if (time.size() != series.size() || time.size() < 2)
        throw ValidationError("jump detection needs matching time/series of length >= 2");
    double sep = cfg.high - cfg.low;
    JumpStatistics js;
    js.thr_low = cfg.low + cfg.hysteresis_low * sep;
    js.thr_high = cfg.low + cfg.hysteresis_high * sep;
    if (!(js.thr_low < js.thr_high))
        throw ValidationError("state estimates are not separated by both thresholds");
    double dt = time[1] - time[0];
    double min_dwell = cfg.min_dwell > 0.0 ? cfg.min_dwell : 10.0 * dt;

    // raw hysteresis classification
    size_t n = series.size();
    std::vector<int> raw(n);
    int s = series[0] > 0.5 * (js.thr_low + js.thr_high) ? 1 : 0;
    for (size_t i = 0; i < n; ++i) {
        if (series[i] >= js.thr_high) s = 1;
        else if (series[i] <= js.thr_low) s = 0;
        raw[i] = s;
    }

    // debounce: a new state must persist for min_dwell before it counts
    struct Run {
        int state;
        double t0, t1;
    };
    std::vector<Run> runs;
    for (size_t i = 0; i < n; ++i) {
        double t0 = time[i];
        double t1 = (i + 1 < n) ? time[i + 1] : time[i] + dt;
        if (!runs.empty() && runs.back().state == raw[i]) runs.back().t1 = t1;
        else runs.push_back({raw[i], t0, t1});
    }
    std::vector<Run> kept;
    for (const auto& r : runs) {
        double dur = r.t1 - r.t0;
        bool is_last = (&r == &runs.back());
        if (!kept.empty() && dur < min_dwell && !is_last) {
            kept.back().t1 = r.t1; // too short: fold into the previous state
        } else if (!kept.empty() && kept.back().state == r.state) {
            kept.back().t1 = r.t1;
        } else if (!kept.empty() && dur < min_dwell) {
            kept.back().t1 = r.t1; // short trailing run
        } else {
            kept.push_back(r);
        }
    }

    js.state.resize(n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k + 1 < kept.size() && time[i] >= kept[k].t1) ++k;
        js.state[i] = kept[k].state;
    }
    for (size_t i = 0; i < kept.size(); ++i) {
        double dur = kept[i].t1 - kept[i].t0;
        (kept[i].state ? js.time_high : js.time_low) += dur;
        if (i + 1 < kept.size()) {
            if (kept[i].state == 0) ++js.n_up;
            else ++js.n_down;
        }
    }
    js.t_total = time.back() + dt - time.front();
    if (js.time_low > 0.0) {
        js.r_up = static_cast<double>(js.n_up) / js.time_low;
        js.err_up = std::sqrt(static_cast<double>(js.n_up)) / js.time_low;
    }
    if (js.time_high > 0.0) {
        js.r_down = static_cast<double>(js.n_down) / js.time_high;
        js.err_down = std::sqrt(static_cast<double>(js.n_down)) / js.time_high;
    }
    return js;
}

AutocorrFit autocorr_rate(const std::vector<Complex>& series, double dt) {
    AutocorrFit fit;
    size_t n = series.size();
    if (n < 16 || dt <= 0.0) return fit;
    Complex mean{0.0, 0.0};
    for (const auto& z : series) mean += z;
    mean /= static_cast<double>(n);

    size_t max_lag = n / 4;
    std::vector<double> g(max_lag);
    double c0 = 0.0;
    for (size_t i = 0; i < n; ++i) c0 += std::norm(series[i] - mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0) return fit;
    for (size_t l = 0; l < max_lag; ++l) {
        Complex c{0.0, 0.0};
        for (size_t i = 0; i + l < n; ++i)
            c += std::conj(series[i] - mean) * (series[i + l] - mean);
        g[l] = std::abs(c) / static_cast<double>(n - l) / c0;
    }

    // no resolvable correlation time: already decorrelated at one lag
    if (max_lag < 2 || g[1] < 0.1) return fit;

    // initial 1/e-crossing estimate, then one refinement of the fit window
    auto fit_window = [&](size_t l_max) {
        double sxx = 0.0, sxy = 0.0;
        size_t used = 0;
        for (size_t l = 1; l <= l_max && l < max_lag; ++l) {
            if (g[l] < 0.05) break;
            double x = static_cast<double>(l) * dt, y = std::log(g[l]);
            sxx += x * x;
            sxy += x * y;
            ++used;
        }
        double rate = used >= 2 && sxx > 0.0 ? -sxy / sxx : 0.0;
        double rss = 0.0;
        for (size_t l = 1; l <= l_max && l < max_lag; ++l) {
            if (g[l] < 0.05) break;
            double x = static_cast<double>(l) * dt;
            double r = std::log(g[l]) + rate * x;
            rss += r * r;
        }
        return std::tuple<double, double, size_t>(rate,
                                                  used ? std::sqrt(rss / used) : 1e9, used);
    };

    size_t l_e = max_lag - 1;
    for (size_t l = 1; l < max_lag; ++l)
        if (g[l] < std::exp(-1.0)) {
            l_e = l;
            break;
        }
    auto [r1, res1, n1] = fit_window(std::max<size_t>(3 * l_e, 4));
    if (r1 <= 0.0) return fit;
    size_t l2 = static_cast<size_t>(std::ceil(3.0 / (r1 * dt)));
    auto [r2, res2, n2] = fit_window(std::max<size_t>(l2, 4));
    fit.rate = r2 > 0.0 ? r2 : r1;
    fit.residual = r2 > 0.0 ? res2 : res1;
    fit.accepted = fit.rate > 0.0 && fit.residual < 0.5 && (r2 > 0.0 ? n2 : n1) >= 3;
    return fit;
}

FieldHistogram::FieldHistogram(const HistGrid& g) : grid(g) {
    counts.assign(static_cast<size_t>(grid.n_re) * grid.n_im, 0);
}

void FieldHistogram::add(Complex z) {
    ++total;
    double fx = (z.real() - grid.re_min) / (grid.re_max - grid.re_min);
    double fy = (z.imag() - grid.im_min) / (grid.im_max - grid.im_min);
    int ix = static_cast<int>(std::floor(fx * grid.n_re));
    int iy = static_cast<int>(std::floor(fy * grid.n_im));
    if (ix < 0 || ix >= grid.n_re || iy < 0 || iy >= grid.n_im) {
        ++overflow;
        return;
    }
    ++counts[static_cast<size_t>(iy) * grid.n_re + ix];
}

void FieldHistogram::merge(const FieldHistogram& other) {
    if (other.grid.n_re != grid.n_re || other.grid.n_im != grid.n_im ||
        other.grid.re_min != grid.re_min || other.grid.re_max != grid.re_max ||
        other.grid.im_min != grid.im_min || other.grid.im_max != grid.im_max)
        throw ValidationError("cannot merge histograms with different grids");
    for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total += other.total;
    overflow += other.overflow;
}

std::string FieldHistogram::to_text(bool log_scale) const {
    std::ostringstream os;
    os << "# re " << format_double(grid.re_min) << " " << format_double(grid.re_max) << " "
       << grid.n_re << "\n# im " << format_double(grid.im_min) << " "
       << format_double(grid.im_max) << " " << grid.n_im << "\n# total " << total
       << " overflow " << overflow << "\n";
    for (int iy = 0; iy < grid.n_im; ++iy) {
        for (int ix = 0; ix < grid.n_re; ++ix) {
            double v = static_cast<double>(at(ix, iy));
            if (log_scale) v = std::log10(1.0 + v);
            os << (ix ? " " : "") << format_double(v);
        }
        os << "\n";
    }
    return os.str();
}

FieldHistogram accumulate_histogram(const Trajectory& traj, const ReducedSystem& sys,
                                    const std::string& resonator, const HistGrid& grid) {
    int j = sys.state_index(resonator);
    if (j < 0) throw ValidationError("unknown resonator '" + resonator + "'");
    FieldHistogram h(grid);
    for (int n = 0; n < traj.n_samples(); ++n) h.add(traj.alpha(n, j));
    return h;
}

namespace {

// interpolated crossing time of `level` between samples i and i+1
double cross_time(const std::vector<double>& time, const std::vector<double>& y, size_t i,
                  double level) {
    double y0 = y[i], y1 = y[i + 1];
    if (y1 == y0) return time[i];
    double f = (level - y0) / (y1 - y0);
    return time[i] + f * (time[i + 1] - time[i]);
}

} // namespace

std::vector<DelayMeasurement> measure_delay(const std::vector<double>& time,
                                            const std::vector<double>& stimulus,
                                            const std::vector<double>& response,
                                            double stim_low, double stim_high, double resp_low,
                                            double resp_high) {
    if (time.size() != stimulus.size() || time.size() != response.size() || time.size() < 2)
        throw ValidationError("delay measurement needs matching series of length >= 2");
    double s_mid = 0.5 * (stim_low + stim_high);
    double r_mid = 0.5 * (resp_low + resp_high);

    struct Edge {
        size_t index;
        double t;
        bool rising;
    };
    std::vector<Edge> edges;
    for (size_t i = 0; i + 1 < time.size(); ++i) {
        bool up = stimulus[i] < s_mid && stimulus[i + 1] >= s_mid;
        bool down = stimulus[i] > s_mid && stimulus[i + 1] <= s_mid;
        if (up || down) edges.push_back({i, cross_time(time, stimulus, i, s_mid), up});
    }

    std::vector<DelayMeasurement> out;
    for (size_t e = 0; e < edges.size(); ++e) {
        size_t end = e + 1 < edges.size() ? edges[e + 1].index : time.size() - 1;
        DelayMeasurement m;
        m.edge_time = edges[e].t;
        m.rising = edges[e].rising;
        for (size_t i = edges[e].index; i + 1 <= end; ++i) {
            bool cross = (response[i] < r_mid) != (response[i + 1] < r_mid);
            if (!cross) continue;
            double tc = cross_time(time, response, i, r_mid);
            if (tc < m.edge_time) continue;
            m.crossing_time = tc;
            m.tau = tc - m.edge_time;
            m.measurable = true;
            break;
        }
        out.push_back(m);
    }
    return out;
}

std::vector<double> smoothed_magnitude(const std::vector<Complex>& series, int window) {
    int n = static_cast<int>(series.size());
    if (window < 1) throw ValidationError("smoothing window must be at least one sample");
    std::vector<Complex> prefix(n + 1, Complex(0.0));
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
    std::vector<double> out(n);
    int half = window / 2;
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half);
        int hi = std::min(n, i + window - half);
        out[i] = std::abs(prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

CounterErrors counter_error_rate(const std::vector<double>& time,
                                 const std::array<std::vector<double>, 4>& bits,
                                 const std::vector<double>& clock, double e_high,
                                 double t_start) {
    size_t n = time.size();
    for (const auto& b : bits)
        if (b.size() != n) throw ValidationError("bit trace length mismatch");
    if (clock.size() != n || n < 2) throw ValidationError("clock trace length mismatch");

    // falling clock edges
    double mid = 0.5 * e_high;
    std::vector<double> falls;
    for (size_t i = 0; i + 1 < n; ++i)
        if (clock[i] > mid && clock[i + 1] <= mid)
            falls.push_back(cross_time(time, clock, i, mid));

    auto sample_at = [&](const std::vector<double>& y, double t) {
        auto it = std::lower_bound(time.begin(), time.end(), t);
        size_t i = std::min<size_t>(it - time.begin(), n - 1);
        return y[i];
    };

    CounterErrors ce;
    int expected = -1;
    double first_t = -1.0, last_t = -1.0;
    for (size_t f = 0; f + 1 < falls.size(); ++f) {
        // decode late in the cycle: ripple carries through the deeper
        // stages settle several cavity lifetimes after the triggering edge
        double t = falls[f] + 0.9 * (falls[f + 1] - falls[f]);
        if (t < t_start) continue;
        int value = 0;
        bool undecodable = false;
        for (int b = 0; b < 4; ++b) {
            double v = sample_at(bits[b], t);
            if (v > 0.6 * e_high) value |= 1 << b;
            else if (v >= 0.4 * e_high) undecodable = true;
        }
        ++ce.n_checks;
        if (first_t < 0.0) first_t = t;
        last_t = t;
        bool error = false;
        if (expected >= 0) {
            int want = (expected + 1) & 15;
            if (undecodable || value != want) {
                error = true;
                ++ce.n_errors;
                ce.error_times.push_back(t);
                if (undecodable) ++ce.n_undecodable;
            }
        }
        // resynchronize on the observed value; after an error the next cycle
        // is used for resync only, so one corrupted readout counts once
        expected = error ? -1 : value;
    }
    if (first_t >= 0.0 && last_t > first_t) {
        ce.t_observed = last_t - first_t;
        ce.rate = static_cast<double>(ce.n_errors) / ce.t_observed;
    }
    return ce;
}

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                            int degree, double* rms_residual) {
    if (x.size() != y.size() || static_cast<int>(x.size()) < degree + 1)
        throw ValidationError("polyfit needs at least degree+1 points");
    Eigen::MatrixXd A(x.size(), degree + 1);
    Eigen::VectorXd b(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            A(i, d) = p;
            p *= x[i];
        }
        b(i) = y[i];
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    if (rms_residual) {
        Eigen::VectorXd r = A * c - b;
        *rms_residual = std::sqrt(r.squaredNorm() / x.size());
    }
    return {c.data(), c.data() + c.size()};
}

} // namespace kerrsim

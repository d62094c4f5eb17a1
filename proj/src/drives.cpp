#include "kerrsim/drives.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kerrsim/errors.hpp"
#include "kerrsim/textutil.hpp"

namespace kerrsim {

namespace {

// Phase within one period, folded to [0, 1). Left-continuous: exactly at a
// period boundary the fold returns 1-epsilon semantics via the `<=` tests in
// eval, so we map a result of exactly 0 at t > 0 back to 1.
double fold_phase(double t, double period, double phase) {
    double u = std::fmod(t / period + phase, 1.0);
    if (u < 0.0) u += 1.0;
    return u;
}

} // namespace

Complex Waveform::eval(double t) const {
    switch (kind) {
        case Kind::Constant: return level;
        case Kind::Square: {
            double u = fold_phase(t, period, phase);
            if (u == 0.0 && t > 0.0) u = 1.0; // left-continuous at the wrap point
            return (u > 0.0 && u <= duty) ? high : low;
        }
        case Kind::Triangle: {
            double u = fold_phase(t, period, phase);
            double tri = u < 0.5 ? 2.0 * u : 2.0 * (1.0 - u);
            return low + (high - low) * tri;
        }
        case Kind::Piecewise: {
            if (breakpoints.empty()) return {0.0, 0.0};
            if (t < breakpoints.front().first) return {0.0, 0.0};
            Complex v = breakpoints.front().second;
            for (const auto& [bt, bv] : breakpoints) {
                if (bt < t) v = bv; // left-continuous: at t == bt the old value holds
                else break;
            }
            return v;
        }
    }
    return {0.0, 0.0};
}

Waveform Waveform::constant(Complex level) {
    Waveform w;
    w.kind = Kind::Constant;
    w.level = level;
    return w;
}

Waveform Waveform::square(Complex low, Complex high, double period, double duty, double phase) {
    Waveform w;
    w.kind = Kind::Square;
    w.low = low;
    w.high = high;
    w.period = period;
    w.duty = duty;
    w.phase = phase;
    return w;
}

Waveform Waveform::triangle(Complex low, Complex high, double period, double phase) {
    Waveform w;
    w.kind = Kind::Triangle;
    w.low = low;
    w.high = high;
    w.period = period;
    w.phase = phase;
    return w;
}

Waveform Waveform::piecewise(std::vector<std::pair<double, Complex>> breakpoints) {
    Waveform w;
    w.kind = Kind::Piecewise;
    std::sort(breakpoints.begin(), breakpoints.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    w.breakpoints = std::move(breakpoints);
    return w;
}

const Waveform* DriveProgram::find(const std::string& name) const {
    auto it = waveforms.find(name);
    return it == waveforms.end() ? nullptr : &it->second;
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) { throw ParseError(msg, line, 0); }

double need_double(const std::map<std::string, std::string>& kv, const std::string& key, int line,
                   std::optional<double> dflt = std::nullopt) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        if (dflt) return *dflt;
        fail(line, "drive waveform missing parameter '" + key + "'");
    }
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail(line, "bad number for '" + key + "': " + it->second);
    }
}

Complex need_complex(const std::map<std::string, std::string>& kv, const std::string& key,
                     int line, std::optional<Complex> dflt = std::nullopt) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        if (dflt) return *dflt;
        fail(line, "drive waveform missing parameter '" + key + "'");
    }
    auto v = parse_complex(it->second);
    if (!v) fail(line, "bad complex value for '" + key + "': " + it->second);
    return *v;
}

} // namespace

DriveProgram parse_drive_program(std::string_view text) {
    DriveProgram dp;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
        std::istringstream ls(raw);
        std::string name, kindword;
        if (!(ls >> name)) continue;
        if (!(ls >> kindword)) fail(lineno, "expected waveform kind after drive name");
        if (dp.waveforms.count(name)) fail(lineno, "duplicate drive '" + name + "'");

        if (kindword == "piecewise") {
            std::vector<std::pair<double, Complex>> bp;
            std::string tok;
            while (ls >> tok) {
                auto colon = tok.find(':');
                if (colon == std::string::npos)
                    fail(lineno, "piecewise point must be time:value, got '" + tok + "'");
                double t;
                try {
                    size_t pos = 0;
                    t = std::stod(tok.substr(0, colon), &pos);
                    if (pos != colon) throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    fail(lineno, "bad breakpoint time in '" + tok + "'");
                }
                auto v = parse_complex(tok.substr(colon + 1));
                if (!v) fail(lineno, "bad breakpoint value in '" + tok + "'");
                bp.emplace_back(t, *v);
            }
            if (bp.empty()) fail(lineno, "piecewise waveform needs at least one point");
            dp.waveforms.emplace(name, Waveform::piecewise(std::move(bp)));
            continue;
        }

        std::map<std::string, std::string> kv;
        std::string tok;
        while (ls >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos)
                fail(lineno, "expected key=value, got '" + tok + "'");
            kv[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        if (kindword == "constant") {
            dp.waveforms.emplace(name, Waveform::constant(need_complex(kv, "level", lineno)));
        } else if (kindword == "square") {
            dp.waveforms.emplace(
                name, Waveform::square(need_complex(kv, "low", lineno),
                                       need_complex(kv, "high", lineno),
                                       need_double(kv, "period", lineno),
                                       need_double(kv, "duty", lineno, 0.5),
                                       need_double(kv, "phase", lineno, 0.0)));
        } else if (kindword == "triangle") {
            dp.waveforms.emplace(name,
                                 Waveform::triangle(need_complex(kv, "low", lineno),
                                                    need_complex(kv, "high", lineno),
                                                    need_double(kv, "period", lineno),
                                                    need_double(kv, "phase", lineno, 0.0)));
        } else {
            fail(lineno, "unknown waveform kind '" + kindword + "'");
        }
        const Waveform& w = dp.waveforms.at(name);
        if ((w.kind == Waveform::Kind::Square || w.kind == Waveform::Kind::Triangle) &&
            !(w.period > 0.0))
            fail(lineno, "waveform period must be positive");
        if (w.kind == Waveform::Kind::Square && !(w.duty >= 0.0 && w.duty <= 1.0))
            fail(lineno, "square duty must lie in [0, 1]");
    }
    return dp;
}

std::string serialize_drive_program(const DriveProgram& dp) {
    std::ostringstream os;
    for (const auto& [name, w] : dp.waveforms) {
        os << name << " ";
        switch (w.kind) {
            case Waveform::Kind::Constant:
                os << "constant level=" << format_complex(w.level);
                break;
            case Waveform::Kind::Square:
                os << "square low=" << format_complex(w.low) << " high=" << format_complex(w.high)
                   << " period=" << format_double(w.period) << " duty=" << format_double(w.duty)
                   << " phase=" << format_double(w.phase);
                break;
            case Waveform::Kind::Triangle:
                os << "triangle low=" << format_complex(w.low)
                   << " high=" << format_complex(w.high) << " period=" << format_double(w.period)
                   << " phase=" << format_double(w.phase);
                break;
            case Waveform::Kind::Piecewise:
                os << "piecewise";
                for (const auto& [t, v] : w.breakpoints)
                    os << " " << format_double(t) << ":" << format_complex(v);
                break;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace kerrsim

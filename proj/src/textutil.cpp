#include "kerrsim/textutil.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace kerrsim {

static std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::string buf(s);
    char* end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size()) return std::nullopt;
    return v;
}

std::optional<Complex> parse_complex(std::string_view s) {
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        auto inner = s.substr(1, s.size() - 2);
        auto comma = inner.find(',');
        if (comma == std::string_view::npos) return std::nullopt;
        auto re = parse_double(inner.substr(0, comma));
        auto im = parse_double(inner.substr(comma + 1));
        if (!re || !im) return std::nullopt;
        return Complex{*re, *im};
    }
    auto re = parse_double(s);
    if (!re) return std::nullopt;
    return Complex{*re, 0.0};
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string format_complex(Complex z) {
    if (z.imag() == 0.0) return format_double(z.real());
    return "(" + format_double(z.real()) + "," + format_double(z.imag()) + ")";
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace kerrsim

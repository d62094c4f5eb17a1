#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kerrsim/types.hpp"

namespace kerrsim {

/// Parse "1.5" or "(1.5,-2)" into a complex value. Returns nullopt on failure.
std::optional<Complex> parse_complex(std::string_view s);

/// Round-trip formatting: plain real when im == 0, "(re,im)" otherwise.
std::string format_complex(Complex z);

/// Full round-trip precision (17 significant digits).
std::string format_double(double x);

std::vector<std::string> split(std::string_view s, char sep);

} // namespace kerrsim

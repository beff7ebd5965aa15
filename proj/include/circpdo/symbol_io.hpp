#pragma once

#include <string>

#include "circpdo/symbol.hpp"

namespace circpdo {

// Canonical text form: field order fixed, coefficients as [mode, re, im]
// triples sorted by mode with exact zeros dropped and -0 normalized, so
// write(read(text)) == text for every file this writer produced.
std::string symbol_to_json(const FormalSymbol& a);

// throws ParseError on malformed or inconsistent input
FormalSymbol symbol_from_json(const std::string& text);

void write_symbol_file(const std::string& path, const FormalSymbol& a);
FormalSymbol read_symbol_file(const std::string& path);

}  // namespace circpdo

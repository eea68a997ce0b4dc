#pragma once

#include <iosfwd>
#include <string>

#include "chaining/core.hpp"

namespace chaining {

// Text signal format: a "#dim d" header line, then one "position<TAB>value"
// line per nonzero entry with strictly increasing positions.
void write_signal(std::ostream& out, const SparseSignal& f);
SparseSignal read_signal(std::istream& in);

SparseSignal load_signal(const std::string& path);
void save_signal(const std::string& path, const SparseSignal& f);

}  // namespace chaining

#include "chaining/signal_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "chaining/binary_io.hpp"

namespace chaining {

void write_signal(std::ostream& out, const SparseSignal& f) {
  out << "#dim " << f.dimension() << '\n';
  char buffer[64];
  for (const auto& [i, v] : f) {
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    out << i << '\t' << buffer << '\n';
  }
}

SparseSignal read_signal(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty signal file");
  std::istringstream header(line);
  std::string tag;
  Index d = 0;
  if (!(header >> tag >> d) || tag != "#dim" || d == 0) throw FormatError("signal file must start with '#dim d'");

  SparseSignal f(d);
  bool first = true;
  Index previous = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Index position = 0;
    std::string value_text;
    if (!(fields >> position >> value_text)) throw FormatError("malformed signal line " + std::to_string(line_no));
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0' || !std::isfinite(value)) {
      throw FormatError("non-finite or malformed value on line " + std::to_string(line_no));
    }
    if (position >= d) throw FormatError("position out of range on line " + std::to_string(line_no));
    if (!first && position <= previous) throw FormatError("positions must be strictly increasing");
    first = false;
    previous = position;
    f.set(position, value);
  }
  return f;
}

SparseSignal load_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_signal(in);
}

void save_signal(const std::string& path, const SparseSignal& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_signal(out, f);
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace chaining

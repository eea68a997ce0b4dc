#include "chaining/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chaining/binary_io.hpp"
#include "chaining/decoder.hpp"
#include "chaining/isolation.hpp"
#include "chaining/signal_io.hpp"
#include "chaining/sketcher.hpp"

namespace chaining::cli {

namespace {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    body();
    return kOk;
  } catch (const HashFailure& e) {
    err << "error: " << e.what() << '\n';
    return kHashFailure;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kFormatMismatch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

IsolationMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix(in);
}

Sketch load_sketch(const std::string& path, const IsolationMatrix& matrix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_sketch(in, matrix);
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("cannot write " + path);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

}  // namespace

MeasurementNoise MeasurementNoise::parse(const std::string& text) {
  MeasurementNoise out;
  std::string number = text;
  if (text.rfind("rel:", 0) == 0) {
    out.relative = true;
    number = text.substr(4);
  } else if (text.rfind("abs:", 0) == 0) {
    number = text.substr(4);
  }
  std::size_t used = 0;
  try {
    out.amount = std::stod(number, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad measurement noise '" + text + "'");
  }
  if (used != number.size() || !(out.amount >= 0.0)) throw std::invalid_argument("bad measurement noise '" + text + "'");
  return out;
}

ExperimentRow run_single(const SketchParams& params, const NoiseModel& noise, const MeasurementNoise& meas_noise,
                         bool integer_values) {
  ExperimentRow row;
  row.d = params.d;
  row.m = params.m;
  row.a = params.a;
  row.seed = params.seed;

  Rng rng(mix64(params.seed, 0x519a1ull));
  const SparseSignal f = generate_signal(params.d, params.m, noise, rng, integer_values);
  row.noise_l1 = l1_norm(f - best_m_approx(f, params.m));

  SparseSignal estimate(params.d);
  Timings timings;
  try {
    const auto matrix = build_isolation(params);
    auto start = std::chrono::steady_clock::now();
    Sketch sketch = sketch_signal(f, matrix);
    timings.encode_ms = elapsed_ms(start);
    row.sketch_bytes = sketch.byte_size();
    const double budget = meas_noise.relative ? meas_noise.amount * l1_norm(f) : meas_noise.amount;
    row.meas_noise_l1 = perturb_sketch(sketch, budget, params.m, rng);
    start = std::chrono::steady_clock::now();
    estimate = recover(sketch, matrix, params.m);
    timings.decode_ms = elapsed_ms(start);
  } catch (const HashFailure&) {
    row.hash_failed = true;
  }
  row.report = recovery_report(f, estimate, params.m, timings);
  row.exact = !row.hash_failed && estimate == f;
  return row;
}

std::vector<ExperimentRow> run_experiment(const ExperimentOptions& options) {
  std::vector<ExperimentRow> rows;
  std::vector<NoiseModel> noises;
  for (const auto& n : options.noises) noises.push_back(NoiseModel::parse(n));
  std::vector<MeasurementNoise> meas;
  for (const auto& n : options.meas_noises) meas.push_back(MeasurementNoise::parse(n));
  if (options.ds.empty() || options.ms.empty()) throw std::invalid_argument("experiment needs at least one d and m");

  std::uint64_t counter = 0;
  for (Index d : options.ds) {
    for (Index m : options.ms) {
      for (const auto& noise : noises) {
        for (const auto& y : meas) {
          for (std::size_t run = 0; run < options.runs; ++run, ++counter) {
            SketchParams params = options.base;
            params.d = d;
            params.m = m;
            params.seed = mix64(options.base.seed, counter);
            params.validate();
            rows.push_back(run_single(params, noise, y, options.integer_values));
          }
        }
      }
    }
  }
  return rows;
}

void write_csv_header(std::ostream& out) {
  out << "d,m,a,seed,noise_l1,meas_noise_l1,l1_error,opt_error,ratio,weak1_error,support_out,sketch_bytes,encode_"
         "ms,decode_ms\n";
}

void write_csv_row(std::ostream& out, const ExperimentRow& row) {
  const auto& r = row.report;
  out << row.d << ',' << row.m << ',' << format_double(row.a) << ',' << row.seed << ',' << format_double(row.noise_l1)
      << ',' << format_double(row.meas_noise_l1) << ',' << format_double(r.l1_error) << ','
      << format_double(r.opt_error) << ',' << format_double(r.ratio) << ',' << format_double(r.weak1_error) << ','
      << r.support_out << ',' << row.sketch_bytes << ',' << format_double(r.encode_ms) << ','
      << format_double(r.decode_ms) << '\n';
}

int cmd_gen(const GenOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    if (options.d == 0) throw std::invalid_argument("--d must be positive");
    if (options.m > options.d) throw std::invalid_argument("--m must not exceed --d");
    Rng rng(options.seed);
    const auto f = generate_signal(options.d, options.m, NoiseModel::parse(options.noise), rng, options.integer_values);
    if (options.out.empty()) {
      write_signal(std::cout, f);
    } else {
      save_signal(options.out, f);
    }
  });
}

int cmd_sketch(const SketchOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    const SparseSignal f = load_signal(options.signal_path);
    SketchParams params = options.params;
    if (params.d == 0) params.d = f.dimension();
    if (params.d != f.dimension()) throw std::invalid_argument("--d disagrees with the signal file's dimension");
    params.validate();
    if (options.out.empty() || options.matrix_out.empty()) throw std::invalid_argument("--out and --matrix are required");
    const auto matrix = build_isolation(params);
    const Sketch sketch = sketch_signal(f, matrix);
    write_file(options.matrix_out, [&](std::ostream& out) { write_matrix(out, matrix); });
    write_file(options.out, [&](std::ostream& out) { write_sketch(out, sketch, matrix); });
  });
}

int cmd_update(const UpdateOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    const auto matrix = load_matrix(options.matrix_path);
    Sketch sketch = load_sketch(options.sketch_path, matrix);
    update(sketch, matrix, options.position, options.delta);
    write_file(options.sketch_path, [&](std::ostream& out) { write_sketch(out, sketch, matrix); });
  });
}

int cmd_decode(const DecodeOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    const auto matrix = load_matrix(options.matrix_path);
    const Sketch sketch = load_sketch(options.sketch_path, matrix);
    const Index m = options.m.value_or(matrix.params().m);
    if (m < 1 || m > matrix.dimension()) throw std::invalid_argument("--m must lie in [1, d]");
    const auto start = std::chrono::steady_clock::now();
    const SparseSignal estimate = recover(sketch, matrix, m);
    const double decode_ms = elapsed_ms(start);
    if (options.out.empty()) {
      write_signal(std::cout, estimate);
    } else {
      save_signal(options.out, estimate);
    }
    if (!options.truth_path.empty()) {
      const SparseSignal truth = load_signal(options.truth_path);
      if (truth.dimension() != estimate.dimension()) throw FormatError("truth file dimension disagrees with the matrix");
      const auto r = recovery_report(truth, estimate, m, {0.0, decode_ms});
      err << "l1_error=" << format_double(r.l1_error) << " opt_error=" << format_double(r.opt_error)
          << " ratio=" << format_double(r.ratio) << " weak1_error=" << format_double(r.weak1_error)
          << " support_out=" << r.support_out << " decode_ms=" << format_double(r.decode_ms) << '\n';
    }
  });
}

int cmd_experiment(const ExperimentOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    std::ofstream file;
    if (!options.out.empty()) {
      file.open(options.out, std::ios::trunc);
      if (!file) throw std::runtime_error("cannot write " + options.out);
    }
    std::ostream& out = options.out.empty() ? std::cout : file;
    const auto rows = run_experiment(options);
    write_csv_header(out);
    for (const auto& row : rows) write_csv_row(out, row);
    out.flush();
    if (!out) throw std::runtime_error("cannot write experiment output");
  });
}

}  // namespace chaining::cli

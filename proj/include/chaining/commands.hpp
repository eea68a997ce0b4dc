#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chaining/core.hpp"
#include "chaining/generate.hpp"
#include "chaining/metrics.hpp"

namespace chaining::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kHashFailure = 3, kFormatMismatch = 4 };

struct GenOptions {
  Index d = 0;
  Index m = 0;
  std::string noise = "none";
  std::uint64_t seed = 0;
  bool integer_values = false;
  std::string out;  // empty: stdout
};

struct SketchOptions {
  std::string signal_path;
  SketchParams params;  // params.d == 0 takes d from the signal file
  std::string out;
  std::string matrix_out;
};

struct UpdateOptions {
  std::string sketch_path;
  std::string matrix_path;
  Index position = 0;
  double delta = 0.0;
};

struct DecodeOptions {
  std::string sketch_path;
  std::string matrix_path;
  std::optional<Index> m;  // defaults to the matrix's m
  std::string truth_path;
  std::string out;  // empty: stdout
};

/// Absolute budget, or a fraction of ||f||_1 when relative.
struct MeasurementNoise {
  double amount = 0.0;
  bool relative = false;
  static MeasurementNoise parse(const std::string& text);
};

struct ExperimentOptions {
  std::vector<Index> ds;
  std::vector<Index> ms;
  std::vector<std::string> noises{"none"};
  std::vector<std::string> meas_noises{"0"};
  std::size_t runs = 1;
  SketchParams base;
  bool integer_values = true;
  std::string out;  // CSV path; empty: stdout
};

struct ExperimentRow {
  Index d = 0;
  Index m = 0;
  double a = 0.0;
  std::uint64_t seed = 0;
  double noise_l1 = 0.0;
  double meas_noise_l1 = 0.0;
  RecoveryReport report;
  Index sketch_bytes = 0;
  bool hash_failed = false;
  bool exact = false;
};

/// One gen -> sketch -> perturb -> decode -> report cycle.
ExperimentRow run_single(const SketchParams& params, const NoiseModel& noise, const MeasurementNoise& meas_noise,
                         bool integer_values);

std::vector<ExperimentRow> run_experiment(const ExperimentOptions& options);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const ExperimentRow& row);

int cmd_gen(const GenOptions& options, std::ostream& err);
int cmd_sketch(const SketchOptions& options, std::ostream& err);
int cmd_update(const UpdateOptions& options, std::ostream& err);
int cmd_decode(const DecodeOptions& options, std::ostream& err);
int cmd_experiment(const ExperimentOptions& options, std::ostream& err);

}  // namespace chaining::cli

// cpursuit: generate signals, sketch them, stream updates, decode, and sweep experiments.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "chaining/commands.hpp"

namespace {

using namespace chaining;

void add_param_flags(CLI::App& cmd, SketchParams& params, std::string& mode) {
  cmd.add_option("--a", params.a, "pass base (> 2)")->capture_default_str();
  cmd.add_option("--c-trials", params.c_trials, "trial-count constant")->capture_default_str();
  cmd.add_option("--c-buckets", params.c_buckets, "bucket-count constant")->capture_default_str();
  cmd.add_option("--retention", params.retention_fraction, "fraction of trials a spike must exceed")
      ->capture_default_str();
  cmd.add_option("--mode", mode, "isolation matrix backend")
      ->check(CLI::IsMember({"explicit", "seeded"}))
      ->capture_default_str();
  cmd.add_option("--seed", params.seed, "matrix seed")->capture_default_str();
  cmd.add_option("--k-rep", params.k_rep, "rejection rounds for seeded hashing (0: ceil(4 log2 d))");
}

MatrixMode parse_mode(const std::string& mode) { return mode == "seeded" ? MatrixMode::Seeded : MatrixMode::Explicit; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chaining Pursuit sketching and sparse recovery"};
  app.require_subcommand(1);

  cli::GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a sparse (optionally noisy) signal file");
  gen_cmd->add_option("--d", gen.d, "signal dimension")->required();
  gen_cmd->add_option("--m", gen.m, "number of spikes")->required();
  gen_cmd->add_option("--noise", gen.noise, "none | l1:eps | l1rel:frac | weak1:r")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_flag("--integer", gen.integer_values, "integer spike magnitudes in {1..10}");
  gen_cmd->add_option("--out", gen.out, "output signal file (default stdout)");

  cli::SketchOptions sketch;
  sketch.params.d = 0;
  std::string sketch_mode = "explicit";
  auto* sketch_cmd = app.add_subcommand("sketch", "build a matrix and sketch a signal file");
  sketch_cmd->add_option("signal", sketch.signal_path, "input signal file")->required();
  sketch_cmd->add_option("--d", sketch.params.d, "signal dimension (default: from the file)");
  sketch_cmd->add_option("--m", sketch.params.m, "target sparsity")->required();
  add_param_flags(*sketch_cmd, sketch.params, sketch_mode);
  sketch_cmd->add_option("--out", sketch.out, "output sketch file")->required();
  sketch_cmd->add_option("--matrix", sketch.matrix_out, "output matrix file")->required();

  cli::UpdateOptions upd;
  auto* update_cmd = app.add_subcommand("update", "apply f += delta * e_position to a sketch file in place");
  update_cmd->add_option("sketch", upd.sketch_path, "sketch file")->required();
  update_cmd->add_option("matrix", upd.matrix_path, "matrix file")->required();
  update_cmd->add_option("--position", upd.position, "signal position")->required();
  update_cmd->add_option("--delta", upd.delta, "additive update")->required();

  cli::DecodeOptions dec;
  Index decode_m = 0;
  auto* decode_cmd = app.add_subcommand("decode", "recover an m-term approximation from a sketch");
  decode_cmd->add_option("sketch", dec.sketch_path, "sketch file")->required();
  decode_cmd->add_option("matrix", dec.matrix_path, "matrix file")->required();
  decode_cmd->add_option("--m", decode_m, "output sparsity (default: the matrix's m)");
  decode_cmd->add_option("--truth", dec.truth_path, "reference signal; prints a recovery report to stderr");
  decode_cmd->add_option("--out", dec.out, "output signal file (default stdout)");

  cli::ExperimentOptions exp;
  std::string exp_mode = "explicit";
  bool real_values = false;
  auto* exp_cmd = app.add_subcommand("experiment", "sweep gen -> sketch -> decode and emit CSV");
  exp_cmd->add_option("--d", exp.ds, "dimensions")->required()->delimiter(',');
  exp_cmd->add_option("--m", exp.ms, "sparsities")->required()->delimiter(',');
  exp_cmd->add_option("--noise", exp.noises, "noise models (none, l1:x, l1rel:x, weak1:r)")->delimiter(',');
  exp_cmd->add_option("--meas-noise", exp.meas_noises, "sketch perturbation l1 budgets (x or rel:x)")
      ->delimiter(',');
  exp_cmd->add_option("--trials", exp.runs, "runs per cell")->capture_default_str();
  add_param_flags(*exp_cmd, exp.base, exp_mode);
  exp_cmd->add_flag("--real", real_values, "real spike magnitudes instead of integers");
  exp_cmd->add_option("--out", exp.out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kValidation;
  }

  if (*gen_cmd) return cli::cmd_gen(gen, std::cerr);
  if (*sketch_cmd) {
    sketch.params.mode = parse_mode(sketch_mode);
    return cli::cmd_sketch(sketch, std::cerr);
  }
  if (*update_cmd) return cli::cmd_update(upd, std::cerr);
  if (*decode_cmd) {
    if (decode_m != 0) dec.m = decode_m;
    return cli::cmd_decode(dec, std::cerr);
  }
  if (*exp_cmd) {
    exp.base.mode = parse_mode(exp_mode);
    exp.integer_values = !real_values;
    return cli::cmd_experiment(exp, std::cerr);
  }
  return cli::kValidation;
}

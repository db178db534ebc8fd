#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "eaclab/autodiff.hpp"
#include "eaclab/circuit_io.hpp"
#include "eaclab/elim2.hpp"
#include "eaclab/eval.hpp"
#include "eaclab/fold.hpp"
#include "eaclab/reductions.hpp"
#include "eaclab/report.hpp"

using namespace eaclab;

namespace {

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1p-53; }
  double sym() { return 2.0 * unit() - 1.0; }
  int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
};

struct Options {
  unsigned precision = kDefaultMantissaBits;
  uint64_t seed = 1;
  std::string report_path;
  int jobs = 1;
};

OVInstance random_instance(Rng& rng, int n, int d, int lh, double density) {
  OVInstance ins = OVInstance::empty(3, d);
  const int sizes[3] = {n, n, lh};
  for (int s = 0; s < 3; ++s)
    for (int v = 0; v < sizes[s]; ++v) {
      std::vector<int> coords(static_cast<size_t>(d));
      for (int j = 0; j < d; ++j) coords[static_cast<size_t>(j)] = rng.unit() < density;
      ins.push(s, coords);
    }
  return ins;
}

MatMulBatch random_mm_batch(Rng& rng, int lh, int n) {
  MatMulBatch batch = MatMulBatch::make(lh, n);
  for (int k = 0; k < lh; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        batch.A[static_cast<size_t>(k)](i, j) = rng.sym();
        batch.B[static_cast<size_t>(k)](i, j) = rng.sym();
      }
  return batch;
}

int finish(RunReport& report, const Options& opt,
           std::chrono::steady_clock::time_point start) {
  report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  report.write(std::cout);
  if (!opt.report_path.empty()) {
    std::ofstream f(opt.report_path);
    report.write(f);
  }
  return report.all_pass() ? 0 : 1;
}

std::vector<std::string> eval_in_mode(const ValidatedCircuit& vc,
                                      const std::vector<std::string>& inputs,
                                      const NumericMode& mode) {
  std::vector<std::string> out;
  switch (mode.kind) {
    case NumericMode::Kind::Float64: {
      std::vector<double> x;
      for (const auto& t : inputs) x.push_back(double_from_decimal(t));
      for (double v : evaluate<double>(vc, x).outputs) out.push_back(shortest_decimal(v));
      break;
    }
    case NumericMode::Kind::BigFloat: {
      set_bigfloat_bits(mode.mantissa_bits);
      std::vector<BigFloat> x;
      for (const auto& t : inputs) x.push_back(bigfloat_from_decimal(t));
      for (const BigFloat& v : evaluate<BigFloat>(vc, x).outputs)
        out.push_back(ScalarOps<BigFloat>::to_text(v));
      break;
    }
    case NumericMode::Kind::Rational: {
      std::vector<Rational> x;
      for (const auto& t : inputs) x.push_back(rational_from_decimal(t));
      for (const Rational& v : evaluate<Rational>(vc, x).outputs)
        out.push_back(ScalarOps<Rational>::to_text(v));
      break;
    }
  }
  return out;
}

struct GateCounts {
  int exp = 0, ln = 0, div = 0;
};

GateCounts count_gates(const Circuit& c) {
  GateCounts n;
  for (const Gate& g : c.gates) {
    if (g.op == GateOp::Exp) ++n.exp;
    if (g.op == GateOp::Ln) ++n.ln;
    if (g.op == GateOp::Div) ++n.div;
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extended arithmetic circuit laboratory"};
  app.require_subcommand(1);
  Options opt;
  if (const char* env = std::getenv("EACLAB_PRECISION")) {
    opt.precision = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    if (opt.precision < 24) opt.precision = kDefaultMantissaBits;
  }
  app.add_option("--precision", opt.precision, "BigFloat mantissa bits");
  app.add_option("--seed", opt.seed, "root random seed");
  app.add_option("--report", opt.report_path, "also write the report to a file");
  app.add_option("--jobs", opt.jobs, "parallel trials for verify sweeps")
      ->check(CLI::Range(1, 256));

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a circuit");
  std::string eval_file, eval_mode = "f64", eval_inputs;
  eval_cmd->add_option("circuit", eval_file)->required();
  eval_cmd->add_option("--mode", eval_mode, "f64 | bigfloat[:bits] | rational");
  eval_cmd->add_option("--inputs", eval_inputs, "comma-separated decimals");

  // ---- grad ----
  auto* grad_cmd = app.add_subcommand("grad", "emit the derivative circuit");
  std::string grad_file, grad_out;
  grad_cmd->add_option("circuit", grad_file)->required();
  grad_cmd->add_option("-o,--output", grad_out, "write the gradient circuit here");

  // ---- elim2 ----
  auto* elim_cmd = app.add_subcommand("elim2", "eliminate exp/ln/div from a quadratic eAC");
  std::string elim_file, elim_out;
  bool elim_check = false, elim_parts = false;
  int elim_trials = 16;
  elim_cmd->add_option("circuit", elim_file)->required();
  elim_cmd->add_option("-o,--output", elim_out, "write the emitted AC here");
  elim_cmd->add_flag("--check", elim_check, "verify against the source on random points");
  elim_cmd->add_flag("--parts", elim_parts, "emit c0 + c1 + c2 outputs");
  elim_cmd->add_option("--trials", elim_trials, "check points");

  // ---- ov3 ----
  auto* ov3_cmd = app.add_subcommand("ov3", "3-OV reduction pipeline");
  ov3_cmd->require_subcommand(1);
  int ov_n = 8, ov_d = 6, ov_lh = 4, ov_l = 0, ov_trials = 20;
  double ov_density = 0.5;
  std::string ov_file, ov_path = "hardmax";
  auto* ov_gen = ov3_cmd->add_subcommand("gen", "write a random instance");
  ov_gen->add_option("--N", ov_n);
  ov_gen->add_option("--d", ov_d);
  ov_gen->add_option("--LH", ov_lh);
  ov_gen->add_option("--density", ov_density);
  ov_gen->add_option("-o,--output", ov_file)->required();
  auto* ov_solve = ov3_cmd->add_subcommand("solve", "brute-force an instance file");
  ov_solve->add_option("instance", ov_file)->required();
  auto* ov_reduce = ov3_cmd->add_subcommand("reduce", "decide through the transformer");
  ov_reduce->add_option("instance", ov_file)->required();
  ov_reduce->add_option("--path", ov_path, "hardmax | softmax");
  ov_reduce->add_option("--L", ov_l, "layer count (0: single layer)");
  auto* ov_verify = ov3_cmd->add_subcommand("verify", "reduction vs brute force sweep");
  ov_verify->add_option("--N", ov_n);
  ov_verify->add_option("--d", ov_d);
  ov_verify->add_option("--LH", ov_lh);
  ov_verify->add_option("--trials", ov_trials);
  ov_verify->add_option("--density", ov_density, "fixed density (default sweeps 0.1/0.5/0.9)");

  // ---- matmul ----
  auto* mm_cmd = app.add_subcommand("matmul", "batched matrix products via gradients");
  mm_cmd->require_subcommand(1);
  int mm_lh = 2, mm_n = 4, mm_l = 1;
  std::string mm_file;
  auto* mm_gen = mm_cmd->add_subcommand("gen", "write a random batch");
  mm_gen->add_option("--LH", mm_lh);
  mm_gen->add_option("--N", mm_n);
  mm_gen->add_option("-o,--output", mm_file)->required();
  auto* mm_extract = mm_cmd->add_subcommand("extract", "recover products from a batch file");
  mm_extract->add_option("batch", mm_file)->required();
  mm_extract->add_option("--L", mm_l);
  auto* mm_verify = mm_cmd->add_subcommand("verify", "recovery vs direct multiplication");
  mm_verify->add_option("--LH", mm_lh);
  mm_verify->add_option("--N", mm_n);
  mm_verify->add_option("--L", mm_l);

  // Let global options (--seed, --precision, ...) appear after a subcommand.
  auto enable_fallthrough = [](CLI::App* a, auto&& self) -> void {
    for (CLI::App* sub : a->get_subcommands({})) {
      sub->fallthrough();
      self(sub, self);
    }
  };
  enable_fallthrough(&app, enable_fallthrough);

  CLI11_PARSE(app, argc, argv);
  set_bigfloat_bits(opt.precision);
  auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.seed = opt.seed;
  report.param("precision", static_cast<long>(opt.precision));

  try {
    if (*eval_cmd) {
      report.command = "eval";
      report.param("circuit", eval_file);
      report.param("mode", eval_mode);
      NumericMode mode = NumericMode::parse(eval_mode);
      ValidatedCircuit vc = validate(load_circuit(eval_file));
      std::vector<std::string> inputs;
      std::string tok;
      std::istringstream ss(eval_inputs);
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) inputs.push_back(tok);
      auto outs = eval_in_mode(vc, inputs, mode);
      report.measure("size", static_cast<long>(vc.size()));
      for (size_t i = 0; i < outs.size(); ++i)
        report.measure("output" + std::to_string(i), outs[i]);
      report.check("eval.ok", true);
    } else if (*grad_cmd) {
      report.command = "grad";
      report.param("circuit", grad_file);
      ValidatedCircuit vc = validate(load_circuit(grad_file));
      GradientCircuit gc = gradient_circuit(vc);
      const int out_size = circuit_size(gc.circuit);
      report.measure("source_size", static_cast<long>(vc.size()));
      report.measure("gradient_size", static_cast<long>(out_size));
      report.measure("size_ratio",
                     vc.size() ? static_cast<double>(out_size) / vc.size() : 0.0);
      report.check("grad.size_bound",
                   out_size <= 6 * vc.size() + vc.input_arity() + 2);
      if (!grad_out.empty()) save_circuit(grad_out, gc.circuit);
    } else if (*elim_cmd) {
      report.command = "elim2";
      report.param("circuit", elim_file);
      ValidatedCircuit vc = validate(load_circuit(elim_file));
      EliminationResult r =
          eliminate(vc, elim_check ? elim_trials : 0, opt.seed);
      GateCounts counts = count_gates(r.ac);
      report.measure("source_size", static_cast<long>(vc.size()));
      report.measure("emitted_size", static_cast<long>(circuit_size(r.ac)));
      report.measure("exp_gates", static_cast<long>(counts.exp));
      report.measure("ln_gates", static_cast<long>(counts.ln));
      report.measure("div_gates", static_cast<long>(counts.div));
      report.check("elim2.pure_ac", counts.exp + counts.ln + counts.div == 0);
      if (elim_check) report.check("elim2.matches_source", true);
      if (!elim_out.empty())
        save_circuit(elim_out, elim_parts ? r.full_value_circuit() : r.ac);
    } else if (*ov_gen) {
      report.command = "ov3 gen";
      report.param("N", ov_n);
      report.param("d", ov_d);
      report.param("LH", ov_lh);
      report.measure("density", ov_density);
      Rng rng(opt.seed);
      save_ov(ov_file, random_instance(rng, ov_n, ov_d, ov_lh, ov_density));
      report.check("gen.ok", true);
    } else if (*ov_solve) {
      report.command = "ov3 solve";
      report.param("instance", ov_file);
      bool has = brute_force_kov(load_ov(ov_file));
      report.measure("has_tuple", has ? "yes" : "no");
      report.check("solve.ok", true);
    } else if (*ov_reduce) {
      report.command = "ov3 reduce";
      report.param("instance", ov_file);
      report.param("path", ov_path);
      OVInstance ins = load_ov(ov_file);
      Ov3Path path = ov_path == "softmax" ? Ov3Path::SoftmaxFloat : Ov3Path::HardmaxExact;
      Ov3Decision dec = decide_ov3(ins, path, ov_l);
      report.param("L", dec.L);
      report.param("H", dec.H);
      report.measure("has_triple", dec.has_triple ? "yes" : "no");
      if (path == Ov3Path::HardmaxExact) {
        report.measure("certificate", ScalarOps<Rational>::to_text(dec.certificate));
      } else {
        report.measure("certificate", dec.certificate_float);
        report.measure("scale_c", static_cast<long>(dec.scale_c));
        report.measure("threshold", dec.threshold);
      }
      report.check("reduce.ok", true);
    } else if (*ov_verify) {
      report.command = "ov3 verify";
      report.param("N", ov_n);
      report.param("d", ov_d);
      report.param("LH", ov_lh);
      report.param("trials", ov_trials);
      report.param("jobs", opt.jobs);
      const bool sweep = ov_verify->count("--density") == 0;
      std::vector<int> agree(static_cast<size_t>(ov_trials), 0);
      std::vector<std::string> bad;
      auto run_trial = [&](int t) {
        Rng rng(opt.seed + static_cast<uint64_t>(t) * 0x9e37ull);
        double density = sweep ? std::vector<double>{0.1, 0.5, 0.9}[t % 3] : ov_density;
        int n = 2 + rng.below(ov_n > 1 ? ov_n - 1 : 1);
        int d = 2 + rng.below(ov_d > 1 ? ov_d - 1 : 1);
        int lh = 1 + rng.below(ov_lh);
        int l = 1 + rng.below(3);
        while (lh % l != 0) --l;
        OVInstance ins = random_instance(rng, n, d, lh, density);
        bool want = brute_force_kov(ins);
        bool hard = decide_ov3(ins, Ov3Path::HardmaxExact, l).has_triple;
        bool soft = decide_ov3(ins, Ov3Path::SoftmaxFloat, l).has_triple;
        agree[static_cast<size_t>(t)] = (hard == want && soft == want) ? 1 : 0;
      };
      if (opt.jobs <= 1) {
        for (int t = 0; t < ov_trials; ++t) run_trial(t);
      } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < opt.jobs; ++w)
          pool.emplace_back([&] {
            set_bigfloat_bits(opt.precision);
            for (int t = next.fetch_add(1); t < ov_trials; t = next.fetch_add(1))
              run_trial(t);
          });
        for (auto& th : pool) th.join();
      }
      int total = 0;
      for (int t = 0; t < ov_trials; ++t) total += agree[static_cast<size_t>(t)];
      report.measure("agree", static_cast<long>(total));
      report.check("ov3.agreement", total == ov_trials,
                   std::to_string(total) + "/" + std::to_string(ov_trials));
    } else if (*mm_gen) {
      report.command = "matmul gen";
      report.param("LH", mm_lh);
      report.param("N", mm_n);
      Rng rng(opt.seed);
      save_batch(mm_file, random_mm_batch(rng, mm_lh, mm_n));
      report.check("gen.ok", true);
    } else if (*mm_extract || *mm_verify) {
      report.command = *mm_extract ? "matmul extract" : "matmul verify";
      MatMulBatch batch;
      if (*mm_extract) {
        report.param("batch", mm_file);
        batch = load_batch(mm_file);
      } else {
        report.param("LH", mm_lh);
        report.param("N", mm_n);
        Rng rng(opt.seed);
        batch = random_mm_batch(rng, mm_lh, mm_n);
      }
      int l = mm_l <= 0 ? 1 : mm_l;
      if (batch.LH % l != 0)
        throw Error(ErrorCode::DimensionMismatch, "--L must divide LH");
      report.param("L", l);
      report.param("H", batch.LH / l);
      ExtractStats stats;
      auto products = extract_matmuls(batch, l, batch.LH / l, nullptr, &stats);
      report.measure("transformer_eac_size", static_cast<long>(stats.transformer_size));
      report.measure("gradient_eac_size", static_cast<long>(stats.grad_f_size));
      report.measure("size_ratio", static_cast<double>(stats.grad_f_size) /
                                       stats.transformer_size);
      report.check("matmul.grad_size_bound",
                   stats.grad_f_size <= 6 * stats.transformer_size + stats.inputs + 2);
      BigFloat peak(0);
      for (int k = 0; k < batch.LH; ++k) {
        Mat<BigFloat> a(batch.N, batch.N), b(batch.N, batch.N);
        for (int i = 0; i < batch.N; ++i)
          for (int j = 0; j < batch.N; ++j) {
            a(i, j) = to_bigfloat(batch.A[static_cast<size_t>(k)](i, j));
            b(i, j) = to_bigfloat(batch.B[static_cast<size_t>(k)](i, j));
          }
        Mat<BigFloat> want = a * b.transpose();
        Mat<BigFloat> diff = products[static_cast<size_t>(k)] - want;
        for (Eigen::Index i = 0; i < diff.rows(); ++i)
          for (Eigen::Index j = 0; j < diff.cols(); ++j)
            peak = std::max(peak, ScalarOps<BigFloat>::abs(diff(i, j)));
      }
      report.measure("max_abs_error", ScalarOps<BigFloat>::to_text(peak));
      report.check("matmul.recovery", peak <= BigFloat("1e-8"));
    }
  } catch (const Error& e) {
    report.check(std::string("error.") + error_code_name(e.code()), false, e.what());
    return finish(report, opt, start);
  } catch (const std::exception& e) {
    report.check("error.exception", false, e.what());
    return finish(report, opt, start);
  }
  return finish(report, opt, start);
}

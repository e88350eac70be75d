// Experiment driver: sparsity sweep, theorem checks, timing benchmark and
// single training runs for the Sparseout regularizer.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "sparseout/dataset.hpp"
#include "sparseout/experiment.hpp"

namespace {

using namespace sparseout;

struct SharedOptions {
  std::uint64_t seed = 1;
  double p = 0.5;
  double q = 2.0;
  std::size_t hidden = 128;
  std::size_t epochs = 20;
  double lr = 0.5;
  std::size_t batch = 32;
  std::string data = "synthetic";
  std::string labels;
  std::size_t samples = 2000;
  std::size_t dim = 256;
  std::string output_act = "sigmoid";
  std::string out;
};

void add_shared(CLI::App* cmd, SharedOptions& o) {
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--p", o.p, "Keep probability in (0, 1]")->capture_default_str();
  cmd->add_option("--q", o.q, "Norm exponent in (0, 4]")->capture_default_str();
  cmd->add_option("--hidden", o.hidden, "Hidden layer width")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", o.lr, "SGD learning rate")->capture_default_str();
  cmd->add_option("--batch", o.batch, "Minibatch size")->capture_default_str();
  cmd->add_option("--data", o.data, "IDX image file, or 'synthetic'")->capture_default_str();
  cmd->add_option("--labels", o.labels, "Optional IDX label file");
  cmd->add_option("--samples", o.samples, "Synthetic sample count")->capture_default_str();
  cmd->add_option("--dim", o.dim, "Synthetic feature count")->capture_default_str();
  cmd->add_option("--output-act", o.output_act, "Decoder output: sigmoid | linear")
      ->check(CLI::IsMember({"sigmoid", "linear"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "CSV output path");
}

void warn_q(double q) {
  if (auto warning = check_q_range(q)) std::cerr << "warning: " << *warning << '\n';
}

RunConfig run_config(const SharedOptions& o) {
  RunConfig cfg;
  cfg.p = o.p;
  cfg.q = o.q;
  cfg.hidden = o.hidden;
  cfg.epochs = o.epochs;
  cfg.learning_rate = o.lr;
  cfg.batch_size = o.batch;
  cfg.seed = o.seed;
  cfg.output = parse_output_activation(o.output_act);
  cfg.output_path = o.out;
  return cfg;
}

Dataset load_data(const SharedOptions& o) {
  if (o.data == "synthetic") return synthesize_dataset(o.samples, o.dim, o.seed);
  if (o.labels.empty()) return load_mnist_idx(o.data);
  return load_mnist_idx(o.data, o.labels);
}

void emit(const CsvTable& table, const std::string& path) {
  if (path.empty()) {
    std::cout << table.str();
  } else {
    std::cerr << "wrote " << table.rows() << " rows to " << path << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparseout experiments"};
  app.require_subcommand(1);

  SharedOptions train_opts;
  std::string regularizer = "sparseout";
  bool record_time = false;
  auto* train = app.add_subcommand("train", "Train one autoencoder, report per-epoch metrics");
  add_shared(train, train_opts);
  train->add_option("--regularizer", regularizer, "none | dropout | sparseout | bridgeout")
      ->check(CLI::IsMember({"none", "dropout", "sparseout", "bridgeout"}))
      ->capture_default_str();
  train->add_flag("--record-time", record_time, "Add a wall_seconds column");

  SharedOptions sweep_opts;
  std::vector<double> q_list{1.5, 2.0, 2.5};
  auto* sweep = app.add_subcommand("sparsity-sweep", "Dropout vs Sparseout Hoyer sparsity");
  add_shared(sweep, sweep_opts);
  sweep->add_option("--q-list", q_list, "Sparseout exponents (empty: Dropout only)")
      ->expected(0, -1)
      ->capture_default_str();

  SharedOptions verify_opts;
  bool corrupt_variance = false;
  auto* verify = app.add_subcommand("verify-theorems", "Check the variance and q=2 identities");
  verify->add_option("--seed", verify_opts.seed, "Random seed")->capture_default_str();
  verify->add_flag("--corrupt-variance", corrupt_variance,
                   "Negative control: inflate the closed-form variance by 10%")
      ->group("");

  SharedOptions bench_opts;
  TimingConfig bench_cfg;
  auto* bench = app.add_subcommand("timing-bench", "Per-epoch training cost per regularizer");
  add_shared(bench, bench_opts);
  bench->add_option("--hidden-sizes", bench_cfg.hidden_sizes, "Hidden widths to time")
      ->capture_default_str();
  bench->add_option("--repeats", bench_cfg.repeats, "Epochs timed per configuration (>= 3)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      warn_q(train_opts.q);
      RunConfig cfg = run_config(train_opts);
      cfg.regularizer = parse_regularizer(regularizer);
      const Dataset data = load_data(train_opts);
      const auto records = train_run(data, cfg);
      const CsvTable table = train_table(records, record_time);
      if (!cfg.output_path.empty()) table.write(cfg.output_path);
      emit(table, cfg.output_path);
    } else if (*sweep) {
      for (double q : q_list) warn_q(q);
      const RunConfig cfg = run_config(sweep_opts);
      const Dataset data = load_data(sweep_opts);
      const auto rows = cmd_sparsity_sweep(data, cfg, q_list);
      emit(sweep_table(rows), cfg.output_path);
    } else if (*verify) {
      VerifyHooks hooks;
      if (corrupt_variance) {
        hooks.analytic_variance = [](const GlmSpec& g, std::size_t i, const RegConfig& c) {
          return 1.1 * analytic_variance(g, i, c);
        };
      }
      const VerifyReport report = cmd_verify_theorems(verify_opts.seed, hooks);
      std::cout << report.text();
      return report.exit_code();
    } else if (*bench) {
      warn_q(bench_opts.q);
      bench_cfg.batch_size = bench_opts.batch;
      bench_cfg.p = bench_opts.p;
      bench_cfg.q = bench_opts.q;
      bench_cfg.seed = bench_opts.seed;
      bench_cfg.output_path = bench_opts.out;
      if (bench->count("--samples") > 0) bench_cfg.samples = bench_opts.samples;
      if (bench->count("--dim") > 0) bench_cfg.input_dim = bench_opts.dim;
      if (bench->count("--lr") > 0) bench_cfg.learning_rate = bench_opts.lr;
      if (bench->count("--batch") == 0) bench_cfg.batch_size = 128;
      const auto rows = cmd_timing_bench(bench_cfg);
      emit(timing_table(rows), bench_cfg.output_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

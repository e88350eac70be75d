#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sparseout/analysis.hpp"
#include "sparseout/csv.hpp"
#include "sparseout/dataset.hpp"
#include "sparseout/net.hpp"
#include "sparseout/regularizer.hpp"

namespace sparseout {

enum class Regularizer { none, dropout, sparseout, bridgeout };
enum class OutputActivation { sigmoid, linear };

std::string to_string(Regularizer r);
// Accepts "none", "dropout", "sparseout", "bridgeout"; InvalidInputError otherwise.
Regularizer parse_regularizer(const std::string& name);
std::string to_string(OutputActivation a);
OutputActivation parse_output_activation(const std::string& name);

// Settings for one autoencoder run.
struct RunConfig {
  Regularizer regularizer = Regularizer::sparseout;
  double p = 0.5;
  double q = 2.0;
  std::size_t hidden = 128;
  std::size_t epochs = 20;
  double learning_rate = 0.5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  OutputActivation output = OutputActivation::sigmoid;
  std::string output_path;

  void validate() const;
  RegConfig reg_config() const { return {p, q}; }
  SgdConfig sgd_config() const { return {learning_rate, batch_size, epochs}; }
};

// q must lie in (0, 4] (HyperparameterError otherwise). Returns a warning
// message when q is outside [1, 3].
std::optional<std::string> check_q_range(double q);

// input -> Linear(hidden) -> ReLU -> [regularizer] -> Linear(input) -> [sigmoid].
// Bridgeout replaces the encoder's Linear instead of adding a layer. Weights
// are drawn from Rng(cfg.seed), so runs that share a seed share their init.
struct Autoencoder {
  Network net;
  std::size_t hidden_layer;  // index of the ReLU whose output is measured
};
Autoencoder build_autoencoder(std::size_t input_dim, const RunConfig& cfg);

// Training rows first, held-out rows last (`test_fraction` of the total,
// at least one row on each side).
struct DataSplit {
  Tensor train;
  Tensor test;
};
DataSplit holdout_split(const Tensor& data, double test_fraction = 0.2);

struct EpochRecord {
  std::size_t epoch;
  double train_loss;
  double test_loss;
  double hoyer;
  double wall_seconds;
};

// Trains an autoencoder on the training split and measures held-out loss and
// hidden-layer Hoyer sparsity after every epoch.
std::vector<EpochRecord> train_run(const Dataset& data, const RunConfig& cfg);

CsvTable train_table(const std::vector<EpochRecord>& records, bool with_wall_time);

struct SweepRow {
  std::string run_label;
  std::size_t epoch;
  double loss;
  double hoyer;
};

// Label used in sweep CSVs: "dropout" or "sparseout_q=<q>".
std::string sweep_label(Regularizer r, double q);

// A Dropout run followed by one Sparseout run per q, all sharing the base
// config's seed. Writes run_label,epoch,loss,hoyer to base.output_path when
// it is non-empty.
std::vector<SweepRow> cmd_sparsity_sweep(const Dataset& data, const RunConfig& base,
                                         const std::vector<double>& q_list);
CsvTable sweep_table(const std::vector<SweepRow>& rows);

struct VerifyCase {
  std::string name;
  bool passed;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCase> cases;

  bool all_passed() const;
  int exit_code() const { return all_passed() ? 0 : 1; }
  std::string text() const;
};

using VarianceFormula = std::function<double(const GlmSpec&, std::size_t, const RegConfig&)>;

// Lets tests substitute a deliberately wrong closed form as a negative control.
struct VerifyHooks {
  VarianceFormula analytic_variance = sparseout::analytic_variance;
};

// Variance grid q in {1.5, 2, 2.5} x p in {0.3, 0.5, 0.8} (10^5 draws, 2%
// tolerance, majority of 3 seeds), the q = 2 ridge reduction, the
// mean-preservation check and Dropout/Sparseout(q=2) bitwise equivalence.
VerifyReport cmd_verify_theorems(std::uint64_t seed, const VerifyHooks& hooks = {});

struct TimingConfig {
  std::vector<std::size_t> hidden_sizes{1024, 2048};
  std::size_t batch_size = 128;
  std::size_t repeats = 3;
  std::size_t samples = 256;
  std::size_t input_dim = 784;
  double p = 0.5;
  double q = 1.5;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
  std::string output_path;
  std::vector<Regularizer> regularizers{Regularizer::none, Regularizer::dropout,
                                        Regularizer::sparseout, Regularizer::bridgeout};
};

struct TimingRow {
  std::size_t hidden;
  Regularizer regularizer;
  double median_seconds;
};

// Median wall time of one training epoch for each hidden size and
// regularizer on a fixed synthetic dataset. Requires repeats >= 3.
std::vector<TimingRow> cmd_timing_bench(const TimingConfig& cfg);
CsvTable timing_table(const std::vector<TimingRow>& rows);

double median(std::vector<double> values);

}  // namespace sparseout

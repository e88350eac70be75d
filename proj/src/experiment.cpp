#include "sparseout/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sparseout/errors.hpp"

namespace sparseout {

namespace {

constexpr std::uint64_t kTrainStreamSalt = 0x9E3779B97F4A7C15ull;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fails early, before any training, if the CSV destination is unwritable.
void probe_writable(const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
}

double eval_loss(Network& net, const Tensor& data) {
  return mse_loss(net.predict(data), data).value;
}

std::string q_text(double q) {
  std::ostringstream out;
  out << q;
  return out.str();
}

bool within_relative(double value, double reference, double tol) {
  return std::fabs(value - reference) <= tol * std::fabs(reference);
}

// Entries uniform in [-2, 2] with |x| >= 0.1.
double draw_bounded_away_from_zero(Rng& rng) {
  const double magnitude = rng.uniform(0.1, 2.0);
  return rng.bernoulli(0.5) ? magnitude : -magnitude;
}

GlmSpec random_glm(std::size_t n, std::size_t d, Rng& rng) {
  GlmSpec glm{Tensor(n, d), Tensor(d, 1), linear_curvature};
  for (auto& x : glm.design.values()) x = draw_bounded_away_from_zero(rng);
  for (auto& b : glm.beta.values()) b = draw_bounded_away_from_zero(rng);
  return glm;
}

}  // namespace

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::none: return "none";
    case Regularizer::dropout: return "dropout";
    case Regularizer::sparseout: return "sparseout";
    case Regularizer::bridgeout: return "bridgeout";
  }
  return "unknown";
}

Regularizer parse_regularizer(const std::string& name) {
  for (auto r : {Regularizer::none, Regularizer::dropout, Regularizer::sparseout,
                 Regularizer::bridgeout}) {
    if (name == to_string(r)) return r;
  }
  throw InvalidInputError("unknown regularizer '" + name + "'");
}

std::string to_string(OutputActivation a) {
  return a == OutputActivation::sigmoid ? "sigmoid" : "linear";
}

OutputActivation parse_output_activation(const std::string& name) {
  if (name == "sigmoid") return OutputActivation::sigmoid;
  if (name == "linear") return OutputActivation::linear;
  throw InvalidInputError("unknown output activation '" + name + "'");
}

void RunConfig::validate() const {
  reg_config().validate();
  SgdConfig sgd = sgd_config();
  sgd.validate();
  if (!(learning_rate > 0.0)) throw HyperparameterError("learning rate must be positive");
  if (hidden < 1) throw HyperparameterError("hidden size must be at least 1");
  if (epochs < 1) throw HyperparameterError("epochs must be at least 1");
}

std::optional<std::string> check_q_range(double q) {
  if (!(q > 0.0 && q <= 4.0)) {
    throw HyperparameterError("q must lie in (0, 4], got " + q_text(q));
  }
  if (q < 1.0 || q > 3.0) {
    return "q = " + q_text(q) + " is outside [1, 3]; large or small powers may overflow";
  }
  return std::nullopt;
}

Autoencoder build_autoencoder(std::size_t input_dim, const RunConfig& cfg) {
  cfg.validate();
  Rng init(cfg.seed);
  LinearLayer encoder = LinearLayer::glorot(input_dim, cfg.hidden, init);
  LinearLayer decoder = LinearLayer::glorot(cfg.hidden, input_dim, init);

  std::vector<std::unique_ptr<Layer>> layers;
  if (cfg.regularizer == Regularizer::bridgeout) {
    layers.push_back(std::make_unique<BridgeoutLinearLayer>(std::move(encoder), cfg.reg_config()));
  } else {
    layers.push_back(std::make_unique<LinearLayer>(std::move(encoder)));
  }
  layers.push_back(std::make_unique<ReluLayer>());
  if (cfg.regularizer == Regularizer::dropout) {
    layers.push_back(std::make_unique<DropoutLayer>(cfg.p));
  } else if (cfg.regularizer == Regularizer::sparseout) {
    layers.push_back(std::make_unique<SparseoutLayer>(cfg.reg_config()));
  }
  layers.push_back(std::make_unique<LinearLayer>(std::move(decoder)));
  if (cfg.output == OutputActivation::sigmoid) layers.push_back(std::make_unique<SigmoidLayer>());
  return {Network(std::move(layers)), 1};
}

DataSplit holdout_split(const Tensor& data, double test_fraction) {
  if (data.rows() < 2) throw InvalidInputError("holdout_split: need at least 2 rows");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidInputError("holdout_split: test fraction must lie in (0, 1)");
  }
  auto test_rows = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(data.rows())));
  test_rows = std::clamp<std::size_t>(test_rows, 1, data.rows() - 1);
  const std::size_t cut = data.rows() - test_rows;
  return {slice_rows(data, 0, cut), slice_rows(data, cut, data.rows())};
}

std::vector<EpochRecord> train_run(const Dataset& data, const RunConfig& cfg) {
  cfg.validate();
  const DataSplit split = holdout_split(data.images);
  Autoencoder ae = build_autoencoder(data.dim(), cfg);
  Rng rng(cfg.seed ^ kTrainStreamSalt);
  const SgdConfig sgd = cfg.sgd_config();

  std::vector<EpochRecord> records;
  SparsityReport sparsity;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    const double train_loss = train_epoch(ae.net, split.train, split.train, sgd, rng);
    const double wall = seconds_since(start);
    const double test_loss = eval_loss(ae.net, split.test);
    const double h = network_hoyer(ae.net, split.test, ae.hidden_layer);
    sparsity.add({epoch, h, test_loss});
    records.push_back({epoch, train_loss, test_loss, h, wall});
  }
  return records;
}

CsvTable train_table(const std::vector<EpochRecord>& records, bool with_wall_time) {
  std::vector<std::string> header{"epoch", "train_loss", "test_loss", "hoyer"};
  if (with_wall_time) header.emplace_back("wall_seconds");
  CsvTable table(std::move(header));
  for (const auto& r : records) {
    std::vector<std::string> cells{std::to_string(r.epoch), format_decimal(r.train_loss),
                                   format_decimal(r.test_loss), format_decimal(r.hoyer)};
    if (with_wall_time) cells.push_back(format_decimal(r.wall_seconds, 6));
    table.add_row(std::move(cells));
  }
  return table;
}

std::string sweep_label(Regularizer r, double q) {
  if (r == Regularizer::sparseout) return "sparseout_q=" + q_text(q);
  return to_string(r);
}

std::vector<SweepRow> cmd_sparsity_sweep(const Dataset& data, const RunConfig& base,
                                         const std::vector<double>& q_list) {
  base.validate();
  probe_writable(base.output_path);

  std::vector<RunConfig> runs;
  RunConfig dropout = base;
  dropout.regularizer = Regularizer::dropout;
  runs.push_back(dropout);
  for (double q : q_list) {
    RunConfig run = base;
    run.regularizer = Regularizer::sparseout;
    run.q = q;
    runs.push_back(run);
  }

  std::vector<SweepRow> rows;
  for (const auto& run : runs) {
    const std::string label = sweep_label(run.regularizer, run.q);
    for (const auto& rec : train_run(data, run)) {
      rows.push_back({label, rec.epoch, rec.test_loss, rec.hoyer});
    }
  }
  if (!base.output_path.empty()) sweep_table(rows).write(base.output_path);
  return rows;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable table({"run_label", "epoch", "loss", "hoyer"});
  for (const auto& r : rows) {
    table.add_row({r.run_label, std::to_string(r.epoch), format_decimal(r.loss),
                   format_decimal(r.hoyer)});
  }
  return table;
}

bool VerifyReport::all_passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const VerifyCase& c) { return c.passed; });
}

std::string VerifyReport::text() const {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const auto& c : cases) {
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name;
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << '\n';
    passed += c.passed ? 1 : 0;
  }
  out << passed << "/" << cases.size() << " checks passed\n";
  return out.str();
}

VerifyReport cmd_verify_theorems(std::uint64_t seed, const VerifyHooks& hooks) {
  constexpr std::size_t kDraws = 100000;
  constexpr double kTolerance = 0.02;
  constexpr std::size_t kSeeds = 3;
  constexpr std::size_t kFeatures = 6;

  VerifyReport report;
  const VarianceFormula& closed_form = hooks.analytic_variance;

  // L_q feature penalty: Monte-Carlo variance against the closed form.
  Rng problem_rng(seed);
  for (double q : {1.5, 2.0, 2.5}) {
    for (double p : {0.3, 0.5, 0.8}) {
      const RegConfig cfg{p, q};
      const GlmSpec glm = random_glm(1, kFeatures, problem_rng);
      const double expected = closed_form(glm, 0, cfg);
      std::size_t votes = 0;
      std::ostringstream detail;
      detail << "closed form " << expected << ", empirical";
      for (std::size_t s = 0; s < kSeeds; ++s) {
        Rng rng(seed + 1000 * (s + 1));
        const double empirical = empirical_variance(glm, 0, cfg, kDraws, rng);
        votes += within_relative(empirical, expected, kTolerance) ? 1 : 0;
        detail << ' ' << empirical;
      }
      std::ostringstream name;
      name << "variance q=" << q << " p=" << p;
      report.cases.push_back({name.str(), 2 * votes > kSeeds, detail.str()});
    }
  }

  // q = 2 reduces to the Dropout ridge form ((1-p)/p) sum_j X_ij^2 beta_j^2.
  {
    const GlmSpec glm = random_glm(4, kFeatures, problem_rng);
    bool ok = true;
    double worst = 0.0;
    for (double p : {0.3, 0.5, 0.8}) {
      const RegConfig cfg{p, 2.0};
      double penalty = 0.0;
      for (std::size_t i = 0; i < glm.design.rows(); ++i) {
        double ridge = 0.0;
        for (std::size_t j = 0; j < kFeatures; ++j) {
          const double xb = glm.design(i, j) * glm.beta[j];
          ridge += xb * xb;
        }
        ridge *= (1.0 - p) / p;
        const double v = closed_form(glm, i, cfg);
        worst = std::max(worst, std::fabs(v - ridge) / ridge);
        ok = ok && within_relative(v, ridge, 1e-12);
        penalty += 0.5 * v;
      }
      ok = ok && within_relative(quadratic_penalty(glm, cfg), penalty, 1e-12);
    }
    report.cases.push_back({"q=2 ridge specialisation", ok,
                            "max relative deviation " + format_decimal(worst, 17)});
  }

  // The perturbation is mean preserving: E[a~] = a.
  {
    constexpr std::size_t kMaskDraws = 100000;
    bool ok = true;
    std::ostringstream detail;
    for (double q : {1.5, 2.0, 2.5}) {
      Rng rng(seed + 7);
      const Tensor a(1, kMaskDraws, 1.0);
      const Tensor out = sparseout_forward(a, {0.5, q}, Mode::train, rng);
      double mean = 0.0;
      for (double v : out.values()) mean += v;
      mean /= static_cast<double>(kMaskDraws);
      ok = ok && std::fabs(mean - 1.0) <= 0.01;
      detail << " q=" << q << ":" << mean;
    }
    report.cases.push_back({"sparseout mean preservation", ok, detail.str()});
  }

  // Dropout equivalence at q = 2 on non-negative (ReLU) activations.
  {
    Rng data_rng(seed + 11);
    Tensor a(16, 32);
    for (auto& v : a.values()) v = std::max(0.0, data_rng.normal());
    Tensor upstream(16, 32);
    for (auto& v : upstream.values()) v = data_rng.normal();
    bool forward_ok = true;
    bool backward_ok = true;
    for (double p : {0.3, 0.5, 0.8, 1.0}) {
      Rng r1(seed + 13);
      Rng r2(seed + 13);
      Tensor m1, m2;
      const Tensor so = sparseout_forward(a, {p, 2.0}, Mode::train, r1, &m1);
      const Tensor dr = dropout_forward(a, p, Mode::train, r2, &m2);
      forward_ok = forward_ok && bitwise_equal(so, dr) && r1 == r2;
      backward_ok = backward_ok && bitwise_equal(sparseout_backward(upstream, a, m1, {p, 2.0}),
                                                 dropout_backward(upstream, m2));
    }
    report.cases.push_back({"dropout == sparseout(q=2) forward, bitwise", forward_ok, ""});
    report.cases.push_back({"dropout == sparseout(q=2) backward, bitwise", backward_ok, ""});
  }
  return report;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInputError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<TimingRow> cmd_timing_bench(const TimingConfig& cfg) {
  if (cfg.repeats < 3) throw InvalidInputError("timing-bench: repeats must be at least 3");
  if (cfg.hidden_sizes.empty()) throw InvalidInputError("timing-bench: no hidden sizes given");
  probe_writable(cfg.output_path);

  const Dataset data = synthesize_dataset(cfg.samples, cfg.input_dim, cfg.seed);
  std::vector<TimingRow> rows;
  for (std::size_t hidden : cfg.hidden_sizes) {
    for (Regularizer reg : cfg.regularizers) {
      RunConfig run;
      run.regularizer = reg;
      run.p = cfg.p;
      run.q = cfg.q;
      run.hidden = hidden;
      run.learning_rate = cfg.learning_rate;
      run.batch_size = cfg.batch_size;
      run.seed = cfg.seed;
      Autoencoder ae = build_autoencoder(data.dim(), run);
      Rng rng(cfg.seed ^ kTrainStreamSalt);
      const SgdConfig sgd = run.sgd_config();

      std::vector<double> times;
      for (std::size_t k = 0; k < cfg.repeats; ++k) {
        const auto start = Clock::now();
        train_epoch(ae.net, data.images, data.images, sgd, rng);
        times.push_back(seconds_since(start));
      }
      rows.push_back({hidden, reg, median(times)});
    }
  }
  if (!cfg.output_path.empty()) timing_table(rows).write(cfg.output_path);
  return rows;
}

CsvTable timing_table(const std::vector<TimingRow>& rows) {
  CsvTable table({"hidden_size", "regularizer", "median_seconds"});
  for (const auto& r : rows) {
    table.add_row({std::to_string(r.hidden), to_string(r.regularizer),
                   format_decimal(r.median_seconds, 6)});
  }
  return table;
}

}  // namespace sparseout

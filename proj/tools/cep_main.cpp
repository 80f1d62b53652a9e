// cep: command-line driver for confidence-energy structured prediction.
//
// Subcommands: calibrate, generate, corrupt, train, infer, evaluate, sweep.
// Every run writes one manifest (<out>.manifest.json) echoing the full
// configuration after defaulting, so any run can be reproduced exactly.
// Exit codes: 0 success, 2 usage error, 3 data error.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cep/conformal.hpp"
#include "cep/energy.hpp"
#include "cep/graph.hpp"
#include "cep/harness.hpp"
#include "cep/inference.hpp"
#include "cep/learning.hpp"
#include "cep/parallel.hpp"
#include "cep/rng.hpp"
#include "cep/types.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Manifest {
 public:
  Manifest(std::string command, std::string primary_out)
      : command_(std::move(command)),
        primary_out_(std::move(primary_out)),
        start_(std::chrono::steady_clock::now()) {
    doc_["command"] = command_;
    doc_["version"] = std::string(cep::kVersion);
  }

  json& config() { return doc_["config"]; }
  json& inputs() { return doc_["inputs"]; }
  json& outputs() { return doc_["outputs"]; }

  void write() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    doc_["duration_seconds"] = std::chrono::duration<double>(elapsed).count();
    const std::string path = primary_out_ + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw cep::DataError("cannot open for writing: " + path);
    out << doc_.dump(2) << "\n";
    if (!out) throw cep::DataError("write failed: " + path);
  }

 private:
  std::string command_;
  std::string primary_out_;
  std::chrono::steady_clock::time_point start_;
  json doc_;
};

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dot = path.find_last_of('.');
  const std::size_t slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix;
}

// ---------------------------------------------------------------- generate

struct GenerateOpts {
  std::string out;
  std::string out_calibration;
  std::string out_store;
  std::string out_config;
  std::string config_path;
  int n = 500;
  int n_calibration = 500;
  cep::GeneratorConfig config;
  bool seed_given = false;
};

void run_generate(const GenerateOpts& opts_in) {
  GenerateOpts opts = opts_in;
  if (!opts.config_path.empty()) {
    // the config file wins over individual shape flags; --seed still overrides
    cep::GeneratorConfig from_file = cep::load_generator_config(opts.config_path);
    if (opts.seed_given) from_file.seed = opts.config.seed;
    opts.config = from_file;
  }
  opts.config.validate();
  if (opts.out_calibration.empty()) opts.out_calibration = with_suffix(opts.out, ".calibration.json");
  if (opts.out_store.empty()) opts.out_store = with_suffix(opts.out, ".store.tsv");

  Manifest manifest("generate", opts.out);
  manifest.config()["n"] = opts.n;
  manifest.config()["n_calibration"] = opts.n_calibration;
  manifest.config()["generator"] = json::parse(cep::generator_config_to_json(opts.config));
  manifest.config()["seed"] = opts.config.seed;
  manifest.outputs()["instances"] = opts.out;
  manifest.outputs()["calibration"] = opts.out_calibration;
  manifest.outputs()["store"] = opts.out_store;

  cep::GeneratedSet set = cep::generate(opts.config, opts.n, opts.n_calibration);
  cep::save_instances(opts.out, set.instances);
  cep::save_instances(opts.out_calibration, set.calibration);
  cep::save_store(opts.out_store, set.store);
  if (!opts.out_config.empty()) {
    cep::save_generator_config(opts.out_config, opts.config);
    manifest.outputs()["generator_config"] = opts.out_config;
  }
  manifest.write();
  std::cout << "generated " << set.instances.size() << " evaluation and " << set.calibration.size()
            << " calibration instances (" << set.store.size() << " calibration records)\n";
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOpts {
  std::string in;
  std::string out;
  std::optional<double> epsilon;
  int classes = 0;      // 0: infer from data
  int node_labels = 0;
  int edge_labels = 0;
};

cep::LabelSpace infer_space(const std::vector<cep::GraphInstance>& instances,
                            const CalibrateOpts& opts) {
  cep::LabelSpace space{opts.node_labels, opts.edge_labels, opts.classes};
  int max_truth_event = -1;
  for (const cep::GraphInstance& g : instances) {
    if (space.node_labels == 0 && g.node_count() > 0) {
      space.node_labels = static_cast<int>(g.node_potentials[0].size());
    }
    if (space.edge_labels == 0 && g.edge_count() > 0) {
      space.edge_labels = static_cast<int>(g.edge_potentials[0].size());
    }
    if (space.event_classes == 0 && g.event_potential) {
      space.event_classes = static_cast<int>(g.event_potential->size());
    }
    if (g.truth) max_truth_event = std::max(max_truth_event, g.truth->event_class);
  }
  if (space.event_classes == 0) space.event_classes = max_truth_event + 1;
  if (space.node_labels == 0 || space.edge_labels == 0 || space.event_classes <= 0) {
    throw cep::DataError(
        "cannot infer label-set sizes from the input; pass --classes/--node-labels/--edge-labels");
  }
  return space;
}

void run_calibrate(const CalibrateOpts& opts) {
  Manifest manifest("calibrate", opts.out);
  manifest.inputs()["instances"] = opts.in;
  manifest.outputs()["store"] = opts.out;

  const auto instances = cep::load_instances(opts.in);
  if (instances.empty()) throw cep::DataError(opts.in + ": no training instances");
  for (const cep::GraphInstance& g : instances) {
    if (!g.truth) throw cep::DataError("instance " + g.id + " has no truth block");
  }
  const cep::LabelSpace space = infer_space(instances, opts);
  manifest.config()["node_labels"] = space.node_labels;
  manifest.config()["edge_labels"] = space.edge_labels;
  manifest.config()["event_classes"] = space.event_classes;
  if (opts.epsilon) manifest.config()["epsilon"] = *opts.epsilon;
  else manifest.config()["epsilon"] = "auto";

  cep::CalibrationStore store = cep::build_store(instances, space, opts.epsilon);
  cep::save_store(opts.out, store);
  manifest.write();

  std::cout << "calibrated " << store.size() << " records from " << instances.size()
            << " instances\n";
  const cep::Level levels[] = {cep::Level::node, cep::Level::edge, cep::Level::event};
  int warnings = 0;
  for (cep::Level level : levels) {
    const int labels = space.label_count(level);
    std::size_t records = 0;
    int groups = 0, empty = 0;
    for (int c = 0; c < space.event_classes; ++c) {
      for (int y = 0; y < labels; ++y) {
        if (level == cep::Level::event && c != y) continue;
        ++groups;
        const std::size_t n = store.group_size(level, c, y);
        records += n;
        if (n == 0) {
          ++empty;
          if (warnings < 20) {
            std::cout << "warning: empty calibration category " << cep::to_string(level)
                      << " event=" << c << " label=" << y << "\n";
            ++warnings;
          }
        }
      }
    }
    std::cout << "  " << cep::to_string(level) << ": " << records << " records across " << groups
              << " categories, " << empty << " empty\n";
  }
}

// ---------------------------------------------------------------- corrupt

struct CorruptOpts {
  std::string in;
  std::string out;
  std::string gen_config;
  double q = 0.0;
  double severity = 0.5;
  std::uint64_t seed = 0;
  std::string mode = "cern2";
};

void run_corrupt(const CorruptOpts& opts) {
  Manifest manifest("corrupt", opts.out);
  manifest.inputs()["instances"] = opts.in;
  manifest.outputs()["instances"] = opts.out;
  manifest.config()["q"] = opts.q;
  manifest.config()["severity"] = opts.severity;
  manifest.config()["seed"] = opts.seed;
  manifest.config()["mode"] = opts.mode;

  std::vector<std::vector<double>> confusion;
  if (!opts.gen_config.empty()) {
    confusion = cep::load_generator_config(opts.gen_config).resolved_confusion();
    manifest.inputs()["gen_config"] = opts.gen_config;
  }

  auto instances = cep::load_instances(opts.in);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    cep::CorruptionConfig config;
    config.probability = opts.q;
    config.severity = opts.severity;
    config.seed = cep::derive_seed(opts.seed, {i});
    config.mode = cep::parse_mode(opts.mode);
    config.confusion = confusion;
    instances[i] = cep::corrupt(instances[i], config);
  }
  cep::save_instances(opts.out, instances);
  manifest.write();
  std::cout << "corrupted " << instances.size() << " instances at q=" << opts.q << "\n";
}

// ---------------------------------------------------------------- train

struct TrainOpts {
  std::string in;
  std::string store;
  std::string out;
  std::string trace;
  std::string init;
  std::string mode = "cern2";
  bool mode_given = false;
  cep::TrainConfig config;
  double lambda_node = 1.0;
  double lambda_edge = 1.0;
  double lambda_event = 1.0;
};

void run_train(const TrainOpts& opts_in) {
  TrainOpts opts = opts_in;
  if (opts.trace.empty()) opts.trace = with_suffix(opts.out, ".trace.csv");

  Manifest manifest("train", opts.out);
  manifest.inputs()["instances"] = opts.in;
  manifest.inputs()["store"] = opts.store;
  manifest.outputs()["params"] = opts.out;
  manifest.outputs()["trace"] = opts.trace;

  const auto instances = cep::load_instances(opts.in);
  const cep::CalibrationStore store = cep::load_store(opts.store);

  cep::EnergyParams init;
  if (!opts.init.empty()) {
    init = cep::load_params(opts.init);
    if (opts.mode_given && cep::parse_mode(opts.mode) != init.mode) {
      throw UsageError("--mode conflicts with the mode stored in --init params");
    }
    manifest.inputs()["init"] = opts.init;
  } else {
    init = cep::EnergyParams::zeros(store.space(), cep::parse_mode(opts.mode));
    init.lambda_node = opts.lambda_node;
    init.lambda_edge = opts.lambda_edge;
    init.lambda_event = opts.lambda_event;
  }

  manifest.config()["mode"] = std::string(cep::to_string(init.mode));
  manifest.config()["learning_rate"] = opts.config.learning_rate;
  manifest.config()["decay"] = opts.config.decay;
  manifest.config()["batch_size"] = opts.config.batch_size;
  manifest.config()["iterations"] = opts.config.max_iterations;
  manifest.config()["train_lambdas"] = opts.config.train_lambdas;
  manifest.config()["seed"] = opts.config.seed;
  manifest.config()["lambda_node"] = init.lambda_node;
  manifest.config()["lambda_edge"] = init.lambda_edge;
  manifest.config()["lambda_event"] = init.lambda_event;

  try {
    cep::TrainResult result = cep::train(instances, init, store, opts.config);
    cep::save_params(opts.out, result.params);
    cep::save_trace_csv(opts.trace, result.loss_trace, opts.config.learning_rate);
    manifest.write();
    std::cout << "trained " << opts.config.max_iterations << " iterations; final mean batch loss "
              << (result.loss_trace.empty() ? 0.0 : result.loss_trace.back()) << "\n";
  } catch (const std::invalid_argument& e) {
    throw cep::DataError(e.what());
  } catch (const std::logic_error& e) {
    throw cep::DataError(e.what());
  }
}

// ---------------------------------------------------------------- infer

struct InferOpts {
  std::string in;
  std::string store;
  std::string params;
  std::string out;
  std::string regime = "confidence-energy";
  std::string mode;
  int threads = 1;
  std::optional<double> lambda_node;
  std::optional<double> lambda_edge;
  std::optional<double> lambda_event;
};

void run_infer(const InferOpts& opts) {
  Manifest manifest("infer", opts.out);
  manifest.inputs()["instances"] = opts.in;
  manifest.inputs()["store"] = opts.store;
  manifest.inputs()["params"] = opts.params;
  manifest.outputs()["predictions"] = opts.out;

  cep::EnergyParams params = cep::load_params(opts.params);
  if (!opts.mode.empty()) params.mode = cep::parse_mode(opts.mode);
  if (opts.lambda_node) params.lambda_node = *opts.lambda_node;
  if (opts.lambda_edge) params.lambda_edge = *opts.lambda_edge;
  if (opts.lambda_event) params.lambda_event = *opts.lambda_event;

  const cep::Regime regime = cep::parse_regime(opts.regime);
  if (regime == cep::Regime::softmax_only && params.mode == cep::Mode::cern1) {
    throw UsageError("--regime softmax requires cern2 mode (an event potential)");
  }

  manifest.config()["regime"] = opts.regime;
  manifest.config()["mode"] = std::string(cep::to_string(params.mode));
  manifest.config()["threads"] = opts.threads;
  manifest.config()["lambda_node"] = params.lambda_node;
  manifest.config()["lambda_edge"] = params.lambda_edge;
  manifest.config()["lambda_event"] = params.lambda_event;

  const auto instances = cep::load_instances(opts.in);
  const cep::CalibrationStore store = cep::load_store(opts.store);

  std::vector<cep::Prediction> predictions(instances.size());
  try {
    cep::parallel_for(instances.size(), opts.threads, [&](std::size_t i) {
      try {
        predictions[i] = cep::infer(instances[i], params, store, regime);
      } catch (const std::exception& e) {
        throw cep::DataError("instance " + instances[i].id + ": " + e.what());
      }
    });
  } catch (const cep::DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw cep::DataError(e.what());
  }
  cep::save_predictions(opts.out, predictions);
  manifest.write();
  std::cout << "inferred " << predictions.size() << " predictions (" << opts.regime << ")\n";
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string pred;
  std::string truth;
  std::string out;
  bool score_labels = false;
};

void run_evaluate(const EvaluateOpts& opts) {
  Manifest manifest("evaluate", opts.out);
  manifest.inputs()["predictions"] = opts.pred;
  manifest.inputs()["truth"] = opts.truth;
  manifest.outputs()["metrics"] = opts.out;
  manifest.config()["score_labels"] = opts.score_labels;

  const auto predictions = cep::load_predictions(opts.pred);
  const auto truths = cep::load_instances(opts.truth);
  try {
    const cep::Metrics metrics = cep::evaluate(predictions, truths);
    json j;
    j["count"] = predictions.size();
    j["mca"] = metrics.mca;
    j["mpca"] = metrics.mpca;
    if (opts.score_labels) {
      const cep::LabelMetrics labels = cep::evaluate_labels(predictions, truths);
      j["node_accuracy"] = labels.node_accuracy;
      j["edge_accuracy"] = labels.edge_accuracy;
    }
    std::ofstream out(opts.out);
    if (!out) throw cep::DataError("cannot open for writing: " + opts.out);
    out << j.dump(2) << "\n";
    manifest.write();
    std::cout << "MCA " << metrics.mca << "  MPCA " << metrics.mpca << "\n";
  } catch (const std::invalid_argument& e) {
    throw cep::DataError(e.what());
  }
}

// ---------------------------------------------------------------- sweep

struct SweepOpts {
  std::string in;
  std::string store;
  std::string params;
  std::string gen_config;
  std::string out;
  std::string summary;
  std::vector<double> q_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  double severity = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string mode = "cern2";
};

void run_sweep(const SweepOpts& opts_in) {
  SweepOpts opts = opts_in;
  if (opts.summary.empty()) opts.summary = with_suffix(opts.out, ".summary.json");

  Manifest manifest("sweep", opts.out);
  manifest.inputs()["instances"] = opts.in;
  manifest.inputs()["store"] = opts.store;
  manifest.outputs()["csv"] = opts.out;
  manifest.outputs()["summary"] = opts.summary;
  manifest.config()["q_grid"] = opts.q_grid;
  manifest.config()["severity"] = opts.severity;
  manifest.config()["seed"] = opts.seed;
  manifest.config()["threads"] = opts.threads;
  manifest.config()["mode"] = opts.mode;

  const cep::Mode mode = cep::parse_mode(opts.mode);
  if (mode == cep::Mode::cern1) {
    throw UsageError("sweep compares the softmax regime too, which needs --mode cern2");
  }

  cep::GeneratorConfig gen_config;
  if (!opts.gen_config.empty()) {
    gen_config = cep::load_generator_config(opts.gen_config);
    manifest.inputs()["gen_config"] = opts.gen_config;
  }

  cep::EnergyParams params;
  if (!opts.params.empty()) {
    params = cep::load_params(opts.params);
    manifest.inputs()["params"] = opts.params;
  } else {
    params = cep::default_sweep_params(gen_config, mode);
  }
  params.mode = mode;

  const auto instances = cep::load_instances(opts.in);
  const cep::CalibrationStore store = cep::load_store(opts.store);

  cep::SweepConfig config;
  config.severity = opts.severity;
  config.seed = opts.seed;
  config.threads = opts.threads;
  config.mode = mode;
  config.confusion = gen_config.resolved_confusion();

  std::map<cep::Regime, cep::EnergyParams> by_regime{
      {cep::Regime::softmax_only, params},
      {cep::Regime::energy_only, params},
      {cep::Regime::confidence_energy, params},
  };

  try {
    const cep::SweepReport report =
        cep::robustness_sweep(instances, by_regime, store, opts.q_grid, config);
    cep::save_sweep_csv(opts.out, report);
    cep::save_sweep_summary(opts.summary, report);
    manifest.write();
    for (const cep::SweepRow& row : report.rows) {
      std::cout << "q=" << row.q << " " << cep::to_string(row.regime) << " MCA=" << row.metrics.mca
                << " drop=" << row.drop_mca << "\n";
    }
  } catch (const std::invalid_argument& e) {
    throw cep::DataError(e.what());
  } catch (const std::runtime_error& e) {
    throw cep::DataError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confidence-energy structured prediction over class-probability potentials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cep::kVersion));

  GenerateOpts generate_opts;
  auto* generate = app.add_subcommand("generate", "generate synthetic scenes and a calibration store");
  generate->add_option("--out", generate_opts.out, "evaluation instances JSON")->required();
  generate->add_option("--out-calibration", generate_opts.out_calibration,
                       "calibration instances JSON (default: <out>.calibration.json)");
  generate->add_option("--out-store", generate_opts.out_store,
                       "calibration store TSV (default: <out>.store.tsv)");
  generate->add_option("--out-config", generate_opts.out_config, "echo the generator config JSON");
  generate->add_option("--config", generate_opts.config_path, "generator config JSON to load");
  generate->add_option("--n", generate_opts.n, "evaluation instances")->capture_default_str();
  generate->add_option("--n-calibration", generate_opts.n_calibration, "calibration instances")
      ->capture_default_str();
  generate->add_option("--classes", generate_opts.config.event_classes)->capture_default_str();
  generate->add_option("--node-labels", generate_opts.config.node_labels)->capture_default_str();
  generate->add_option("--edge-labels", generate_opts.config.edge_labels)->capture_default_str();
  generate->add_option("--min-nodes", generate_opts.config.min_nodes)->capture_default_str();
  generate->add_option("--max-nodes", generate_opts.config.max_nodes)->capture_default_str();
  generate->add_option("--edge-density", generate_opts.config.edge_density)->capture_default_str();
  generate->add_option("--signal", generate_opts.config.signal_strength, "signal strength in (0,1]")
      ->capture_default_str();
  auto* gen_seed = generate->add_option("--seed", generate_opts.config.seed)->capture_default_str();
  generate->callback([&] {
    generate_opts.seed_given = gen_seed->count() > 0;
    run_generate(generate_opts);
  });

  CalibrateOpts calibrate_opts;
  double calibrate_epsilon = -1.0;
  auto* calibrate = app.add_subcommand("calibrate", "build a calibration store from training instances");
  calibrate->add_option("--in", calibrate_opts.in, "instances JSON with truth blocks")->required();
  calibrate->add_option("--out", calibrate_opts.out, "store TSV")->required();
  auto* eps_opt = calibrate->add_option("--epsilon", calibrate_epsilon, "fixed p-value floor (default: auto)");
  calibrate->add_option("--classes", calibrate_opts.classes, "event classes (default: infer)");
  calibrate->add_option("--node-labels", calibrate_opts.node_labels, "(default: infer)");
  calibrate->add_option("--edge-labels", calibrate_opts.edge_labels, "(default: infer)");
  calibrate->callback([&] {
    if (eps_opt->count() > 0) calibrate_opts.epsilon = calibrate_epsilon;
    run_calibrate(calibrate_opts);
  });

  CorruptOpts corrupt_opts;
  auto* corrupt = app.add_subcommand("corrupt", "corrupt potential rows toward adversarial labels");
  corrupt->add_option("--in", corrupt_opts.in)->required();
  corrupt->add_option("--out", corrupt_opts.out)->required();
  corrupt->add_option("--q", corrupt_opts.q, "per-row corruption probability")->required();
  corrupt->add_option("--severity", corrupt_opts.severity)->capture_default_str();
  corrupt->add_option("--seed", corrupt_opts.seed)->capture_default_str();
  corrupt->add_option("--mode", corrupt_opts.mode, "cern1|cern2")->capture_default_str();
  corrupt->add_option("--gen-config", corrupt_opts.gen_config,
                      "generator config JSON (confusion map for the event recompute)");
  corrupt->callback([&] { run_corrupt(corrupt_opts); });

  TrainOpts train_opts;
  auto* train = app.add_subcommand("train", "train energy weights with the margin loss");
  train->add_option("--in", train_opts.in, "training instances JSON")->required();
  train->add_option("--store", train_opts.store, "calibration store TSV")->required();
  train->add_option("--out", train_opts.out, "trained params JSON")->required();
  train->add_option("--trace", train_opts.trace, "loss trace CSV (default: <out>.trace.csv)");
  train->add_option("--init", train_opts.init, "initial params JSON (default: zeros)");
  auto* train_mode = train->add_option("--mode", train_opts.mode, "cern1|cern2")->capture_default_str();
  train->add_option("--lr", train_opts.config.learning_rate)->capture_default_str();
  train->add_option("--decay", train_opts.config.decay)->capture_default_str();
  train->add_option("--batch-size", train_opts.config.batch_size)->capture_default_str();
  train->add_option("--iterations", train_opts.config.max_iterations)->capture_default_str();
  train->add_flag("--train-lambdas", train_opts.config.train_lambdas,
                  "also train the confidence multipliers");
  train->add_option("--seed", train_opts.config.seed)->capture_default_str();
  train->add_option("--lambda-node", train_opts.lambda_node, "initial lambda when starting from zeros")
      ->capture_default_str();
  train->add_option("--lambda-edge", train_opts.lambda_edge)->capture_default_str();
  train->add_option("--lambda-event", train_opts.lambda_event)->capture_default_str();
  train->callback([&] {
    train_opts.mode_given = train_mode->count() > 0;
    run_train(train_opts);
  });

  InferOpts infer_opts;
  double infer_lambda_node = 0.0, infer_lambda_edge = 0.0, infer_lambda_event = 0.0;
  auto* infer = app.add_subcommand("infer", "predict event, action and interaction labels");
  infer->add_option("--in", infer_opts.in)->required();
  infer->add_option("--store", infer_opts.store)->required();
  infer->add_option("--params", infer_opts.params)->required();
  infer->add_option("--out", infer_opts.out, "predictions JSON")->required();
  infer->add_option("--regime", infer_opts.regime, "softmax|energy|confidence-energy")
      ->capture_default_str();
  infer->add_option("--mode", infer_opts.mode, "override the params mode (cern1|cern2)");
  infer->add_option("--threads", infer_opts.threads)->capture_default_str();
  auto* iln = infer->add_option("--lambda-node", infer_lambda_node, "override lambda_node");
  auto* ile = infer->add_option("--lambda-edge", infer_lambda_edge, "override lambda_edge");
  auto* ilv = infer->add_option("--lambda-event", infer_lambda_event, "override lambda_event");
  infer->callback([&] {
    if (iln->count() > 0) infer_opts.lambda_node = infer_lambda_node;
    if (ile->count() > 0) infer_opts.lambda_edge = infer_lambda_edge;
    if (ilv->count() > 0) infer_opts.lambda_event = infer_lambda_event;
    run_infer(infer_opts);
  });

  EvaluateOpts evaluate_opts;
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  evaluate->add_option("--pred", evaluate_opts.pred, "predictions JSON")->required();
  evaluate->add_option("--truth", evaluate_opts.truth, "instances JSON with truth")->required();
  evaluate->add_option("--out", evaluate_opts.out, "metrics JSON")->required();
  evaluate->add_flag("--score-labels", evaluate_opts.score_labels,
                     "also score node/edge labels (latent by default)");
  evaluate->callback([&] { run_evaluate(evaluate_opts); });

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "accuracy-vs-corruption curves for all regimes");
  sweep->add_option("--in", sweep_opts.in, "evaluation instances JSON")->required();
  sweep->add_option("--store", sweep_opts.store)->required();
  sweep->add_option("--out", sweep_opts.out, "report CSV")->required();
  sweep->add_option("--summary", sweep_opts.summary, "summary JSON (default: <out>.summary.json)");
  sweep->add_option("--params", sweep_opts.params,
                    "params JSON (default: weights derived from the confusion map)");
  sweep->add_option("--gen-config", sweep_opts.gen_config, "generator config JSON");
  sweep->add_option("--q-grid", sweep_opts.q_grid, "comma-separated corruption probabilities")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--severity", sweep_opts.severity)->capture_default_str();
  sweep->add_option("--seed", sweep_opts.seed)->capture_default_str();
  sweep->add_option("--threads", sweep_opts.threads)->capture_default_str();
  sweep->add_option("--mode", sweep_opts.mode, "cern1|cern2")->capture_default_str();
  sweep->callback([&] { run_sweep(sweep_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const cep::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

//
// Copyright 2026 The dpsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command line driver: train, generate, report, eval.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error. Diagnostics go to
// stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpsynth/dataset.hpp"
#include "dpsynth/eval.hpp"
#include "dpsynth/mlp.hpp"
#include "dpsynth/training.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string FormatIterFile(const char* stem, int iteration, const char* ext) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%s_%06d.%s", stem, iteration, ext);
  return buffer;
}

int RunTrain(const std::string& preset, const std::string& config_path,
             const std::string& data_path, const std::string& out_dir,
             const std::string& label, std::optional<uint64_t> seed,
             std::optional<int> iterations, std::optional<int> dump_tallies) {
  dpsynth::TrainConfig config = dpsynth::PresetConfig(preset);
  if (!config_path.empty()) {
    config = dpsynth::ParseConfigFile(config_path, config);
  }
  if (seed) config.seed = *seed;
  if (iterations) config.max_iterations = *iterations;
  if (dump_tallies) config.dump_tally_every = *dump_tallies;
  if (label.empty()) config.conditional = false;

  const dpsynth::TabularDataset dataset = dpsynth::LoadCsv(data_path, label);

  const fs::path run_dir(out_dir);
  fs::create_directories(run_dir);
  if (config.checkpoint_every > 0) {
    fs::create_directories(run_dir / "checkpoints");
  }
  if (config.dump_tally_every > 0) {
    fs::create_directories(run_dir / "tallies");
  }

  {
    std::ofstream config_out(run_dir / "config.txt");
    config_out << dpsynth::ConfigToString(config);
  }

  std::ofstream log(run_dir / "run.log");
  dpsynth::TrainCallbacks callbacks;
  callbacks.on_iteration = [&](const dpsynth::IterationMetrics& metrics) {
    log << dpsynth::RunLogLine(metrics) << '\n';
  };
  callbacks.on_checkpoint = [&](int iteration, const dpsynth::Mlp& generator) {
    dpsynth::SaveMlp(generator, run_dir / "checkpoints" /
                                  FormatIterFile("iter", iteration, "json"));
  };
  callbacks.on_tally = [&](int iteration, const dpsynth::VoteTally& tally) {
    std::ofstream out(run_dir / "tallies" /
                      FormatIterFile("iter", iteration, "csv"));
    out << dpsynth::TallyToCsv(tally);
  };

  const dpsynth::TrainResult result = dpsynth::Train(config, dataset, callbacks);
  log.close();

  dpsynth::SaveMlp(result.generator, run_dir / "generator.json");
  dpsynth::SaveScaler(run_dir / "scaler.json", dataset.scaler,
                      dataset.feature_names, dataset.label_name,
                      dataset.num_classes);
  if (config.conditional) {
    nlohmann::ordered_json ratios;
    ratios["class_ratios"] = result.state.class_ratios;
    std::ofstream out(run_dir / "ratios.json");
    out << ratios.dump(2) << '\n';
  }
  result.state.ledger.WriteReport(run_dir / "privacy_report.json",
                                  config.delta);

  std::cout << "iterations: " << result.state.iterations << '\n'
            << "epsilon: " << result.state.guarantee.epsilon << '\n'
            << "delta: " << result.state.guarantee.delta << '\n'
            << "stopped_on_budget: "
            << (result.state.stopped_on_budget ? "true" : "false") << '\n';
  return 0;
}

int RunGenerate(const std::string& run_dir_str, std::size_t count,
                const std::string& out_csv, uint64_t seed) {
  const fs::path run_dir(run_dir_str);
  const dpsynth::Mlp generator = dpsynth::LoadMlp(run_dir / "generator.json");
  const dpsynth::ScalerFile scaler = dpsynth::LoadScaler(run_dir / "scaler.json");

  std::vector<double> ratios;
  const fs::path ratios_path = run_dir / "ratios.json";
  if (fs::exists(ratios_path)) {
    std::ifstream in(ratios_path);
    json doc;
    in >> doc;
    ratios = doc.at("class_ratios").get<std::vector<double>>();
  }

  const dpsynth::SyntheticBatch batch =
      dpsynth::Generate(generator, count, ratios, seed);
  dpsynth::WriteSyntheticCsv(out_csv, scaler.feature_names,
                             ratios.empty() ? std::string{} : scaler.label_name,
                             scaler.scaler, batch.records, batch.labels);
  std::cout << "wrote " << batch.records.size() << " records to " << out_csv
            << '\n';
  return 0;
}

std::string JsonNumberOrDash(const json& value) {
  if (value.is_null()) return "-";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value.get<double>());
  return buffer;
}

int RunReport(const std::string& run_dir_str, double fallback_delta) {
  const fs::path report_path = fs::path(run_dir_str) / "privacy_report.json";
  if (!fs::exists(report_path)) {
    // Nothing was queried yet.
    std::cout << "epsilon: 0\n" << "delta: " << fallback_delta << '\n';
    return 0;
  }
  std::ifstream in(report_path);
  json report;
  in >> report;
  const json& final = report.at("final");
  std::cout << "epsilon: " << JsonNumberOrDash(final.at("epsilon")) << '\n'
            << "delta: " << JsonNumberOrDash(final.at("delta")) << '\n'
            << "witness_order: " << JsonNumberOrDash(final.at("witness_order"))
            << '\n'
            << "laplace_extra: " << JsonNumberOrDash(final.at("laplace_extra"))
            << '\n';
  const json& queries = report.at("queries");
  std::cout << "queries: " << queries.size() << '\n';
  std::cout << "id\tkind\tsigma\tlambda\tepsilon_rdp\n";
  for (const json& query : queries) {
    std::cout << query.at("id").get<std::string>() << '\t'
              << query.at("kind").get<std::string>() << '\t'
              << JsonNumberOrDash(query.at("sigma")) << '\t'
              << JsonNumberOrDash(query.at("lambda")) << '\t'
              << JsonNumberOrDash(query.at("epsilon_rdp")) << '\n';
  }
  return 0;
}

int RunEval(const std::string& synthetic_csv, const std::string& real_csv,
            const std::string& label, const std::string& classifier,
            uint64_t seed) {
  const dpsynth::TabularDataset synthetic = dpsynth::LoadCsv(synthetic_csv, label);
  const dpsynth::TabularDataset real = dpsynth::LoadCsv(real_csv, label);
  const dpsynth::EvalReport report =
      dpsynth::EvalDownstream(synthetic, real, classifier, seed);
  std::cout << report.ToJson().dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic data toolkit"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a private generator");
  std::string train_preset = "toy";
  std::string train_config, train_data, train_out, train_label;
  std::optional<uint64_t> train_seed;
  std::optional<int> train_iterations;
  std::optional<int> train_dump_tallies;
  train->add_option("--preset", train_preset,
                    "Preset: toy, credit, mnist-eps1, mnist-eps10");
  train->add_option("--config", train_config, "Config file (key = value)");
  train->add_option("--data", train_data, "Training CSV")->required();
  train->add_option("--out", train_out, "Run directory")->required();
  train->add_option("--label", train_label,
                    "Label column name (omit for unconditional)");
  train->add_option("--seed", train_seed, "Master seed override");
  train->add_option("--iterations", train_iterations,
                    "Iteration cap override");
  train->add_option("--dump-tallies", train_dump_tallies,
                    "Dump a vote tally CSV every N iterations");

  // generate
  auto* generate = app.add_subcommand("generate", "Sample synthetic records");
  std::string gen_run, gen_out;
  std::size_t gen_count = 0;
  uint64_t gen_seed = 1;
  generate->add_option("--run", gen_run, "Run directory")->required();
  generate->add_option("--count", gen_count, "Number of records")->required();
  generate->add_option("--out", gen_out, "Output CSV")->required();
  generate->add_option("--seed", gen_seed, "Sampling seed");

  // report
  auto* report = app.add_subcommand("report", "Print the privacy report");
  std::string report_run;
  double report_delta = 1e-5;
  uint64_t report_seed = 0;
  report->add_option("--run", report_run, "Run directory")->required();
  report->add_option("--delta", report_delta,
                     "Delta shown when no report exists yet");
  report->add_option("--seed", report_seed, "Unused; accepted for symmetry");

  // eval
  auto* eval = app.add_subcommand("eval", "Train-on-synthetic test-on-real");
  std::string eval_synthetic, eval_real, eval_label;
  std::string eval_classifier = "logistic-regression";
  uint64_t eval_seed = 1;
  eval->add_option("--synthetic", eval_synthetic, "Synthetic CSV")->required();
  eval->add_option("--real", eval_real, "Real test CSV")->required();
  eval->add_option("--label", eval_label, "Label column name")->required();
  eval->add_option("--classifier", eval_classifier,
                   "Downstream classifier (logistic-regression)");
  eval->add_option("--seed", eval_seed, "Evaluation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }

  try {
    if (train->parsed()) {
      return RunTrain(train_preset, train_config, train_data, train_out,
                      train_label, train_seed, train_iterations,
                      train_dump_tallies);
    }
    if (generate->parsed()) {
      return RunGenerate(gen_run, gen_count, gen_out, gen_seed);
    }
    if (report->parsed()) {
      return RunReport(report_run, report_delta);
    }
    if (eval->parsed()) {
      return RunEval(eval_synthetic, eval_real, eval_label, eval_classifier,
                     eval_seed);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

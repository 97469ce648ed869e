// hecbench: generate data, train the tiered detectors, train the selection
// policy, evaluate the five offloading schemes, and serve/probe live nodes.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "hec/config.hpp"
#include "hec/data/csv.hpp"
#include "hec/data/io.hpp"
#include "hec/policy/policy.hpp"
#include "hec/sim/schemes.hpp"
#include "hec/wire/client.hpp"
#include "hec/wire/node.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitRuntime = 4;

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop.store(true); }

struct CommonOptions {
  std::string config_path;
  std::string output_override;
  std::optional<std::uint64_t> seed_override;
  bool force = false;
};

hec::ExperimentConfig load_config(const CommonOptions& opts) {
  hec::ExperimentConfig cfg = hec::load_experiment_config(opts.config_path);
  if (!opts.output_override.empty()) cfg.output_dir = opts.output_override;
  return cfg;
}

std::vector<hec::data::Window> build_raw_windows(const hec::ExperimentConfig& cfg) {
  hec::data::LabeledSeries series;
  if (cfg.csv) {
    series.kind = cfg.kind;
    series.values = hec::data::ingest_csv(cfg.csv->path, cfg.csv->dims);
    std::fprintf(stderr, "ingested %ld rows from %s\n", static_cast<long>(series.values.rows()),
                 cfg.csv->path.string().c_str());
  } else if (cfg.kind == hec::DatasetKind::univariate) {
    series = hec::data::synth_univariate(cfg.synthetic);
  } else {
    series = hec::data::synth_multivariate(cfg.synthetic);
  }
  const int len = cfg.kind == hec::DatasetKind::univariate ? hec::data::kPointsPerDay
                                                           : hec::data::kMultivariateWindowLen;
  const int step = cfg.kind == hec::DatasetKind::univariate ? hec::data::kPointsPerDay
                                                            : hec::data::kMultivariateWindowStep;
  return hec::data::make_windows(series, len, step);
}

hec::data::DatasetBundle load_dataset_or_die(const hec::ExperimentConfig& cfg) {
  const fs::path dir = hec::dataset_dir(cfg);
  if (!fs::exists(dir / "manifest.json")) {
    throw hec::ArtifactError("dataset bundle missing at " + dir.string() +
                             "; run `hecbench generate-data` first");
  }
  return hec::data::load_dataset(dir);
}

std::array<hec::detectors::DetectorArtifact, hec::kNumLayers> load_suite_or_die(
    const hec::ExperimentConfig& cfg) {
  std::array<hec::detectors::DetectorArtifact, hec::kNumLayers> suite;
  for (int l = 0; l < hec::kNumLayers; ++l) {
    const fs::path path = hec::bundle_path(cfg, static_cast<hec::Layer>(l));
    if (!fs::exists(path)) {
      throw hec::ArtifactError("detector bundle missing at " + path.string() +
                               "; run `hecbench train` first");
    }
    suite[l] = hec::detectors::load_bundle(path);
  }
  return suite;
}

int cmd_generate_data(const CommonOptions& opts) {
  hec::ExperimentConfig cfg = load_config(opts);
  if (opts.seed_override) cfg.synthetic.seed = *opts.seed_override;
  const fs::path dir = hec::dataset_dir(cfg);
  if (fs::exists(dir / "manifest.json") && !opts.force) {
    std::fprintf(stderr, "dataset already exists at %s (use --force to regenerate)\n",
                 dir.string().c_str());
    return kExitOk;
  }
  const auto raw = build_raw_windows(cfg);
  const hec::data::DatasetBundle bundle =
      hec::data::split_windows(raw, cfg.kind, cfg.split, cfg.split_seed);
  hec::data::save_dataset(dir, bundle,
                          {cfg.synthetic.seed, cfg.split_seed, cfg.split});
  for (int c : bundle.constant_channels) {
    std::fprintf(stderr, "warning: channel %d is constant; std treated as 1\n", c);
  }
  std::fprintf(stderr,
               "dataset written to %s (ad_train %zu, ad_test %zu, policy_train %zu, "
               "policy_test %zu)\n",
               dir.string().c_str(), bundle.ad_train.size(), bundle.ad_test.size(),
               bundle.policy_train.size(), bundle.policy_test.size());
  return kExitOk;
}

int cmd_train(const CommonOptions& opts) {
  hec::ExperimentConfig cfg = load_config(opts);
  if (opts.seed_override) cfg.detector_seed = *opts.seed_override;
  const hec::data::DatasetBundle dataset = load_dataset_or_die(cfg);

  std::vector<hec::detectors::DetectorSpec> specs;
  for (int l = 0; l < hec::kNumLayers; ++l) specs.push_back(cfg.detector_spec(static_cast<hec::Layer>(l)));
  hec::detectors::validate_detector_suite(specs);

  std::array<std::exception_ptr, hec::kNumLayers> errors{};
  std::vector<std::thread> workers;
  for (int l = 0; l < hec::kNumLayers; ++l) {
    const auto layer = static_cast<hec::Layer>(l);
    const fs::path path = hec::bundle_path(cfg, layer);
    if (fs::exists(path) && !opts.force) {
      std::fprintf(stderr, "%s: bundle exists, skipping (use --force)\n",
                   std::string(to_string(layer)).c_str());
      continue;
    }
    workers.emplace_back([&, l, layer, path] {
      try {
        hec::detectors::TrainLog log;
        hec::detectors::DetectorArtifact artifact;
        artifact.spec = specs[l];
        artifact.params = hec::detectors::train_detector(
            artifact.spec, dataset.ad_train, cfg.detector_seed + static_cast<std::uint64_t>(l),
            &log);
        artifact.error_model =
            hec::detectors::fit_error_model(artifact.params, artifact.spec, dataset.ad_train);
        hec::detectors::save_bundle(path, artifact);
        std::fprintf(stderr, "%s: %zu params, first-epoch loss %.6f, last %.6f -> %s\n",
                     std::string(to_string(layer)).c_str(), artifact.params.count(),
                     log.epoch_loss.front(), log.epoch_loss.back(), path.string().c_str());
      } catch (...) {
        errors[l] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return kExitOk;
}

int cmd_train_policy(const CommonOptions& opts) {
  hec::ExperimentConfig cfg = load_config(opts);
  if (opts.seed_override) cfg.policy_seed = *opts.seed_override;
  const fs::path ckpt = hec::policy_checkpoint_path(cfg);
  if (fs::exists(ckpt) && !opts.force) {
    std::fprintf(stderr, "policy checkpoint exists at %s (use --force)\n", ckpt.string().c_str());
    return kExitOk;
  }
  const hec::data::DatasetBundle dataset = load_dataset_or_die(cfg);
  const auto suite = load_suite_or_die(cfg);

  const auto samples = hec::policy::build_bandit_samples(dataset.policy_train, suite, cfg.delay,
                                                         cfg.kind, cfg.confidence);
  if (samples.empty()) throw hec::DataError("policy training set is empty");
  const int input_dim = static_cast<int>(samples.front().context.features.size());
  hec::policy::PolicyTrainResult result = hec::policy::train_policy(
      samples, cfg.policy, hec::policy::PolicyParams::init(input_dim, cfg.policy_seed),
      cfg.policy_seed);
  hec::policy::save_policy(ckpt, result.params, cfg.kind);

  const fs::path curve_path = hec::policy_curve_path(cfg);
  std::ofstream curve(curve_path);
  if (!curve) throw hec::ArtifactError("cannot write " + curve_path.string());
  curve << "epoch,mean_reward,baseline\n";
  for (const auto& point : result.curve) {
    char line[128];
    std::snprintf(line, sizeof(line), "%d,%.10g,%.10g\n", point.epoch, point.mean_reward,
                  point.baseline);
    curve << line;
  }
  std::fprintf(stderr, "policy trained on %zu samples for %d epochs; reward %.4f -> %.4f\n",
               samples.size(), cfg.policy.epochs, result.curve.front().mean_reward,
               result.curve.back().mean_reward);
  return kExitOk;
}

std::string format_reward(const std::optional<double>& reward) {
  if (!reward) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *reward);
  return buf;
}

int cmd_evaluate(const CommonOptions& opts, const std::string& scheme_arg) {
  hec::ExperimentConfig cfg = load_config(opts);
  const hec::data::DatasetBundle dataset = load_dataset_or_die(cfg);
  const auto suite = load_suite_or_die(cfg);

  std::vector<hec::sim::Scheme> schemes;
  if (scheme_arg == "all") {
    schemes = cfg.schemes;
  } else {
    schemes.push_back(hec::sim::scheme_from_string(scheme_arg));
  }

  std::optional<hec::policy::PolicyParams> policy_params;
  const bool needs_policy =
      std::any_of(schemes.begin(), schemes.end(),
                  [](hec::sim::Scheme s) { return s == hec::sim::Scheme::adaptive; });
  if (needs_policy) {
    const fs::path ckpt = hec::policy_checkpoint_path(cfg);
    if (!fs::exists(ckpt)) {
      throw hec::ArtifactError("policy checkpoint missing at " + ckpt.string() +
                               "; run `hecbench train-policy` first");
    }
    auto [params, kind] = hec::policy::load_policy(ckpt);
    if (kind != cfg.kind) throw hec::ArtifactError("policy checkpoint is for the other dataset kind");
    policy_params = std::move(params);
  }

  const fs::path dir = hec::eval_dir(cfg);
  fs::create_directories(dir);
  json summary;
  summary["dataset_kind"] = std::string(to_string(cfg.kind));
  summary["alpha"] = cfg.policy.reward.alpha;
  summary["windows"] = dataset.policy_test.size();

  std::printf("%-12s %-8s %-12s %-11s %s\n", "Scheme", "F1", "Accuracy(%)", "Delay(ms)",
              "Reward");
  for (const auto scheme : schemes) {
    const hec::sim::EpisodeResult result = hec::sim::run_scheme(
        scheme, dataset.policy_test, suite, policy_params ? &*policy_params : nullptr, cfg.delay,
        cfg.policy.reward, cfg.kind, cfg.confidence);
    const std::string name(to_string(scheme));

    std::ofstream csv(dir / (name + ".csv"));
    csv << "id,truth,verdict,layer,delay_ms,reward\n";
    std::ofstream plot(dir / (name + "_plot.csv"));
    plot << "window_index,delay_ms,action\n";
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      const auto& rec = result.records[i];
      char line[160];
      if (rec.reward) {
        std::snprintf(line, sizeof(line), "%ld,%d,%d,%s,%.10g,%.10g\n", rec.window_id,
                      rec.truth ? 1 : 0, rec.verdict ? 1 : 0,
                      std::string(to_string(rec.final_layer)).c_str(), rec.delay_ms, *rec.reward);
      } else {
        std::snprintf(line, sizeof(line), "%ld,%d,%d,%s,%.10g,\n", rec.window_id,
                      rec.truth ? 1 : 0, rec.verdict ? 1 : 0,
                      std::string(to_string(rec.final_layer)).c_str(), rec.delay_ms);
      }
      csv << line;
      char plot_line[96];
      std::snprintf(plot_line, sizeof(plot_line), "%zu,%.10g,%d\n", i, rec.delay_ms,
                    static_cast<int>(rec.final_layer));
      plot << plot_line;
    }

    const auto& m = result.metrics;
    std::printf("%-12s %-8.3f %-12.2f %-11.2f %s%s\n", name.c_str(), m.f1, m.accuracy_pct,
                m.mean_delay_ms, format_reward(m.mean_reward).c_str(),
                m.f1_degenerate ? "  (no positives: F1 degenerate)" : "");
    summary["schemes"][name] = {
        {"f1", m.f1},
        {"f1_degenerate", m.f1_degenerate},
        {"accuracy_pct", m.accuracy_pct},
        {"mean_delay_ms", m.mean_delay_ms},
        {"mean_reward", m.mean_reward ? json(*m.mean_reward) : json(nullptr)},
        {"tp", m.tp},
        {"fp", m.fp},
        {"fn", m.fn},
        {"tn", m.tn},
    };
  }

  std::ofstream summary_json(dir / "summary.json");
  summary_json << summary.dump(1) << "\n";
  std::ofstream table(dir / "summary.txt");
  table << "Scheme        F1       Accuracy(%)  Delay(ms)    Reward\n";
  for (const auto& [name, s] : summary["schemes"].items()) {
    char line[160];
    const std::string reward_str =
        s["mean_reward"].is_null() ? "N/A" : format_reward(s["mean_reward"].get<double>());
    std::snprintf(line, sizeof(line), "%-13s %-8.3f %-12.2f %-12.2f %s\n", name.c_str(),
                  s["f1"].get<double>(), s["accuracy_pct"].get<double>(),
                  s["mean_delay_ms"].get<double>(), reward_str.c_str());
    table << line;
  }
  std::fprintf(stderr, "evaluation written to %s\n", dir.string().c_str());
  return kExitOk;
}

hec::wire::NodeConfig parse_node_config(const fs::path& path, fs::path* bundle_out) {
  std::ifstream in(path);
  if (!in) throw hec::ArtifactError("cannot read node config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw hec::ConfigError(std::string("node config is not valid JSON: ") + e.what());
  }
  hec::wire::NodeConfig cfg;
  if (!j.contains("role")) throw hec::ConfigError("node config needs a role");
  cfg.role = hec::layer_from_string(j["role"].get<std::string>());
  cfg.listen_host = j.value("listen_host", std::string("127.0.0.1"));
  cfg.listen_port = j.value("listen_port", 0);
  if (j.contains("upstream_host")) cfg.upstream_host = j["upstream_host"].get<std::string>();
  if (j.contains("upstream_port")) cfg.upstream_port = j["upstream_port"].get<std::uint16_t>();
  cfg.link_delay_ms = j.value("link_delay_ms", 0.0);
  if (!j.contains("bundle")) throw hec::ConfigError("node config needs a bundle path");
  cfg.bundle_path = j["bundle"].get<std::string>();
  if (bundle_out) *bundle_out = cfg.bundle_path;
  cfg.validate();
  return cfg;
}

int cmd_serve(const std::string& node_config_path, const std::string& port_file) {
  const hec::wire::NodeConfig cfg = parse_node_config(node_config_path, nullptr);
  hec::wire::Node node(cfg);
  node.start();
  if (!port_file.empty()) {
    std::ofstream out(port_file);
    out << node.port() << "\n";
  }
  std::fprintf(stderr, "%s node listening on %s:%u\n",
               std::string(to_string(cfg.role)).c_str(), cfg.listen_host.c_str(), node.port());
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  node.stop();
  std::fprintf(stderr, "node stopped\n");
  return kExitOk;
}

int cmd_probe(const std::string& address, const std::string& dataset_path,
              const std::string& partition, long index, double link_delay_ms, long timeout_ms) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw hec::ConfigError("address must be host:port");
  const std::string host = address.substr(0, colon);
  const int port = std::stoi(address.substr(colon + 1));
  if (port < 1 || port > 65535) throw hec::ConfigError("bad port");

  const hec::data::DatasetBundle dataset = hec::data::load_dataset(dataset_path);
  const std::vector<hec::data::Window>* windows = nullptr;
  if (partition == "ad_train") windows = &dataset.ad_train;
  if (partition == "ad_test") windows = &dataset.ad_test;
  if (partition == "policy_train") windows = &dataset.policy_train;
  if (partition == "policy_test") windows = &dataset.policy_test;
  if (!windows) throw hec::ConfigError("unknown partition " + partition);
  if (index < 0 || index >= static_cast<long>(windows->size())) {
    throw hec::ConfigError("window index out of range (partition has " +
                           std::to_string(windows->size()) + " windows)");
  }
  const auto result = hec::wire::client_detect(host, static_cast<std::uint16_t>(port),
                                               (*windows)[index], link_delay_ms,
                                               std::chrono::milliseconds(timeout_ms));
  json out{{"id", result.verdict.window_id},
           {"anomaly", result.verdict.anomaly},
           {"confident", result.verdict.confident},
           {"layer", std::string(to_string(result.verdict.layer))},
           {"min_logpd", result.verdict.min_logpd},
           {"anomalous_fraction", result.verdict.anomalous_fraction},
           {"measured_ms", result.wall_ms},
           {"truth", (*windows)[index].is_anomalous()}};
  if (result.verdict.error) out["error"] = *result.verdict.error;
  std::printf("%s\n", out.dump(1).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiered anomaly detection workbench: detectors, bandit policy, schemes"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string scheme_arg = "all";
  std::string node_config_path, port_file;
  std::string address, dataset_path, partition = "policy_test";
  long probe_index = 0;
  double probe_link_delay = 0.0;
  long probe_timeout = 10000;
  std::uint64_t seed_value = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    auto* config_opt = cmd->add_option("--config", opts.config_path, "Experiment config (JSON)");
    if (needs_config) config_opt->required();
    cmd->add_option("--output", opts.output_override, "Override the config's output_dir");
    cmd->add_flag("--force", opts.force, "Overwrite existing artifacts");
    cmd->add_option("--seed", seed_value, "Override the command's primary seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  auto* generate = app.add_subcommand("generate-data", "Synthesize or ingest the dataset bundle");
  add_common(generate);
  auto* train = app.add_subcommand("train", "Train the three tier detectors");
  add_common(train);
  auto* train_policy = app.add_subcommand("train-policy", "Train the layer-selection policy");
  add_common(train_policy);
  auto* evaluate = app.add_subcommand("evaluate", "Run offloading schemes and report metrics");
  add_common(evaluate);
  evaluate->add_option("--scheme", scheme_arg, "Scheme name or 'all'");

  auto* serve = app.add_subcommand("serve", "Run one tier as a long-lived TCP node");
  serve->add_option("--node-config", node_config_path, "Node config (JSON)")->required();
  serve->add_option("--port-file", port_file, "Write the bound port to this file");

  auto* probe = app.add_subcommand("probe", "Send one window to a running node");
  probe->add_option("--address", address, "host:port of the entry node")->required();
  probe->add_option("--dataset", dataset_path, "Dataset bundle directory")->required();
  probe->add_option("--partition", partition, "Partition to draw the window from");
  probe->add_option("--index", probe_index, "Window index within the partition");
  probe->add_option("--link-delay", probe_link_delay, "Injected one-way delay in ms");
  probe->add_option("--timeout", probe_timeout, "Timeout in ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (seed_given) opts.seed_override = seed_value;

  try {
    if (generate->parsed()) return cmd_generate_data(opts);
    if (train->parsed()) return cmd_train(opts);
    if (train_policy->parsed()) return cmd_train_policy(opts);
    if (evaluate->parsed()) return cmd_evaluate(opts, scheme_arg);
    if (serve->parsed()) return cmd_serve(node_config_path, port_file);
    if (probe->parsed()) {
      return cmd_probe(address, dataset_path, partition, probe_index, probe_link_delay,
                       probe_timeout);
    }
  } catch (const hec::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const hec::ArtifactError& e) {
    std::fprintf(stderr, "missing artifact: %s\n", e.what());
    return kExitMissingArtifact;
  } catch (const hec::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

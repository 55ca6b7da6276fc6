// Command-line front end: dataset generation, classifier training and
// evaluation, RL training runs, ablation sweeps and comparison reports.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "semx/semx.hpp"

namespace fs = std::filesystem;
using namespace semx;

namespace {

harness::RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  harness::RunConfig cfg;
  if (!path.empty()) {
    const auto bytes = harness::read_file(path);
    cfg = harness::parse_config(std::string(bytes.begin(), bytes.end()));
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    harness::set_config_value(cfg, harness::detail::trim(kv.substr(0, eq)), harness::detail::trim(kv.substr(eq + 1)));
  }
  harness::validate_config(cfg);
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& list, const harness::RunConfig& cfg) {
  if (list.empty()) return cfg.seeds;
  std::vector<std::uint64_t> seeds;
  for (const auto& s : harness::detail::split_list(list)) seeds.push_back(harness::detail::parse_u64(s));
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semx: question-guided curiosity for sparse-reward PPO"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "run configuration file");
    cmd->add_option("--set", overrides, "override a config key (key=value), repeatable");
  };

  std::string data_path, model_path, out_path, loss_csv, seeds_arg, method_arg, checkpoint_path, runs_dir;
  bool whole_file = false;
  std::size_t episodes = 0;
  std::uint64_t eval_seed = 0;

  auto* gen = app.add_subcommand("gen-data", "generate the SQD1 classifier dataset");
  add_config(gen);
  gen->add_option("-o,--out", out_path, "output dataset file")->required();

  auto* tc = app.add_subcommand("train-classifier", "train the relevance classifier");
  add_config(tc);
  tc->add_option("-d,--data", data_path, "SQD1 dataset (generated from the config when omitted)");
  tc->add_option("-o,--out", out_path, "output model checkpoint")->required();
  tc->add_option("--loss-csv", loss_csv, "per-epoch loss CSV (default: <out>.loss.csv)");

  auto* ec = app.add_subcommand("eval-classifier", "element-wise and exact-match accuracy");
  add_config(ec);
  ec->add_option("-d,--data", data_path, "SQD1 dataset")->required();
  ec->add_option("-m,--model", model_path, "model checkpoint")->required();
  ec->add_flag("--all", whole_file, "score every sample instead of the held-out split");

  auto* tr = app.add_subcommand("train", "PPO runs for one method over several seeds");
  add_config(tr);
  tr->add_option("--method", method_arg, "ours | ane | random | ppo (default: query.method)");
  tr->add_option("--seeds", seeds_arg, "comma-separated master seeds (default: run.seeds)");
  tr->add_option("--classifier", model_path, "relevance model for method 'ours'");

  auto* ev = app.add_subcommand("evaluate", "greedy success rate of a policy checkpoint");
  add_config(ev);
  ev->add_option("--checkpoint", checkpoint_path, "policy checkpoint")->required();
  ev->add_option("--episodes", episodes, "episodes (default: ppo.eval_episodes)");
  ev->add_option("--seed", eval_seed, "episode stream seed");

  auto* ab = app.add_subcommand("ablate", "sweep n x aggregate x inquiry period");
  add_config(ab);
  ab->add_option("--seeds", seeds_arg, "comma-separated master seeds (default: run.seeds)");
  ab->add_option("--classifier", model_path, "relevance model for method 'ours'");

  auto* rp = app.add_subcommand("report", "merge run logs into mean/std comparison curves");
  rp->add_option("runs", runs_dir, "directory holding <method>/seed_*/log.csv")->required();
  rp->add_option("-o,--out", out_path, "output directory (default: the runs directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto cfg = load_config(config_path, overrides);
      const auto ds = harness::generate_classifier_data(cfg);
      harness::save_dataset(out_path, ds);
      std::printf("wrote %zu samples (%zu questions) to %s\n", ds.size(), ds.metadata.num_questions, out_path.c_str());
    } else if (tc->parsed()) {
      const auto cfg = load_config(config_path, overrides);
      const auto ds = data_path.empty() ? harness::generate_classifier_data(cfg) : harness::load_dataset(data_path);
      const auto [train, test] = harness::split_classifier_data(cfg, ds);
      std::string csv = "epoch,train_loss\n";
      const auto result = harness::train_classifier_from(cfg, train, [&](std::size_t e, double loss) {
        csv += std::to_string(e) + "," + format_double(loss) + "\n";
        if (e % 10 == 0) std::fprintf(stderr, "epoch %zu  loss %.5f\n", e, loss);
      });
      harness::save_classifier(out_path, result.model, cfg);
      harness::write_text(loss_csv.empty() ? out_path + ".loss.csv" : loss_csv, csv);
      const auto acc = classifier::evaluate_accuracy(result.model, test, harness::task_catalog(cfg));
      std::printf("test accuracy %.4f (exact match %.4f) on %zu held-out samples\n", acc.elementwise,
                  acc.exact_match, test.size());
    } else if (ec->parsed()) {
      const auto cfg = load_config(config_path, overrides);
      const auto ds = harness::load_dataset(data_path);
      const auto model = harness::load_classifier(model_path, cfg);
      const auto test = whole_file ? ds : harness::split_classifier_data(cfg, ds).second;
      const auto acc = classifier::evaluate_accuracy(model, test, harness::task_catalog(cfg));
      std::printf("element-wise accuracy %.4f\nexact-match accuracy %.4f\npositive label rate %.4f\nsamples %zu\n",
                  acc.elementwise, acc.exact_match, acc.positive_rate, test.size());
    } else if (tr->parsed()) {
      auto cfg = load_config(config_path, overrides);
      if (!method_arg.empty()) cfg.method = reward::parse_method(method_arg);
      if (!model_path.empty()) cfg.classifier.model_path = model_path;
      const auto rep = harness::train_command(cfg, parse_seeds(seeds_arg, cfg));
      std::cout << rep.summary_text;
    } else if (ev->parsed()) {
      const auto cfg = load_config(config_path, overrides);
      const auto ck = harness::load_checkpoint(checkpoint_path);
      const auto catalog = std::make_shared<const questions::QuestionCatalog>(harness::task_catalog(cfg));
      const auto nets = rl::PolicyValueNets::from_tensors(ck.tensors, world::observation_size(cfg.arena, *catalog),
                                                          cfg.arena.action_count());
      const double rate = rl::evaluate_policy(nets, cfg.arena, catalog, episodes ? episodes : cfg.ppo.eval_episodes,
                                              subsystem_seed(eval_seed, seed_tags::kEvaluation));
      std::printf("success rate %.4f (update %llu)\n", rate, static_cast<unsigned long long>(ck.metadata.update_index));
    } else if (ab->parsed()) {
      auto cfg = load_config(config_path, overrides);
      if (!model_path.empty()) cfg.classifier.model_path = model_path;
      const auto rep = harness::ablate_command(cfg, parse_seeds(seeds_arg, cfg));
      std::cout << rep.summary_text;
    } else if (rp->parsed()) {
      const auto rep = harness::write_report(runs_dir, out_path.empty() ? fs::path(runs_dir) : fs::path(out_path));
      std::cout << rep.summary_text;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

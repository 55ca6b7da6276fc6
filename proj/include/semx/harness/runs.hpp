#pragma once

// Experiment pipelines behind the CLI: classifier data and training, RL runs
// per method and seed, the ablation grid, and the cross-seed comparison report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semx/classifier.hpp"
#include "semx/digest.hpp"
#include "semx/error.hpp"
#include "semx/harness/binary_io.hpp"
#include "semx/harness/checkpoint.hpp"
#include "semx/harness/config.hpp"
#include "semx/harness/dataset_io.hpp"
#include "semx/random.hpp"
#include "semx/reward.hpp"
#include "semx/rl.hpp"

namespace semx::harness {

namespace fs = std::filesystem;

inline constexpr const char* kLogHeader =
    "update,env_steps,success_rate,mean_intrinsic,mean_return,policy_loss,value_loss,entropy";

// ---------------------------------------------------------------- classifier

inline classifier::Dataset generate_classifier_data(const RunConfig& cfg) {
  return classifier::generate_dataset(cfg.arena, task_catalog(cfg), cfg.classifier.num_samples,
                                      subsystem_seed(cfg.classifier.seed, seed_tags::kDataset));
}

inline std::pair<classifier::Dataset, classifier::Dataset> split_classifier_data(const RunConfig& cfg,
                                                                                 const classifier::Dataset& ds) {
  return classifier::split_dataset(ds, cfg.classifier.train_fraction,
                                   subsystem_seed(cfg.classifier.seed, seed_tags::kSplit));
}

inline classifier::TrainedClassifier train_classifier_from(const RunConfig& cfg, const classifier::Dataset& train,
                                                           const classifier::EpochCallback& on_epoch = {}) {
  return classifier::train_classifier(train, task_catalog(cfg), cfg.classifier.hyper,
                                      subsystem_seed(cfg.classifier.seed, seed_tags::kClassifier), on_epoch);
}

inline void save_classifier(const std::string& path, const classifier::RelevanceModel& model,
                            const RunConfig& cfg) {
  save_checkpoint(path, classifier::model_tensors(model), {cfg.classifier.hyper.epochs, config_digest(cfg)});
}

inline classifier::RelevanceModel load_classifier(const std::string& path, const RunConfig& cfg) {
  const auto catalog = task_catalog(cfg);
  return classifier::model_from_tensors(load_checkpoint(path).tensors, 2 * cfg.arena.num_objects,
                                        classifier::question_input_width(catalog));
}

// ---------------------------------------------------------------- RL runs

inline std::string csv_number(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::string log_line(const rl::UpdateRow& r) {
  return std::to_string(r.update) + "," + std::to_string(r.env_steps) + "," + csv_number(r.success_rate) + "," +
         format_double(r.mean_intrinsic) + "," + csv_number(r.mean_return) + "," +
         format_double(r.stats.policy_loss) + "," + format_double(r.stats.value_loss) + "," +
         format_double(r.stats.entropy);
}

inline std::string checkpoint_name(std::size_t update) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%06zu.sqm", update);
  return buf;
}

inline reward::SelectionPolicy selection_for(const RunConfig& cfg,
                                             std::shared_ptr<const classifier::FrozenScorer> scorer) {
  reward::SelectionPolicy p{cfg.method, cfg.query.n, nullptr};
  if (cfg.method == reward::Method::kClassifierTopN) {
    if (!scorer) throw ConfigError("method 'ours' needs classifier.model (run train-classifier first)");
    p.scorer = std::move(scorer);
  }
  return p;
}

struct RunResult {
  std::vector<rl::UpdateRow> log;
  std::string log_csv;  // exact bytes written to log.csv
};

/// One training run for cfg.method with master seed `seed`. When `dir` is
/// non-empty it receives config.cfg, log.csv and a checkpoint per evaluation.
inline RunResult run_training(const RunConfig& cfg, std::uint64_t seed,
                              std::shared_ptr<const classifier::FrozenScorer> scorer, const std::string& dir = "") {
  validate_config(cfg);
  auto catalog = std::make_shared<const questions::QuestionCatalog>(task_catalog(cfg));
  rl::ArrangementEnv env(cfg.arena, catalog, selection_for(cfg, std::move(scorer)), cfg.query,
                         subsystem_seed(seed, seed_tags::kEnvironment));
  rl::PpoLearner learner(rl::PolicyValueNets::create(env.observation_size(), env.action_count(), seed),
                         cfg.ppo.learning_rate);

  RunConfig snapshot = cfg;
  snapshot.seeds = {seed};
  const std::uint64_t digest = config_digest(snapshot);
  if (!dir.empty()) {
    fs::create_directories(dir);
    write_text((fs::path(dir) / "config.cfg").string(), serialize_config(snapshot));
  }

  const std::uint64_t eval_seed = subsystem_seed(seed, seed_tags::kEvaluation);
  rl::TrainHooks hooks;
  hooks.evaluate = [&](const rl::PolicyValueNets& nets, std::size_t) {
    return rl::evaluate_policy(nets, cfg.arena, catalog, cfg.ppo.eval_episodes, eval_seed);
  };
  if (!dir.empty()) {
    hooks.checkpoint = [&](const rl::PpoLearner& l, std::size_t update) {
      save_checkpoint((fs::path(dir) / checkpoint_name(update)).string(), l.nets.tensors(), {update, digest});
    };
  }
  RunResult result;
  result.log_csv = std::string(kLogHeader) + "\n";
  hooks.on_row = [&](const rl::UpdateRow& row) { result.log_csv += log_line(row) + "\n"; };
  result.log = rl::train(learner, env, cfg.ppo, subsystem_seed(seed, seed_tags::kUpdates), hooks);
  if (!dir.empty()) write_text((fs::path(dir) / "log.csv").string(), result.log_csv);
  return result;
}

/// Loads the relevance model named in the config, if the method needs one.
inline std::shared_ptr<const classifier::FrozenScorer> scorer_for(const RunConfig& cfg) {
  if (cfg.method != reward::Method::kClassifierTopN) return nullptr;
  if (cfg.classifier.model_path.empty())
    throw ConfigError("method 'ours' needs classifier.model (run train-classifier first)");
  return std::make_shared<const classifier::FrozenScorer>(load_classifier(cfg.classifier.model_path, cfg),
                                                          task_catalog(cfg));
}

inline fs::path experiment_root(const RunConfig& cfg) { return fs::path(cfg.output_dir) / cfg.name; }

// ---------------------------------------------------------------- report

struct LogRow {
  std::size_t update = 0;
  std::size_t env_steps = 0;
  std::optional<double> success_rate;
  double mean_intrinsic = 0.0;
};

inline std::vector<LogRow> read_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader) throw FormatError(path.string() + ": unexpected log.csv header");
  std::vector<LogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 8) cells.emplace_back();
    LogRow r;
    r.update = static_cast<std::size_t>(detail::parse_u64(cells[0]));
    r.env_steps = static_cast<std::size_t>(detail::parse_u64(cells[1]));
    if (!cells[2].empty()) r.success_rate = detail::parse_real(cells[2]);
    r.mean_intrinsic = detail::parse_real(cells[3]);
    rows.push_back(r);
  }
  return rows;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

struct GroupSummary {
  std::string group;  // run directory relative to the report root, minus seed_*
  std::size_t seeds = 0;
  std::optional<MeanStd> final_success;   // at the last evaluated update
  std::vector<double> final_success_per_seed;
};

struct Report {
  std::string comparison_csv;
  std::string summary_text;
  std::vector<GroupSummary> groups;
};

/// Merges every <group>/seed_*/log.csv below `root` into mean and std curves
/// per group.
inline Report build_report(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("report: '" + root.string() + "' is not a directory");
  std::map<std::string, std::vector<std::vector<LogRow>>> groups;
  std::vector<fs::path> logs;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().filename() == "log.csv") logs.push_back(entry.path());
  std::sort(logs.begin(), logs.end());
  for (const auto& p : logs) {
    const fs::path run_dir = p.parent_path();
    fs::path group = fs::relative(run_dir, root);
    if (run_dir.filename().string().rfind("seed_", 0) == 0) group = group.parent_path();
    const std::string name = group.empty() || group == "." ? std::string(".") : group.generic_string();
    groups[name].push_back(read_log(p));
  }
  if (groups.empty()) throw Error("report: no log.csv files under '" + root.string() + "'");

  Report rep;
  rep.comparison_csv =
      "method,update,env_steps,seeds,success_mean,success_std,intrinsic_mean,intrinsic_std\n";
  for (const auto& [name, runs] : groups) {
    GroupSummary gs{name, runs.size(), std::nullopt, {}};
    std::size_t max_updates = 0;
    for (const auto& r : runs) max_updates = std::max(max_updates, r.size());
    std::optional<std::size_t> last_eval;
    for (std::size_t i = 0; i < max_updates; ++i) {
      std::vector<double> success, intrinsic;
      std::size_t update = 0, steps = 0;
      for (const auto& r : runs) {
        if (i >= r.size()) continue;
        update = r[i].update;
        steps = r[i].env_steps;
        intrinsic.push_back(r[i].mean_intrinsic);
        if (r[i].success_rate) success.push_back(*r[i].success_rate);
      }
      const MeanStd in = mean_std(intrinsic);
      std::string s_mean, s_std;
      if (!success.empty()) {
        const MeanStd sm = mean_std(success);
        s_mean = format_double(sm.mean);
        s_std = format_double(sm.std);
        last_eval = i;
      }
      rep.comparison_csv += name + "," + std::to_string(update) + "," + std::to_string(steps) + "," +
                            std::to_string(intrinsic.size()) + "," + s_mean + "," + s_std + "," +
                            format_double(in.mean) + "," + format_double(in.std) + "\n";
    }
    if (last_eval) {
      for (const auto& r : runs)
        if (*last_eval < r.size() && r[*last_eval].success_rate) gs.final_success_per_seed.push_back(*r[*last_eval].success_rate);
      gs.final_success = mean_std(gs.final_success_per_seed);
    }
    rep.groups.push_back(std::move(gs));
  }

  std::ostringstream txt;
  txt << "final success rate (mean +- std over seeds)\n";
  for (const auto& g : rep.groups) {
    txt << "  " << g.group << ": ";
    if (g.final_success)
      txt << format_double(g.final_success->mean) << " +- " << format_double(g.final_success->std);
    else
      txt << "no evaluations";
    txt << " (" << g.seeds << " seeds)\n";
  }
  auto final_of = [&](const std::string& suffix) -> std::optional<double> {
    for (const auto& g : rep.groups) {
      const auto& n = g.group;
      if (n.size() >= suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0 &&
          g.final_success)
        return g.final_success->mean;
    }
    return std::nullopt;
  };
  const auto n1 = final_of("n1_sum_k1"), n2 = final_of("n2_mean_k1"), k10 = final_of("n1_sum_k10");
  if (n1 && n2) {
    txt << "expectation: two questions (mean) do not beat one question (sum): "
        << (*n2 <= *n1 ? "holds" : "does not hold") << " (" << format_double(*n2) << " vs " << format_double(*n1)
        << ")\n";
  }
  if (n1 && k10) {
    txt << "expectation: inquiry period 10 does not beat period 1: " << (*k10 <= *n1 ? "holds" : "does not hold")
        << " (" << format_double(*k10) << " vs " << format_double(*n1) << ")\n";
  }
  rep.summary_text = txt.str();
  return rep;
}

inline Report write_report(const fs::path& root, const fs::path& out_dir) {
  Report rep = build_report(root);
  fs::create_directories(out_dir);
  write_text((out_dir / "comparison.csv").string(), rep.comparison_csv);
  write_text((out_dir / "summary.txt").string(), rep.summary_text);
  return rep;
}

// ---------------------------------------------------------------- commands

/// `train`: one run directory per seed under <output_dir>/<name>/<method>/,
/// then a merged summary for the method.
inline Report train_command(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  const auto scorer = scorer_for(cfg);
  const fs::path method_dir = experiment_root(cfg) / reward::method_name(cfg.method);
  for (auto seed : seeds)
    run_training(cfg, seed, scorer, (method_dir / ("seed_" + std::to_string(seed))).string());
  return write_report(method_dir, method_dir);
}

struct AblationVariant {
  std::size_t n;
  reward::Aggregate aggregate;
  std::size_t period;
  std::string name() const {
    return "n" + std::to_string(n) + "_" + reward::aggregate_name(aggregate) + "_k" + std::to_string(period);
  }
};

/// n in {1, 2} x aggregate in {sum, mean} x period in {1, 3, 5, 10}.
inline std::vector<AblationVariant> ablation_grid() {
  std::vector<AblationVariant> grid;
  for (std::size_t n : {1, 2})
    for (auto agg : {reward::Aggregate::kSum, reward::Aggregate::kMean})
      for (std::size_t k : {1, 3, 5, 10}) grid.push_back({n, agg, k});
  return grid;
}

/// `ablate`: the grid above for the configured method (normally "ours"),
/// written under <output_dir>/<name>/ablate/<variant>/seed_*/, then reported.
inline Report ablate_command(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  const auto scorer = scorer_for(cfg);
  const fs::path root = experiment_root(cfg) / "ablate";
  for (const auto& v : ablation_grid()) {
    RunConfig variant = cfg;
    variant.query.n = v.n;
    variant.query.aggregate = v.aggregate;
    variant.query.period = v.period;
    for (auto seed : seeds)
      run_training(variant, seed, scorer, (root / v.name() / ("seed_" + std::to_string(seed))).string());
  }
  return write_report(root, root);
}

}  // namespace semx::harness

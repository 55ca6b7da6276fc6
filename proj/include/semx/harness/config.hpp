#pragma once

// Run configuration: line-oriented "key = value" text with dotted section
// keys and '#' comments. Omitted keys keep their defaults; unknown keys are
// rejected. serialize_config writes every key, so a snapshot re-parses to the
// same configuration.

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "semx/classifier/training.hpp"
#include "semx/digest.hpp"
#include "semx/error.hpp"
#include "semx/questions.hpp"
#include "semx/reward.hpp"
#include "semx/rl/ppo.hpp"
#include "semx/world.hpp"

namespace semx::harness {

struct ClassifierSettings {
  std::size_t num_samples = 10000;
  double train_fraction = 0.9;
  classifier::ClassifierHyperparams hyper;
  std::uint64_t seed = 2024;
  std::string model_path;  // trained model used by method "ours"
};

struct RunConfig {
  std::string name = "experiment";
  std::string output_dir = "runs";
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  world::ArenaConfig arena;
  std::vector<std::string> colors = questions::default_palette();
  ClassifierSettings classifier;
  reward::Method method = reward::Method::kClassifierTopN;
  reward::QueryConfig query;
  rl::PpoConfig ppo;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline std::uint64_t parse_u64(const std::string& v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("integer out of range: '" + v + "'");
  }
}

inline double parse_real(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
    throw ConfigError("expected a finite real number, got '" + v + "'");
  return d;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field size_field(std::string key, T RunConfig::*section, std::size_t T::*member) {
  return {std::move(key), [=](RunConfig& c, const std::string& v) { (c.*section).*member = parse_u64(v); },
          [=](const RunConfig& c) { return std::to_string((c.*section).*member); }};
}

template <typename T>
Field real_field(std::string key, T RunConfig::*section, double T::*member) {
  return {std::move(key), [=](RunConfig& c, const std::string& v) { (c.*section).*member = parse_real(v); },
          [=](const RunConfig& c) { return format_double((c.*section).*member); }};
}

inline const std::vector<Field>& fields() {
  using C = RunConfig;
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"run.name", [](C& c, const std::string& v) { c.name = v; }, [](const C& c) { return c.name; }});
    f.push_back({"run.output_dir", [](C& c, const std::string& v) { c.output_dir = v; },
                 [](const C& c) { return c.output_dir; }});
    f.push_back({"run.seeds",
                 [](C& c, const std::string& v) {
                   c.seeds.clear();
                   for (const auto& s : split_list(v)) c.seeds.push_back(parse_u64(s));
                   if (c.seeds.empty()) throw ConfigError("need at least one seed");
                 },
                 [](const C& c) {
                   std::vector<std::string> s;
                   for (auto x : c.seeds) s.push_back(std::to_string(x));
                   return join(s);
                 }});
    f.push_back(real_field("arena.half_extent", &C::arena, &world::ArenaConfig::half_extent));
    f.push_back(real_field("arena.object_radius", &C::arena, &world::ArenaConfig::object_radius));
    f.push_back(real_field("arena.push_distance", &C::arena, &world::ArenaConfig::push_distance));
    f.push_back(size_field("arena.num_objects", &C::arena, &world::ArenaConfig::num_objects));
    f.push_back(size_field("arena.max_episode_steps", &C::arena, &world::ArenaConfig::max_episode_steps));
    f.push_back({"catalog.colors", [](C& c, const std::string& v) { c.colors = split_list(v); },
                 [](const C& c) { return join(c.colors); }});
    f.push_back(size_field("classifier.num_samples", &C::classifier, &ClassifierSettings::num_samples));
    f.push_back(real_field("classifier.train_fraction", &C::classifier, &ClassifierSettings::train_fraction));
    f.push_back({"classifier.epochs", [](C& c, const std::string& v) { c.classifier.hyper.epochs = parse_u64(v); },
                 [](const C& c) { return std::to_string(c.classifier.hyper.epochs); }});
    f.push_back({"classifier.batch_size",
                 [](C& c, const std::string& v) { c.classifier.hyper.batch_size = parse_u64(v); },
                 [](const C& c) { return std::to_string(c.classifier.hyper.batch_size); }});
    f.push_back({"classifier.learning_rate",
                 [](C& c, const std::string& v) { c.classifier.hyper.learning_rate = parse_real(v); },
                 [](const C& c) { return format_double(c.classifier.hyper.learning_rate); }});
    f.push_back({"classifier.seed", [](C& c, const std::string& v) { c.classifier.seed = parse_u64(v); },
                 [](const C& c) { return std::to_string(c.classifier.seed); }});
    f.push_back({"classifier.model", [](C& c, const std::string& v) { c.classifier.model_path = v; },
                 [](const C& c) { return c.classifier.model_path; }});
    f.push_back({"query.method", [](C& c, const std::string& v) { c.method = reward::parse_method(v); },
                 [](const C& c) { return reward::method_name(c.method); }});
    f.push_back(size_field("query.n", &C::query, &reward::QueryConfig::n));
    f.push_back(size_field("query.period", &C::query, &reward::QueryConfig::period));
    f.push_back(real_field("query.beta", &C::query, &reward::QueryConfig::beta));
    f.push_back({"query.aggregate", [](C& c, const std::string& v) { c.query.aggregate = reward::parse_aggregate(v); },
                 [](const C& c) { return reward::aggregate_name(c.query.aggregate); }});
    using P = rl::PpoConfig;
    f.push_back(size_field("ppo.rollout_length", &C::ppo, &P::rollout_length));
    f.push_back(size_field("ppo.epochs_per_rollout", &C::ppo, &P::epochs_per_rollout));
    f.push_back(size_field("ppo.minibatch_size", &C::ppo, &P::minibatch_size));
    f.push_back(real_field("ppo.clip_ratio", &C::ppo, &P::clip_ratio));
    f.push_back(real_field("ppo.discount", &C::ppo, &P::discount));
    f.push_back(real_field("ppo.gae_lambda", &C::ppo, &P::gae_lambda));
    f.push_back(real_field("ppo.value_loss_coef", &C::ppo, &P::value_loss_coef));
    f.push_back(real_field("ppo.entropy_coef", &C::ppo, &P::entropy_coef));
    f.push_back(real_field("ppo.learning_rate", &C::ppo, &P::learning_rate));
    f.push_back(real_field("ppo.grad_norm_clip", &C::ppo, &P::grad_norm_clip));
    f.push_back(size_field("ppo.total_updates", &C::ppo, &P::total_updates));
    f.push_back(size_field("ppo.eval_every", &C::ppo, &P::eval_every));
    f.push_back(size_field("ppo.eval_episodes", &C::ppo, &P::eval_episodes));
    return f;
  }();
  return table;
}

}  // namespace detail

/// Catalog over the first arena.num_objects palette colors, so every
/// question refers to balls that exist.
inline questions::QuestionCatalog task_catalog(const RunConfig& c) {
  if (c.arena.num_objects > c.colors.size())
    throw ConfigError("arena.num_objects exceeds the number of catalog.colors");
  return questions::build_catalog(
      std::vector<std::string>(c.colors.begin(), c.colors.begin() + static_cast<std::ptrdiff_t>(c.arena.num_objects)));
}

/// Whole-config invariants. Messages name the offending key.
inline void validate_config(const RunConfig& c) {
  auto check = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      throw ConfigError(msg.find(key) == std::string::npos ? key + ": " + msg : msg);
    }
  };
  check("catalog.colors", [&] { questions::build_catalog(c.colors); });
  check("arena.num_objects", [&] {
    if (c.arena.num_objects < 2) throw ConfigError("need at least 2 objects");
  });
  check("arena", [&] { c.arena.validate(c.colors.size()); });
  check("ppo", [&] { c.ppo.validate(); });
  check("query", [&] { c.query.validate(); });
  const std::size_t q = c.arena.num_objects * (c.arena.num_objects - 1) * questions::kNumRelations;
  check("query.n", [&] {
    if (c.query.n > q) throw ConfigError("exceeds the catalog size " + std::to_string(q));
  });
  check("classifier.train_fraction", [&] {
    if (!(c.classifier.train_fraction > 0.0 && c.classifier.train_fraction < 1.0))
      throw ConfigError("must lie in (0, 1)");
  });
  check("classifier.num_samples", [&] {
    if (c.classifier.num_samples < 2) throw ConfigError("need at least 2 samples");
  });
  check("classifier.batch_size", [&] {
    if (c.classifier.hyper.batch_size < 1) throw ConfigError("must be >= 1");
  });
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto& table = detail::fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const detail::Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (auto prev = seen.find(key); prev != seen.end())
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' already set on line " +
                        std::to_string(prev->second));
    seen[key] = line_no;
    try {
      it->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + key + ": " + e.what());
    }
  }
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& [key, ln] : seen) {
      if (msg.find(key) != std::string::npos) throw ConfigError("line " + std::to_string(ln) + ": " + msg);
    }
    throw;
  }
  return cfg;
}

inline std::string serialize_config(const RunConfig& c) {
  std::string out;
  for (const auto& f : detail::fields()) out += f.key + " = " + f.get(c) + "\n";
  return out;
}

inline std::uint64_t config_digest(const RunConfig& c) { return fnv1a64(serialize_config(c)); }

/// Applies one "key = value" override (CLI flags reuse the config grammar).
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  const auto& table = detail::fields();
  auto it = std::find_if(table.begin(), table.end(), [&](const detail::Field& f) { return f.key == key; });
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  try {
    it->set(c, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace semx::harness

#pragma once

// Templated spatial-relation questions over the ball scene and the
// ground-truth oracle that answers them from coordinates.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "semx/error.hpp"
#include "semx/world.hpp"

namespace semx::questions {

enum class Relation : std::size_t { kLeft = 0, kRight = 1, kFront = 2, kBehind = 3 };

inline constexpr std::size_t kNumRelations = 4;

inline const std::vector<std::string>& default_palette() {
  static const std::vector<std::string> palette = {"red", "blue", "green", "cyan", "purple"};
  return palette;
}

inline const std::vector<std::string>& relation_words() {
  static const std::vector<std::string> words = {"left", "right", "front", "behind"};
  return words;
}

struct Question {
  std::size_t anchor = 0;
  std::size_t target = 0;
  Relation relation = Relation::kLeft;

  auto operator<=>(const Question&) const = default;
};

class QuestionCatalog {
 public:
  QuestionCatalog() = default;

  /// Ordered lexicographically by (anchor, target skipping anchor, relation).
  QuestionCatalog(std::vector<std::string> colors, std::size_t num_relations = kNumRelations)
      : colors_(std::move(colors)), num_relations_(num_relations) {
    if (colors_.size() < 2) throw ConfigError("catalog needs at least 2 colors");
    if (num_relations_ < 1 || num_relations_ > kNumRelations)
      throw ConfigError("catalog needs between 1 and 4 relations");
    std::set<std::string> seen;
    for (const auto& c : colors_) {
      if (c.empty() || c.find_first_of(" \t;?") != std::string::npos)
        throw ConfigError("invalid color name '" + c + "'");
      if (!seen.insert(c).second) throw ConfigError("duplicate color name '" + c + "'");
    }
    for (std::size_t a = 0; a < colors_.size(); ++a) {
      for (std::size_t t = 0; t < colors_.size(); ++t) {
        if (t == a) continue;
        for (std::size_t r = 0; r < num_relations_; ++r) {
          const Question q{a, t, static_cast<Relation>(r)};
          index_.emplace(q, questions_.size());
          questions_.push_back(q);
        }
      }
    }
  }

  std::size_t size() const { return questions_.size(); }
  const Question& operator[](std::size_t i) const { return questions_.at(i); }
  const std::vector<Question>& questions() const { return questions_; }
  const std::vector<std::string>& colors() const { return colors_; }
  std::size_t num_colors() const { return colors_.size(); }
  std::size_t num_relations() const { return num_relations_; }

  std::optional<std::size_t> index_of(const Question& q) const {
    auto it = index_.find(q);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> color_id(const std::string& name) const {
    for (std::size_t i = 0; i < colors_.size(); ++i)
      if (colors_[i] == name) return i;
    return std::nullopt;
  }

 private:
  std::vector<std::string> colors_;
  std::size_t num_relations_ = kNumRelations;
  std::vector<Question> questions_;
  std::map<Question, std::size_t> index_;
};

inline QuestionCatalog build_catalog(const std::vector<std::string>& colors,
                                     std::size_t num_relations = kNumRelations) {
  return QuestionCatalog(colors, num_relations);
}

inline bool relation_holds(Relation r, const world::Point& anchor, const world::Point& target) {
  switch (r) {
    case Relation::kLeft: return target.x < anchor.x;
    case Relation::kRight: return target.x > anchor.x;
    case Relation::kFront: return target.y < anchor.y;
    case Relation::kBehind: return target.y > anchor.y;
  }
  return false;
}

/// A(s, q): is there any ball of the target color in the given relation to
/// the anchor ball? Strict comparisons, so exact ties answer "no".
inline bool answer(const world::WorldState& state, const Question& q) {
  const world::Point* anchor = nullptr;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.color_ids[i] == q.anchor) {
      anchor = &state.positions[i];
      break;
    }
  }
  bool target_present = false;
  bool yes = false;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.color_ids[i] != q.target) continue;
    target_present = true;
    if (anchor != nullptr && relation_holds(q.relation, *anchor, state.positions[i])) yes = true;
  }
  if (anchor == nullptr || !target_present) {
    throw MissingObjectError("question refers to color " +
                             std::to_string(anchor == nullptr ? q.anchor : q.target) +
                             " which is not in the scene");
  }
  return yes;
}

using AnswerVector = std::vector<bool>;

inline AnswerVector answer_all(const world::WorldState& state, const QuestionCatalog& catalog) {
  AnswerVector out(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) out[i] = answer(state, catalog[i]);
  return out;
}

inline std::string render_text(const Question& q, const QuestionCatalog& catalog) {
  return "There is a " + catalog.colors().at(q.anchor) + " ball; are there any " +
         catalog.colors().at(q.target) + " balls " +
         relation_words().at(static_cast<std::size_t>(q.relation)) + " of it?";
}

/// Inverse of render_text. Tokens are split on single spaces; the error names
/// the first token that departs from the canonical template.
inline Question parse_text(const std::string& text, const QuestionCatalog& catalog) {
  // Template slots: "" = literal word expected; "{anchor}" etc. are variables.
  static const std::vector<std::string> kTemplate = {
      "There", "is", "a", "{anchor}", "ball;", "are", "there", "any",
      "{target}", "balls", "{relation}", "of", "it?"};

  std::vector<std::string> tokens;
  {
    std::size_t start = 0;
    for (;;) {
      const std::size_t end = text.find(' ', start);
      tokens.push_back(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (end == std::string::npos) break;
      start = end + 1;
    }
  }

  auto fail = [&](std::size_t i, const std::string& why) -> ParseError {
    const std::string tok = i < tokens.size() ? "'" + tokens[i] + "'" : "<end of text>";
    return ParseError("question parse error at token " + std::to_string(i) + " " + tok + ": " + why, i);
  };

  Question q;
  std::optional<std::size_t> anchor, target;
  for (std::size_t i = 0; i < kTemplate.size(); ++i) {
    if (i >= tokens.size()) throw fail(i, "expected '" + kTemplate[i] + "'");
    const std::string& slot = kTemplate[i];
    const std::string& tok = tokens[i];
    if (slot == "{anchor}" || slot == "{target}") {
      auto id = catalog.color_id(tok);
      if (!id) throw fail(i, "unknown color");
      (slot == "{anchor}" ? anchor : target) = *id;
    } else if (slot == "{relation}") {
      const auto& words = relation_words();
      std::size_t r = 0;
      while (r < catalog.num_relations() && words[r] != tok) ++r;
      if (r == catalog.num_relations()) throw fail(i, "unknown relation");
      q.relation = static_cast<Relation>(r);
    } else if (tok != slot) {
      throw fail(i, "expected '" + slot + "'");
    }
  }
  if (tokens.size() != kTemplate.size()) throw fail(kTemplate.size(), "unexpected trailing text");
  q.anchor = *anchor;
  q.target = *target;
  if (q.anchor == q.target) throw fail(8, "target color equals anchor color");
  return q;
}

}  // namespace semx::questions

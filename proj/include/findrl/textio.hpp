#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "findrl/domain.hpp"

namespace findrl {

struct LexEntry {
  enum class Category { Kind, Color, Location, Affirm, Deny, Done, Command };
  Category category = Category::Kind;
  ObjectKind kind = ObjectKind::Cup;
  Color color = Color::Any;
  Location location = Location::Drawer;
  friend bool operator==(const LexEntry&, const LexEntry&) = default;
};

// Surface forms (normalized, possibly several words) mapped to lexicon entries.
struct Lexicon {
  std::map<std::string, LexEntry> aliases;
  std::size_t max_words = 1;

  /// Lines "surface = category[:value]"; '#' starts a comment. Throws
  /// std::invalid_argument with the line number on bad input or a surface
  /// listed twice.
  static Lexicon parse(std::istream& in);
  static Lexicon load(const std::string& path);

  /// Exact alias, else a unique entry within edit distance 1 for words of at
  /// least four letters.
  std::optional<LexEntry> lookup(std::string_view word) const;
};

/// Lowercase; apostrophes dropped; other punctuation becomes a space.
std::string normalize(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);
int edit_distance(std::string_view a, std::string_view b);

struct ParsedUtterance {
  std::optional<EldActionLabel> action;  // empty when nothing was recognized
  std::optional<ObjectId> object;
  std::optional<Location> location;
  DaTag da = DaTag::Other;

  /// ELD move for the recognized action; throws std::logic_error when empty.
  EldMove to_move(std::string utterance, std::optional<Location> pointing) const;
};

DaTag tag_da(std::string_view utterance, const Lexicon& lex);

ParsedUtterance extract_action(std::string_view utterance, std::optional<Location> pointing,
                               const Lexicon& lex);

// One template per valid (DA, action) pair.
struct Templates {
  std::map<std::pair<DaTag, HelActionLabel>, std::string> text;

  /// Lines "da action = template"; pairs outside the valid table and
  /// duplicates are rejected.
  static Templates parse(std::istream& in);
  static Templates load(const std::string& path);
  /// Valid pairs without a template.
  std::vector<HelPair> missing() const;
};

std::string render_hel(const HelMove& move, const Templates& templates);

/// Directory holding lexicon.txt and templates.txt in the source tree.
std::string default_data_dir();

}  // namespace findrl

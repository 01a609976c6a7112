#include "findrl/textio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace findrl {

namespace {

using Cat = LexEntry::Category;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

LexEntry parse_entry(const std::string& target) {
  const auto colon = target.find(':');
  const std::string cat = target.substr(0, colon);
  const std::string value = colon == std::string::npos ? "" : target.substr(colon + 1);
  LexEntry e;
  auto no_value = [&](Cat c) {
    if (!value.empty()) throw std::invalid_argument("'" + cat + "' takes no value");
    e.category = c;
  };
  if (cat == "kind") {
    e.category = Cat::Kind;
    e.kind = parse_object(value).kind;
    if (parse_object(value).color != Color::Any) throw std::invalid_argument("kind expected, got '" + value + "'");
  } else if (cat == "color") {
    e.category = Cat::Color;
    const auto colors = {Color::Red, Color::Green, Color::Yellow, Color::White};
    const auto it = std::find_if(colors.begin(), colors.end(), [&](Color c) { return to_string(c) == value; });
    if (it == colors.end()) throw std::invalid_argument("unknown color '" + value + "'");
    e.color = *it;
  } else if (cat == "location") {
    e.category = Cat::Location;
    e.location = parse_location(value);
  } else if (cat == "affirm") {
    no_value(Cat::Affirm);
  } else if (cat == "deny") {
    no_value(Cat::Deny);
  } else if (cat == "done") {
    no_value(Cat::Done);
  } else if (cat == "command") {
    no_value(Cat::Command);
  } else {
    throw std::invalid_argument("unknown category '" + cat + "'");
  }
  return e;
}

// Canonical names take part in near-miss matching; hand-listed aliases do not.
bool is_canonical(const std::string& surface, const LexEntry& e) {
  switch (e.category) {
    case Cat::Kind: return surface == to_string(e.kind);
    case Cat::Color: return surface == to_string(e.color);
    case Cat::Location: return surface == to_string(e.location);
    default: return false;
  }
}

struct Match {
  LexEntry entry;
  std::size_t words = 1;
};

std::optional<Match> match_at(const std::vector<std::string>& tokens, std::size_t i, const Lexicon& lex) {
  for (std::size_t n = std::min(lex.max_words, tokens.size() - i); n >= 2; --n) {
    std::string phrase = tokens[i];
    for (std::size_t k = 1; k < n; ++k) phrase += ' ' + tokens[i + k];
    if (auto it = lex.aliases.find(phrase); it != lex.aliases.end()) return Match{it->second, n};
  }
  if (auto e = lex.lookup(tokens[i])) return Match{*e, 1};
  return std::nullopt;
}

std::vector<Match> scan(const std::vector<std::string>& tokens, const Lexicon& lex) {
  std::vector<Match> out;
  for (std::size_t i = 0; i < tokens.size();) {
    if (auto m = match_at(tokens, i, lex)) {
      out.push_back(*m);
      i += m->words;
    } else {
      ++i;
    }
  }
  return out;
}

template <typename Parse>
void read_lines(std::istream& in, Parse parse) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(number) + ": missing '='");
    try {
      parse(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string out;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '\'') continue;
    out += std::isalnum(u) ? static_cast<char>(std::tolower(u)) : ' ';
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::istringstream in(normalize(text));
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

int edit_distance(std::string_view a, std::string_view b) {
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1])});
      diag = up;
    }
  }
  return row[b.size()];
}

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lex;
  read_lines(in, [&](const std::string& surface, const std::string& target) {
    const std::string key = normalize(surface);
    const auto words = tokenize(key);
    if (words.empty()) throw std::invalid_argument("empty surface form");
    std::string joined = words[0];
    for (std::size_t k = 1; k < words.size(); ++k) joined += ' ' + words[k];
    if (!lex.aliases.emplace(joined, parse_entry(target)).second) {
      throw std::invalid_argument("surface form '" + joined + "' listed twice");
    }
    lex.max_words = std::max(lex.max_words, words.size());
  });
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  auto in = open_or_throw(path);
  return parse(in);
}

std::optional<LexEntry> Lexicon::lookup(std::string_view word) const {
  if (auto it = aliases.find(std::string(word)); it != aliases.end()) return it->second;
  if (word.size() < 4) return std::nullopt;
  std::optional<LexEntry> found;
  for (const auto& [surface, entry] : aliases) {
    if (surface.size() < 4 || !is_canonical(surface, entry) || edit_distance(word, surface) > 1) continue;
    if (found && !(*found == entry)) return std::nullopt;
    found = entry;
  }
  return found;
}

DaTag tag_da(std::string_view utterance, const Lexicon& lex) {
  const auto tokens = tokenize(utterance);
  static const std::vector<std::string> fillers = {"please", "ok", "okay", "now", "so", "and", "can",
                                                   "could", "would", "will", "you"};
  if (!tokens.empty()) {
    if (auto m = match_at(tokens, 0, lex)) {
      if (m->entry.category == Cat::Affirm) return DaTag::AffirmAnswer;
      if (m->entry.category == Cat::Deny) return DaTag::DenyAnswer;
      if (m->entry.category == Cat::Done) return DaTag::Acknowledge;
    }
    std::size_t i = 0;
    while (i < tokens.size() && std::count(fillers.begin(), fillers.end(), tokens[i])) ++i;
    if (i < tokens.size()) {
      auto it = lex.aliases.find(tokens[i]);
      if (it != lex.aliases.end() && it->second.category == Cat::Command) return DaTag::Command;
    }
  }
  const std::string t = trim(utterance);
  if (!t.empty() && t.back() == '?') return DaTag::YNQuestion;
  return DaTag::Statement;
}

ParsedUtterance extract_action(std::string_view utterance, std::optional<Location> pointing, const Lexicon& lex) {
  ParsedUtterance p;
  std::optional<Color> color;
  bool affirm = false, deny = false, done = false;
  for (const auto& m : scan(tokenize(utterance), lex)) {
    const LexEntry& e = m.entry;
    switch (e.category) {
      case Cat::Color:
        color = e.color;
        break;
      case Cat::Kind:
        if (!p.object) {
          ObjectId o{e.kind, color.value_or(Color::Any)};
          if (!o.underspecified() && !is_valid_object(o)) o.color = Color::Any;
          p.object = o;
        }
        color.reset();
        break;
      case Cat::Location:
        if (!p.location) p.location = e.location;
        break;
      case Cat::Affirm: affirm = true; break;
      case Cat::Deny: deny = true; break;
      case Cat::Done: done = true; break;
      case Cat::Command: break;
    }
  }
  if (!p.location) p.location = pointing;
  using E = EldActionLabel;
  if (p.object && p.location) {
    p.action = E::GiveOTL;
  } else if (p.object) {
    p.action = E::GiveOT;
  } else if (p.location) {
    p.action = E::GiveL;
  } else if (deny) {
    p.action = E::Deny;
  } else if (affirm) {
    p.action = E::Affirm;
  } else if (done) {
    p.action = E::Done;
  }
  if (!p.action) {
    p.da = DaTag::Other;
  } else if (*p.action == E::Affirm) {
    p.da = DaTag::AffirmAnswer;
  } else if (*p.action == E::Deny) {
    p.da = DaTag::DenyAnswer;
  } else if (*p.action == E::Done) {
    p.da = DaTag::Acknowledge;
  } else {
    p.da = tag_da(utterance, lex);
  }
  return p;
}

EldMove ParsedUtterance::to_move(std::string utterance, std::optional<Location> pointing) const {
  if (!action) throw std::logic_error("utterance carries no recognized action");
  EldMove m;
  m.action.label = *action;
  m.action.object = object;
  m.action.location = location;
  m.da = da;
  m.pointing = pointing;
  m.utterance = std::move(utterance);
  return m;
}

Templates Templates::parse(std::istream& in) {
  Templates t;
  read_lines(in, [&](const std::string& key, const std::string& text) {
    std::istringstream k(key);
    std::string da, action, extra;
    if (!(k >> da >> action) || (k >> extra)) throw std::invalid_argument("expected 'da action' before '='");
    const HelPair pair{parse_da(da), parse_hel_action(action)};
    hel_pair_index(pair);
    if (text.empty()) throw std::invalid_argument("empty template");
    if (!t.text.emplace(std::pair{pair.da, pair.action}, text).second) {
      throw std::invalid_argument("template for '" + key + "' listed twice");
    }
  });
  return t;
}

Templates Templates::load(const std::string& path) {
  auto in = open_or_throw(path);
  return parse(in);
}

std::vector<HelPair> Templates::missing() const {
  std::vector<HelPair> out;
  for (const auto& p : hel_pair_table()) {
    if (!text.count({p.da, p.action})) out.push_back(p);
  }
  return out;
}

std::string render_hel(const HelMove& move, const Templates& templates) {
  const auto it = templates.text.find({move.da, move.action.label});
  if (it == templates.text.end()) {
    throw std::invalid_argument("no template for " + std::string(to_string(move.da)) + " " +
                                std::string(to_string(move.action.label)));
  }
  std::string out = it->second;
  auto fill = [&](const std::string& slot, const std::string& value) {
    for (auto pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos + value.size())) {
      out.replace(pos, slot.size(), value);
    }
  };
  fill("{object}", move.action.object ? object_phrase(*move.action.object) : "object");
  fill("{location}", move.action.location ? std::string(to_string(*move.action.location)) : "room");
  return out;
}

std::string default_data_dir() { return FINDRL_DATA_DIR; }

}  // namespace findrl

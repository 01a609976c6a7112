#include <gtest/gtest.h>

#include <sstream>

#include "findrl/interaction.hpp"
#include "findrl/textio.hpp"

using namespace findrl;

namespace {

const Lexicon& lex() {
  static const Lexicon l = Lexicon::load(default_data_dir() + "/lexicon.txt");
  return l;
}

const Templates& templates() {
  static const Templates t = Templates::load(default_data_dir() + "/templates.txt");
  return t;
}

HelMove hel(DaTag da, HelActionLabel a, std::optional<ObjectId> o = {}, std::optional<Location> l = {}) {
  HelMove m;
  m.da = da;
  m.action.label = a;
  m.action.object = o;
  m.action.location = l;
  return m;
}

}  // namespace

TEST(Text, NormalizeAndEditDistance) {
  EXPECT_EQ(tokenize("That's it, the RED cup!"), (std::vector<std::string>{"thats", "it", "the", "red", "cup"}));
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3);
  EXPECT_EQ(edit_distance("", "abc"), 3);
  EXPECT_EQ(edit_distance("shelf", "shelf"), 0);
  EXPECT_EQ(edit_distance("shelf", "shef"), 1);
}

TEST(Extract, ReferenceUtterances) {
  auto p = extract_action("Please get me the red cup", std::nullopt, lex());
  EXPECT_EQ(p.action, EldActionLabel::GiveOT);
  EXPECT_EQ(p.object, (ObjectId{ObjectKind::Cup, Color::Red}));
  EXPECT_EQ(p.da, DaTag::Command);

  p = extract_action("", Location::Shelf, lex());
  EXPECT_EQ(p.action, EldActionLabel::GiveL);
  EXPECT_EQ(p.location, Location::Shelf);

  p = extract_action("find a ball, maybe in the drawer", std::nullopt, lex());
  EXPECT_EQ(p.action, EldActionLabel::GiveOTL);
  EXPECT_EQ(p.object, (ObjectId{ObjectKind::Ball, Color::Any}));
  EXPECT_EQ(p.location, Location::Drawer);
}

TEST(Extract, AnswersAndUnmatched) {
  EXPECT_EQ(extract_action("yes", std::nullopt, lex()).action, EldActionLabel::Affirm);
  EXPECT_EQ(extract_action("yes", std::nullopt, lex()).da, DaTag::AffirmAnswer);
  EXPECT_EQ(extract_action("no, that's not it", std::nullopt, lex()).action, EldActionLabel::Deny);
  EXPECT_EQ(extract_action("thank you", std::nullopt, lex()).action, EldActionLabel::Done);
  const auto p = extract_action("hmm, let me think", std::nullopt, lex());
  EXPECT_FALSE(p.action);
  EXPECT_EQ(p.da, DaTag::Other);
  EXPECT_THROW(p.to_move("hmm", std::nullopt), std::logic_error);
}

TEST(Extract, NearMisses) {
  EXPECT_EQ(extract_action("the green cop", std::nullopt, lex()).object, (ObjectId{ObjectKind::Cup, Color::Green}));
  EXPECT_EQ(extract_action("on the shelv", std::nullopt, lex()).location, Location::Shelf);
  EXPECT_EQ(extract_action("the yelow bal", std::nullopt, lex()).object, std::nullopt);
  EXPECT_EQ(extract_action("the yelow balll", std::nullopt, lex()).object,
            (ObjectId{ObjectKind::Ball, Color::Yellow}));
  // Colors the room does not have for a kind fall back to the bare kind.
  EXPECT_EQ(extract_action("white cup", std::nullopt, lex()).object, (ObjectId{ObjectKind::Cup, Color::Any}));
}

TEST(Extract, TextLocationOverridesPointing) {
  const auto p = extract_action("in the cabinet", Location::Drawer, lex());
  EXPECT_EQ(p.location, Location::Cabinet);
  const auto m = p.to_move("in the cabinet", Location::Drawer);
  EXPECT_EQ(m.pointing, Location::Drawer);
  EXPECT_EQ(m.utterance, "in the cabinet");
  EXPECT_TRUE(is_well_formed(m));
}

TEST(Extract, CanonicalNamesRoundTrip) {
  for (const auto& o : all_objects()) {
    const auto p = extract_action(object_phrase(o), std::nullopt, lex());
    EXPECT_EQ(p.action, EldActionLabel::GiveOT) << object_phrase(o);
    EXPECT_EQ(p.object, o);
  }
  for (auto k : {ObjectKind::Cup, ObjectKind::Ball}) {
    const ObjectId o{k, Color::Any};
    EXPECT_EQ(extract_action(object_phrase(o), std::nullopt, lex()).object, o);
  }
  for (auto l : all_locations()) {
    const auto p = extract_action(std::string(to_string(l)), std::nullopt, lex());
    EXPECT_EQ(p.action, EldActionLabel::GiveL);
    EXPECT_EQ(p.location, l);
  }
}

TEST(Extract, LocationNearMissesNeverBecomeObjects) {
  const std::string letters = "abcdefghijklmnopqrstuvwxyz";
  for (auto l : all_locations()) {
    const std::string name(to_string(l));
    std::vector<std::string> variants;
    for (std::size_t i = 0; i < name.size(); ++i) {
      variants.push_back(name.substr(0, i) + name.substr(i + 1));
      for (char c : letters) {
        variants.push_back(name.substr(0, i) + c + name.substr(i + 1));
        variants.push_back(name.substr(0, i) + c + name.substr(i));
      }
    }
    for (const auto& v : variants) {
      const auto e = lex().lookup(v);
      if (!e) continue;
      EXPECT_EQ(e->category, LexEntry::Category::Location) << v;
      EXPECT_EQ(e->location, l) << v;
    }
  }
}

TEST(Extract, Deterministic) {
  for (const char* u : {"the red ball on the shelf", "no", "yes it is", "drawer?"}) {
    const auto a = extract_action(u, std::nullopt, lex());
    const auto b = extract_action(u, std::nullopt, lex());
    EXPECT_EQ(a.action, b.action);
    EXPECT_EQ(a.object, b.object);
    EXPECT_EQ(a.location, b.location);
    EXPECT_EQ(a.da, b.da);
  }
}

TEST(TagDa, Rules) {
  EXPECT_EQ(tag_da("yes", lex()), DaTag::AffirmAnswer);
  EXPECT_EQ(tag_da("Nope.", lex()), DaTag::DenyAnswer);
  EXPECT_EQ(tag_da("is it in the cabinet?", lex()), DaTag::YNQuestion);
  EXPECT_EQ(tag_da("the ball is yellow", lex()), DaTag::Statement);
  EXPECT_EQ(tag_da("please look in the drawer", lex()), DaTag::Command);
  EXPECT_EQ(tag_da("could you check the shelf?", lex()), DaTag::Command);
  EXPECT_EQ(tag_da("", lex()), DaTag::Statement);
}

TEST(Render, TemplateFixtures) {
  EXPECT_EQ(render_hel(hel(DaTag::Other, HelActionLabel::RequestOT), templates()),
            "What would you like me to find?");
  EXPECT_EQ(render_hel(hel(DaTag::YNQuestion, HelActionLabel::VerifyL, {}, Location::Cabinet), templates()),
            "Did you say inside the cabinet?");
  EXPECT_EQ(render_hel(hel(DaTag::Statement, HelActionLabel::SearchLocation, {}, Location::Drawer), templates()),
            "Let me open the drawer.");
  EXPECT_EQ(render_hel(hel(DaTag::Statement, HelActionLabel::PresentObject, ObjectId{ObjectKind::Ball, Color::White},
                           Location::Shelf),
                       templates()),
            "Here is the white ball from the shelf.");
}

TEST(Render, EveryValidPairHasATemplate) {
  EXPECT_TRUE(templates().missing().empty());
  const WorldConfig world = {};
  HelTracker t;
  t.object_guess = ObjectId{ObjectKind::Cup, Color::Green};
  t.location_guess = Location::Shelf;
  for (const auto& p : hel_pair_table()) {
    const auto m = t.make_move(p, world);
    const std::string text = render_hel(m, templates());
    EXPECT_FALSE(text.empty());
    EXPECT_EQ(text.find('{'), std::string::npos) << text;
    EXPECT_EQ(text, render_hel(m, templates()));
  }
  EXPECT_EQ(t.make_move({DaTag::Statement, HelActionLabel::SearchLocation}, world).ho, HoTag::OpenLocation);
}

TEST(Fixtures, MalformedFilesAreRejected) {
  std::istringstream dup("cup = kind:cup\ncup = kind:ball\n");
  EXPECT_THROW(Lexicon::parse(dup), std::invalid_argument);
  std::istringstream bad("cup = flavor:cup\n");
  EXPECT_THROW(Lexicon::parse(bad), std::invalid_argument);
  std::istringstream pair("statement request_ot = Hello\n");
  EXPECT_THROW(Templates::parse(pair), std::invalid_argument);
  std::istringstream gap("other request_ot = Hello\n");
  EXPECT_EQ(Templates::parse(gap).missing().size(), hel_pair_table().size() - 1);
  EXPECT_THROW(Lexicon::load("/nonexistent/lexicon.txt"), std::runtime_error);
}

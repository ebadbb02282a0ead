#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "chainrec/errors.h"
#include "chainrec/words.h"
#include "test_support.h"

namespace chainrec {
namespace {

GeneratorSystem powers() { return make_system({"z^2", "z^3"}, true); }

TEST(Words, EnumerationCountAndOrder) {
  const auto sys = powers();
  const auto words = enumerate_words(sys, 3);
  ASSERT_EQ(words.size(), 1U + 2 + 4 + 8);
  EXPECT_TRUE(words[0].is_identity());
  EXPECT_EQ(to_string(words[1]), "[0]");
  EXPECT_EQ(to_string(words[2]), "[1]");
  EXPECT_EQ(to_string(words[3]), "[0,0]");
  EXPECT_EQ(to_string(words[6]), "[1,1]");
  for (std::size_t i = 1; i < words.size(); ++i) EXPECT_LE(words[i - 1].length(), words[i].length());
  std::set<std::string> distinct;
  for (const auto& w : words) distinct.insert(to_string(w));
  EXPECT_EQ(distinct.size(), words.size());

  const auto nonempty = enumerate_nonempty_words(sys, 2);
  EXPECT_EQ(nonempty.size(), 6U);
  for (const auto& w : nonempty) EXPECT_FALSE(w.is_identity());
}

TEST(Words, EnumerationBudget) {
  EXPECT_THROW(enumerate_words(powers(), 11), BudgetError);
  const auto five = make_system({"z", "z^2", "z^3", "z^4", "z^5"});
  EXPECT_THROW(enumerate_words(five, 9), BudgetError);  // 5^9 > 1e6
}

TEST(Words, ParsePrintRoundTrip) {
  const Word w = parse_word(" [1, 0,0 ] ", 2);
  EXPECT_EQ(to_string(w), "[1,0,0]");
  EXPECT_EQ(w.count(0), 2U);
  EXPECT_EQ(w.count(1), 1U);
  EXPECT_TRUE(parse_word("[]", 2).is_identity());
  for (const char* bad : {"", "[", "[0,]", "[a]", "0", "[0] x"}) {
    EXPECT_THROW(parse_word(bad, 2), ConfigError) << bad;
  }
  EXPECT_THROW(parse_word("[2]", 2), ConfigError);
}

TEST(Words, CompositionConcatenatesAndCounts) {
  const Word a({1}, 2), b({0, 0}, 2);
  const Word ab = a * b;
  EXPECT_EQ(to_string(ab), "[1,0,0]");
  EXPECT_EQ(ab.count(0), 2U);
  EXPECT_EQ(ab * Word({}, 2), ab);
  // (a*b)(p) = a(b(p)): z^3 of z^4 is z^12.
  const auto sys = powers();
  const Point p{0.9, 0.1};
  EXPECT_NEAR(std::abs(apply_word(sys, ab, p) - std::pow(p, 12)), 0.0, 1e-12);
}

TEST(Words, ApplyRightmostFirst) {
  const auto sys = make_system({"z + 1", "2*z"});
  const Word w({0, 1}, 2);  // (z + 1) o (2z)
  EXPECT_EQ(apply_word(sys, w, {1.0, 0.0}), Point(3.0, 0.0));
}

TEST(Words, SuffixIndices) {
  const auto words = enumerate_words(powers(), 3);
  const auto suffix = suffix_indices(words);
  ASSERT_EQ(suffix.size(), words.size());
  EXPECT_EQ(suffix[0], -1);
  for (std::size_t i = 1; i < words.size(); ++i) {
    const auto& idx = words[i].indices();
    const Word tail(std::vector<std::uint32_t>(idx.begin() + 1, idx.end()), 2);
    ASSERT_GE(suffix[i], 0);
    EXPECT_EQ(words[static_cast<std::size_t>(suffix[i])], tail);
  }
  EXPECT_THROW(suffix_indices({Word({0, 1}, 2)}), std::invalid_argument);
}

TEST(Words, BoxImageEnclosesSampledImages) {
  std::mt19937_64 rng(1);
  const auto sys = make_system({"z^2 + 0.1", "0.5*z - i"});
  const auto words = enumerate_words(sys, 3);
  for (const auto& w : words) {
    for (int b = 0; b < 20; ++b) {
      const IntervalBox2 box = testing::random_box(rng);
      const IntervalBox2 img = word_box_image(sys, w, box);
      for (int s = 0; s < 50; ++s) {
        const Point p = testing::clamp_to(box, testing::sample_in(rng, box));
        EXPECT_TRUE(img.contains(apply_word(sys, w, p))) << to_string(w);
      }
    }
  }
}

TEST(Words, SampledAbelianCheck) {
  const Grid disc(IntervalBox2::from_bounds(-1.125, 1.125, -1.125, 1.125), 4, Membership::disc());
  EXPECT_TRUE(check_abelian_sampled(powers(), disc, 1000, 7));
  EXPECT_FALSE(check_abelian_sampled(make_system({"z^2", "z + 0.1"}), disc, 1000, 7));
}

TEST(Words, SystemNeedsGenerators) {
  EXPECT_THROW(make_system({}), ConfigError);
  EXPECT_THROW(make_system({"z^"}), ParseError);
}

}  // namespace
}  // namespace chainrec

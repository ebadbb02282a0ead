#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chainrec/grid.h"
#include "chainrec/map_expr.h"

namespace chainrec {

// Finitely generated semigroup of polynomial self-maps.
struct GeneratorSystem {
  std::vector<MapExpr> generators;
  bool abelian_claimed = false;

  std::size_t size() const { return generators.size(); }
};

// Builds a system from DSL sources; throws ConfigError when the list is empty.
GeneratorSystem make_system(const std::vector<std::string>& sources, bool abelian_claimed = false);

// Element of G-hat: the composition g[i_1] o ... o g[i_n]; the rightmost index
// acts first. The empty word is the identity.
class Word {
 public:
  Word() = default;
  Word(std::vector<std::uint32_t> indices, std::size_t generator_count);

  const std::vector<std::uint32_t>& indices() const { return indices_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }
  std::size_t length() const { return indices_.size(); }
  bool is_identity() const { return indices_.empty(); }
  std::uint32_t count(std::uint32_t generator) const {
    return generator < counts_.size() ? counts_[generator] : 0;
  }
  std::size_t generator_count() const { return counts_.size(); }

  // Composition: (a * b)(p) = a(b(p)).
  friend Word operator*(const Word& a, const Word& b);
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<std::uint32_t> indices_;
  std::vector<std::uint32_t> counts_;
};

// Bracket notation "[1,0,0]"; "[]" is the identity.
std::string to_string(const Word& w);
Word parse_word(std::string_view text, std::size_t generator_count);

// All words of length 0..max_len, by length then lexicographically.
// Throws BudgetError when max_len > 10 or the count would exceed 10^6.
std::vector<Word> enumerate_words(const GeneratorSystem& sys, int max_len);

// Nonempty words of length 1..max_len (elements of G rather than G-hat).
std::vector<Word> enumerate_nonempty_words(const GeneratorSystem& sys, int max_len);

// For each word, the position in `words` of the same word with its leftmost
// (last applied) letter removed; -1 for the identity. Every such suffix must
// itself be listed, as it is for enumerate_words output.
std::vector<std::int64_t> suffix_indices(const std::vector<Word>& words);

Point apply_word(const GeneratorSystem& sys, const Word& w, Point p);
IntervalBox2 word_box_image(const GeneratorSystem& sys, const Word& w, const IntervalBox2& b);

// Samples n_samples points of the grid's phase space (uniform in the bounds,
// filtered by membership) and compares g_i(g_j(p)) with g_j(g_i(p)) for every
// generator pair within 1e-9.
bool check_abelian_sampled(const GeneratorSystem& sys, const Grid& phase_space, int n_samples,
                           std::uint64_t seed = 0);

}  // namespace chainrec

#include "chainrec/words.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "chainrec/errors.h"

namespace chainrec {

GeneratorSystem make_system(const std::vector<std::string>& sources, bool abelian_claimed) {
  if (sources.empty()) throw ConfigError("generator list is empty");
  GeneratorSystem sys;
  sys.abelian_claimed = abelian_claimed;
  for (const auto& s : sources) sys.generators.push_back(parse_map_expr(s));
  return sys;
}

Word::Word(std::vector<std::uint32_t> indices, std::size_t generator_count)
    : indices_(std::move(indices)), counts_(generator_count, 0) {
  for (std::uint32_t i : indices_) {
    if (i >= generator_count) {
      throw ConfigError("word index " + std::to_string(i) + " exceeds generator count " +
                        std::to_string(generator_count));
    }
    ++counts_[i];
  }
}

Word operator*(const Word& a, const Word& b) {
  Word w;
  w.indices_ = a.indices_;
  w.indices_.insert(w.indices_.end(), b.indices_.begin(), b.indices_.end());
  w.counts_.assign(std::max(a.counts_.size(), b.counts_.size()), 0);
  for (std::size_t i = 0; i < a.counts_.size(); ++i) w.counts_[i] += a.counts_[i];
  for (std::size_t i = 0; i < b.counts_.size(); ++i) w.counts_[i] += b.counts_[i];
  return w;
}

std::string to_string(const Word& w) {
  std::string out = "[";
  for (std::size_t k = 0; k < w.indices().size(); ++k) {
    if (k) out += ',';
    out += std::to_string(w.indices()[k]);
  }
  return out + "]";
}

Word parse_word(std::string_view text, std::size_t generator_count) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto expect = [&](char c) {
    skip();
    if (pos >= text.size() || text[pos] != c) {
      throw ParseError(std::string("expected '") + c + "' in word", pos);
    }
    ++pos;
  };
  expect('[');
  std::vector<std::uint32_t> indices;
  skip();
  if (pos < text.size() && text[pos] == ']') {
    ++pos;
  } else {
    for (;;) {
      skip();
      std::uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
      if (ec != std::errc{}) throw ParseError("expected generator index in word", pos);
      pos = static_cast<std::size_t>(ptr - text.data());
      indices.push_back(v);
      skip();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      expect(']');
      break;
    }
  }
  skip();
  if (pos != text.size()) throw ParseError("trailing characters after word", pos);
  return Word(std::move(indices), generator_count);
}

namespace {

constexpr double kWordBudget = 1e6;

void check_word_budget(std::size_t generators, int max_len) {
  if (max_len < 0) throw ConfigError("word length must be >= 0");
  if (max_len > 10 || std::pow(static_cast<double>(generators), max_len) > kWordBudget) {
    throw BudgetError("word enumeration budget exceeded: " + std::to_string(generators) +
                      "^" + std::to_string(max_len) + " words");
  }
}

}  // namespace

std::vector<Word> enumerate_words(const GeneratorSystem& sys, int max_len) {
  const std::size_t k = sys.size();
  check_word_budget(k, max_len);
  std::vector<Word> out;
  out.emplace_back(std::vector<std::uint32_t>{}, k);
  for (int len = 1; len <= max_len && k > 0; ++len) {
    std::vector<std::uint32_t> digits(static_cast<std::size_t>(len), 0);
    for (;;) {
      out.emplace_back(digits, k);
      int pos = len - 1;
      while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == k) {
        digits[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  return out;
}

std::vector<Word> enumerate_nonempty_words(const GeneratorSystem& sys, int max_len) {
  std::vector<Word> all = enumerate_words(sys, max_len);
  all.erase(all.begin());
  return all;
}

std::vector<std::int64_t> suffix_indices(const std::vector<Word>& words) {
  std::map<std::vector<std::uint32_t>, std::int64_t> position;
  for (std::size_t i = 0; i < words.size(); ++i) position.emplace(words[i].indices(), i);
  std::vector<std::int64_t> out(words.size(), -1);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& idx = words[i].indices();
    if (idx.empty()) continue;
    const auto it = position.find(std::vector<std::uint32_t>(idx.begin() + 1, idx.end()));
    if (it == position.end()) throw std::invalid_argument("suffix_indices: word list not suffix-closed");
    out[i] = it->second;
  }
  return out;
}

Point apply_word(const GeneratorSystem& sys, const Word& w, Point p) {
  const auto& idx = w.indices();
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) p = eval_point(sys.generators.at(*it), p);
  return p;
}

IntervalBox2 word_box_image(const GeneratorSystem& sys, const Word& w, const IntervalBox2& b) {
  IntervalBox2 r = b;
  const auto& idx = w.indices();
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) r = eval_box(sys.generators.at(*it), r);
  return r;
}

bool check_abelian_sampled(const GeneratorSystem& sys, const Grid& phase_space, int n_samples,
                           std::uint64_t seed) {
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  const auto& b = phase_space.bounds();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(b.re.lo, b.re.hi);
  std::uniform_real_distribution<double> uy(b.im.lo, b.im.hi);
  const auto& m = phase_space.membership();
  int drawn = 0;
  int attempts = 0;
  while (drawn < n_samples && attempts < 100 * n_samples) {
    ++attempts;
    const Point p{ux(rng), uy(rng)};
    if (m.kind == Membership::Kind::kDisc && std::abs(p - m.center) > m.radius) continue;
    ++drawn;
    for (std::size_t i = 0; i < sys.size(); ++i) {
      for (std::size_t j = i + 1; j < sys.size(); ++j) {
        const Point ij = eval_point(sys.generators[i], eval_point(sys.generators[j], p));
        const Point ji = eval_point(sys.generators[j], eval_point(sys.generators[i], p));
        if (!(std::abs(ij - ji) <= 1e-9)) return false;
      }
    }
  }
  return true;
}

}  // namespace chainrec

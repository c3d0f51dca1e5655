#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pbound {

/// Index of a symbol inside one Alphabet.
using Symbol = std::uint32_t;

/// A word is a sequence of symbol indices; it is only meaningful together
/// with the Alphabet it was built against.
using Word = std::vector<Symbol>;

/// Occurrence counts, one entry per alphabet symbol.
using ParikhVector = std::vector<std::uint32_t>;

/// Ordered set of distinct symbol names. The insertion order is the fixed
/// linear order used by Parikh vectors.
class Alphabet {
 public:
  Alphabet() = default;
  /// Throws InputError on duplicate names.
  explicit Alphabet(std::vector<std::string> symbols);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(Symbol s) const { return names_.at(s); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<Symbol> find(std::string_view name) const;
  /// Like find(), but throws InputError for unknown names.
  Symbol at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  /// Returns the index of `name`, appending it if absent.
  Symbol add(const std::string& name);

  bool operator==(const Alphabet& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Symbol> index_;
};

/// Parses whitespace-separated symbol names into a word over `sigma`.
Word parse_word(const Alphabet& sigma, std::string_view text);

/// Space-separated symbol names; "eps" for the empty word.
std::string format_word(const Alphabet& sigma, const Word& w);

/// Π(w). Throws InputError if `w` mentions an index outside `sigma`.
ParikhVector parikh_of_word(const Word& w, const Alphabet& sigma);

/// Re-expresses `w` (over `from`) over `to`, matching symbols by name.
Word translate_word(const Word& w, const Alphabet& from, const Alphabet& to);

ParikhVector operator+(const ParikhVector& a, const ParikhVector& b);
std::string format_vector(const ParikhVector& v);
std::uint64_t vector_norm(const ParikhVector& v);

/// All words over an alphabet of `alphabet_size` letters with length at most
/// `max_length`, shortest first. Exponential; test oracles only.
std::vector<Word> all_words(std::size_t alphabet_size, std::size_t max_length);

}  // namespace pbound

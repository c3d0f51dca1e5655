#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pbound/symbols.hpp"

namespace pbound {

using State = std::uint32_t;

/// Nondeterministic automaton without ε-moves. Several initial states are
/// allowed.
struct Nfa {
  struct Transition {
    State from;
    Symbol symbol;
    State to;
    auto operator<=>(const Transition&) const = default;
  };

  std::size_t num_states = 0;
  std::size_t alphabet_size = 0;
  std::vector<State> initial;
  std::vector<bool> accepting;
  std::vector<Transition> transitions;

  State add_state(bool accept = false);
  void add_transition(State from, Symbol symbol, State to);

  /// Throws InputError when a transition or initial state is out of range.
  void validate() const;
  bool accepts(const Word& w) const;
};

/// Complete deterministic automaton: next[state][symbol] is always defined.
struct Dfa {
  std::size_t alphabet_size = 0;
  State initial = 0;
  std::vector<std::vector<State>> next;
  std::vector<bool> accepting;

  std::size_t num_states() const { return next.size(); }
  void validate() const;
  bool accepts(const Word& w) const;
  Nfa to_nfa() const;
};

/// Subset construction restricted to reachable subsets.
Dfa determinize(const Nfa& nfa);
Dfa complement(const Dfa& dfa);
/// The minimal automaton of the reachable part (Moore refinement).
Dfa minimize(const Dfa& dfa);

/// Automaton for Σ* (one accepting state with all self-loops).
Dfa universal_dfa(std::size_t alphabet_size);
/// Automaton for the empty language.
Dfa empty_dfa(std::size_t alphabet_size);

/// w1* w2* ... wk* over a fixed alphabet. ε entries are dropped on
/// construction; an empty word list denotes {ε}.
class ElementaryBounded {
 public:
  ElementaryBounded() = default;
  ElementaryBounded(Alphabet alphabet, std::vector<Word> words);

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<Word>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::size_t total_length() const;

  /// Decides w ∈ w1*…wk* by dynamic programming over (position, block).
  bool contains(const Word& w) const;

  bool operator==(const ElementaryBounded& o) const {
    return alphabet_ == o.alphabet_ && words_ == o.words_;
  }

 private:
  Alphabet alphabet_;
  std::vector<Word> words_;
};

/// B1·B2: the concatenated word lists. Throws InputError on differing
/// alphabets.
ElementaryBounded eb_concat(const ElementaryBounded& b1, const ElementaryBounded& b2);
/// Same words re-expressed over a larger alphabet (matched by name).
ElementaryBounded eb_translate(const ElementaryBounded& b, const Alphabet& to);
/// Language-preserving cleanup: removes a block that is a power of its
/// neighbour (u* (u^k)* = u*) until nothing changes.
ElementaryBounded eb_simplify(const ElementaryBounded& b);

/// ε-free recognizer with 1 + Σ|wi| states.
Nfa eb_to_nfa(const ElementaryBounded& b);
/// Recognizer for Σ* \ w1*…wk*.
Dfa eb_complement_dfa(const ElementaryBounded& b, const Alphabet& sigma);

/// One word per line, symbols separated by spaces; "# k=0" for the empty list.
std::string format_bounded(const ElementaryBounded& b);
/// Inverse of format_bounded. Unknown symbols are added to `sigma`.
ElementaryBounded parse_bounded(Alphabet sigma, const std::string& text);

/// Regular expressions as immutable shared trees.
class Regex {
 public:
  enum class Kind { Empty, Epsilon, Symbol, Concat, Union, Star };

  static Regex empty();
  static Regex epsilon();
  static Regex symbol(Symbol s);
  /// The constructors below fold ∅ and ε where the result is the same
  /// language, so trees stay small.
  static Regex concat(const Regex& a, const Regex& b);
  static Regex alt(const Regex& a, const Regex& b);
  static Regex star(const Regex& a);

  Kind kind() const { return node_->kind; }
  Symbol sym() const { return node_->sym; }
  const Regex& left() const { return *node_->left; }
  const Regex& right() const { return *node_->right; }
  const Regex& child() const { return *node_->left; }

  bool nullable() const;
  /// Brzozowski matching; used as an independent membership oracle.
  bool matches(const Word& w) const;
  std::size_t size() const;
  std::string to_string(const Alphabet& sigma) const;

 private:
  struct Node {
    Kind kind = Kind::Empty;
    Symbol sym = 0;
    std::shared_ptr<const Regex> left, right;
  };
  explicit Regex(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  Regex derivative(Symbol s) const;

  std::shared_ptr<const Node> node_;
};

/// State elimination, removing the state with the fewest incident edges
/// first.
Regex nfa_to_regex(const Nfa& nfa);

/// Glushkov automaton of a regex (ε-free, one state per symbol occurrence
/// plus the initial state).
Nfa regex_to_nfa(const Regex& r, std::size_t alphabet_size);

}  // namespace pbound

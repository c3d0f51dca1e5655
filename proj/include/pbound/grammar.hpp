#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbound/automata.hpp"
#include "pbound/symbols.hpp"

namespace pbound {

using VarId = std::uint32_t;

/// Right-hand-side entry: a terminal index or a variable index.
struct GSym {
  bool is_var = false;
  std::uint32_t id = 0;

  static GSym term(Symbol s) { return {false, s}; }
  static GSym var(VarId v) { return {true, v}; }
  auto operator<=>(const GSym&) const = default;
};

struct Production {
  VarId lhs = 0;
  std::vector<GSym> rhs;
  auto operator<=>(const Production&) const = default;
};

/// Context-free grammar (X, Σ, δ) with a designated start variable.
class Cfg {
 public:
  Cfg() = default;
  /// A grammar with a single start variable and no productions (L = ∅).
  Cfg(Alphabet terminals, const std::string& start_name);

  const Alphabet& terminals() const { return terminals_; }
  Alphabet& terminals() { return terminals_; }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<Production>& productions() const { return productions_; }
  VarId start() const { return start_; }
  std::size_t num_variables() const { return variables_.size(); }
  const std::string& var_name(VarId v) const { return variables_.at(v); }

  VarId add_variable(const std::string& name);
  std::optional<VarId> find_variable(const std::string& name) const;
  void set_start(VarId v) { start_ = v; }
  void add_production(VarId lhs, std::vector<GSym> rhs);
  /// Sorts and removes duplicate productions.
  void normalize();

  /// Throws InputError if some index is out of range.
  void validate() const;
  /// Every RHS holds at most one variable.
  bool is_linear() const;
  std::size_t size() const;  // Σ (1 + |rhs|)

 private:
  Alphabet terminals_;
  std::vector<std::string> variables_;
  std::unordered_map<std::string, VarId> var_index_;
  std::vector<Production> productions_;
  VarId start_ = 0;
};

/// A Cfg whose productions carry at most one variable each.
class LinearGrammar {
 public:
  /// Throws InputError if `g` has a production with two or more variables.
  explicit LinearGrammar(Cfg g);
  const Cfg& cfg() const { return g_; }

 private:
  Cfg g_;
};

/// Chomsky normal form: A → a and A → B C, plus an "ε ∈ L" flag for the
/// start variable. Variables 0..n-1 keep the numbering of the source
/// grammar (after trimming is NOT applied, so every source variable can
/// still be queried).
struct CnfGrammar {
  std::size_t num_vars = 0;
  std::size_t alphabet_size = 0;
  std::vector<std::pair<VarId, Symbol>> terminal_rules;
  struct Binary {
    VarId lhs, left, right;
  };
  std::vector<Binary> binary_rules;
  std::vector<bool> nullable;  // per variable, in the source grammar
  std::vector<std::string> names;
};

CnfGrammar to_cnf(const Cfg& g);

/// Removes unproductive and unreachable variables. When L(g) = ∅ the
/// result keeps only the start variable and has no productions.
Cfg trim(const Cfg& g);
bool is_empty_language(const Cfg& g);

bool cyk_membership(const Cfg& g, const Word& w);

struct EnumerationBudget {
  std::size_t max_words = 4'000'000;
};

/// { w ∈ L(g) : |w| ≤ max_length }, built bottom-up per variable and
/// length on the CNF. Throws BudgetError past the budget.
std::set<Word> enumerate_words(const Cfg& g, std::size_t max_length,
                               EnumerationBudget budget = {});
/// Same, for L_X(g) with an arbitrary variable X.
std::set<Word> enumerate_words_from(const Cfg& g, VarId x, std::size_t max_length,
                                    EnumerationBudget budget = {});

/// Finite-state transducer with single-symbol inputs and word outputs.
struct Transducer {
  struct Transition {
    State from;
    Symbol input;
    Word output;
    State to;
  };
  std::size_t num_states = 0;
  std::size_t input_size = 0;
  Alphabet output;
  std::vector<State> initial;
  std::vector<bool> accepting;
  std::vector<Transition> transitions;
};

/// { out(run) : run accepts some w ∈ L(g) } via the triple construction.
Cfg product_with_transducer(const Cfg& g, const Transducer& t);
/// L(g) ∩ L(n).
Cfg product_with_nfa(const Cfg& g, const Nfa& n);
/// L(g) ∩ L(d).
Cfg product_with_dfa(const Cfg& g, const Dfa& d);

/// σ(L(g)): each mapped terminal (by name) is replaced by the language of
/// its grammar; unmapped terminals stay. If `target` is given, the result
/// uses exactly that alphabet; otherwise the union of the alphabets in play.
Cfg substitute(const Cfg& g, const std::map<std::string, Cfg>& sub,
               const std::optional<Alphabet>& target = std::nullopt);

/// L(g1)·…·L(gn) ({ε} for an empty list) over `sigma`.
Cfg concat_grammars(const std::vector<Cfg>& gs, const Alphabet& sigma);
/// L(g1) ∪ … ∪ L(gn) (∅ for an empty list) over `sigma`.
Cfg union_grammars(const std::vector<Cfg>& gs, const Alphabet& sigma);

/// { a1^t1 … an^tn : w1^t1 … wn^tn ∈ L(g) } over the fresh alphabet
/// a1..an, for b = [w1, …, wn].
Cfg block_projection(const Cfg& g, const ElementaryBounded& b);
/// The alphabet {a1, …, an} used by block_projection.
Alphabet block_alphabet(std::size_t n);

/// A grammar for a finite set of words.
Cfg finite_language(const Alphabet& sigma, const std::vector<Word>& words);
/// A grammar with one variable per regex node.
Cfg regex_to_cfg(const Regex& r, const Alphabet& sigma);

/// Language-preserving variable elimination: inlines variables that do
/// not occur in their own productions while the production count stays
/// under `max_productions`. The start variable is never removed.
Cfg compact(const Cfg& g, std::size_t max_productions = 4000);

/// Strongly connected components of the "X uses Y" graph, callees before
/// callers.
std::vector<std::vector<VarId>> variable_sccs(const Cfg& g);
/// Variables lying on a cycle of the "X uses Y" graph.
std::vector<bool> recursive_variables(const Cfg& g);

/// Grammar text format: "start X", "terminals a b", "X -> a Y | eps".
Cfg parse_grammar(const std::string& text);
std::string format_grammar(const Cfg& g);

}  // namespace pbound

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pbound/grammar.hpp"

namespace pbound {

/// Productions grouped per variable: F_X is the union of the monomials α
/// with (X, α) a production.
class PolynomialTransformation {
 public:
  explicit PolynomialTransformation(const Cfg& g);

  const Cfg& grammar() const { return *g_; }
  /// Indices into grammar().productions() of the monomials of F_X.
  const std::vector<std::size_t>& monomials(VarId x) const { return by_var_.at(x); }
  /// The purely terminal monomials of F_X, i.e. F(0̈)(X).
  std::vector<Word> constant_words(VarId x) const;

 private:
  const Cfg* g_;
  std::vector<std::vector<std::size_t>> by_var_;
};

/// The linear grammar G̃ over Σ ∪ {v_X}. Variables and start are those of
/// `g`; the symbol v_X of variable X sits at index |Σ| + X and is named
/// "v_X" (primed until it is fresh).
LinearGrammar differential_grammar(const Cfg& g);

/// Index of v_X in the alphabet of G̃.
inline Symbol v_symbol(const Cfg& g, VarId x) { return static_cast<Symbol>(g.terminals().size() + x); }

struct KFoldComposition {
  Cfg base;
  LinearGrammar differential{Cfg(Alphabet{}, "S")};
  std::size_t depth = 0;
  /// F(0̈)(X) per variable, words over Σ.
  std::vector<std::vector<Word>> base_level;
};

/// depth = |variables| when `depth` is 0.
KFoldComposition build_kfold(const Cfg& g, std::size_t depth = 0);

/// σ_0^k(v_X^k) as a grammar over Σ. Level-i copies of G̃ use variables
/// named "Y@i"; level 0 holds "Y@0" → F(0̈)(Y). Trimmed.
Cfg materialize_iterate(const KFoldComposition& kf, VarId x, std::size_t k);

}  // namespace pbound

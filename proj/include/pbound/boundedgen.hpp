#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "pbound/automata.hpp"
#include "pbound/grammar.hpp"
#include "pbound/newton.hpp"

namespace pbound {

/// L_X(lg) = h(L(nfa)·Ã* ∩ S) for a linear grammar. Symbol i < m of
/// `paired` is a_{p_i}, symbol m + i is ã_{p_i}.
struct LinearDecomposition {
  Cfg grammar;  // the grammar trimmed from X; p_i is grammar.productions()[i]
  Alphabet paired;
  std::size_t num_productions = 0;
  std::vector<Word> h;  // indexed by paired symbol, words over grammar.terminals()
  Nfa nfa;              // over a_{p_1}..a_{p_m}; states = variables, then qf
  State final_state = 0;

  /// h(w)·h(tilde(reverse(w))) for w over A.
  Word expand(const Word& w) const;
};

/// Named B-maps of one construction step, for proof dumps.
struct ProofStep {
  std::string label;
  std::vector<std::pair<std::string, ElementaryBounded>> entries;
};
using ProofLog = std::vector<ProofStep>;

/// When n > 0, every construction re-checks its contract lengthwise up to
/// n and throws SoundnessError on a violation. 0 turns checking off.
void set_verification_length(std::size_t n);
std::size_t verification_length();

/// Π(L(g) ∩ b) = Π(L(g)) restricted to words of length ≤ n.
bool check_bounded_property(const Cfg& g, const ElementaryBounded& b, std::size_t n);

/// Π(L(r) ∩ B) = Π(L(r)).
ElementaryBounded bounded_for_regex(const Regex& r, const Alphabet& sigma);

/// u1…uℓ followed by ℓ copies of b, where u_i are the component witnesses
/// of Π(L(g)). Requires Π(L(g) ∩ b) = Π(L(g)).
ElementaryBounded bounded_for_powers(const Cfg& g, const ElementaryBounded& b);

/// Throws InputError when `lg` is not linear.
LinearDecomposition decompose_linear(const LinearGrammar& lg, VarId x);

/// Π(L_X(lg) ∩ B) = Π(L_X(lg)).
ElementaryBounded bounded_for_linear(const LinearGrammar& lg, VarId x);

/// Symbols missing from `sigma` map to themselves in `target` (τ = [a]);
/// a missing symbol absent from `target` is an InputError.
ElementaryBounded bounded_for_substitution(const ElementaryBounded& b, const std::map<std::string, Cfg>& sigma,
                                           const std::map<std::string, ElementaryBounded>& tau,
                                           const Alphabet& target);

/// B(X) with Π(ν_n(X) ∩ B(X)) = Π(ν_n(X)) for every variable, given
/// btilde(X) bounded for L_X(G̃).
std::vector<ElementaryBounded> algorithm1_bounded_sequence(const KFoldComposition& kf,
                                                           const std::vector<ElementaryBounded>& btilde,
                                                           ProofLog* proof = nullptr);

/// Newton: strongly connected components of the variable graph are
/// handled bottom-up; each one goes through the k-fold pipeline (or
/// directly through the linear construction when linear) with lower
/// variables as symbols, which are then substituted back.
/// Pumping: per Parikh component, the witness tree cut at the nodes where
/// the period pumps are inserted; the component lists are concatenated.
/// Auto: Newton unless its result exceeds `auto_newton_limit` symbols or
/// has more blocks than the pumping result.
enum class BoundedMethod { Newton, Pumping, Auto };

struct BoundedOptions {
  BoundedMethod method = BoundedMethod::Auto;
  std::size_t auto_newton_limit = 2000;
};

/// B with Π(L(g) ∩ B) = Π(L(g)).
ElementaryBounded parikh_equivalent_bounded(const Cfg& g, ProofLog* proof = nullptr,
                                            const BoundedOptions& options = {});

/// The pumping construction on its own.
ElementaryBounded bounded_by_pumping(const Cfg& g);
/// Its per-component block lists, whose concatenation is bounded_by_pumping.
std::vector<ElementaryBounded> pumping_components(const Cfg& g);

/// Heuristic: drops each word whose removal keeps the property up to
/// length n. Only enumeration-validated; never applied implicitly.
ElementaryBounded prune_bounded(const Cfg& g, const ElementaryBounded& b, std::size_t n);

/// L(g) ∩ B for B = parikh_equivalent_bounded(g).
Cfg bounded_subset(const Cfg& g, ElementaryBounded* b_out = nullptr, const BoundedOptions& options = {});

}  // namespace pbound

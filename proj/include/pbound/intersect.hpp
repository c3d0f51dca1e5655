#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pbound/automata.hpp"
#include "pbound/grammar.hpp"

namespace pbound {

struct IntersectionResult {
  enum class Kind { NonEmpty, Empty, Unknown };
  Kind kind = Kind::Unknown;
  Word witness;            // meaningful for NonEmpty
  std::size_t rounds = 0;  // rounds started
  std::string reason;      // why Unknown was returned
};

std::string to_string(IntersectionResult::Kind k);

/// Per-round bookkeeping handed to SemiAlgorithmOptions::on_round.
struct RoundTrace {
  std::size_t round = 0;
  std::vector<std::size_t> grammar_sizes;  // productions of each working grammar
  ElementaryBounded bounded;               // B of this round (empty before step 2)
  std::string event;
};

struct SemiAlgorithmOptions {
  std::size_t max_rounds = 5;
  /// When > 0, Empty answers are cross-checked by enumerating every
  /// original grammar up to this length.
  std::size_t oracle_length = 0;
  std::function<void(const RoundTrace&)> on_round;
};

/// (∩ L(gi)) ∩ L(b) ≠ ∅? Returns a CYK-verified witness w1^t1 … wn^tn.
std::optional<Word> intersect_modulo(const std::vector<Cfg>& gs, const ElementaryBounded& b);

/// L(g) \ L(b), trimmed.
Cfg refine(const Cfg& g, const ElementaryBounded& b);

/// Refinement loop over k ≥ 2 grammars sharing one alphabet.
IntersectionResult semi_algorithm(const std::vector<Cfg>& gs, const SemiAlgorithmOptions& options = {});

/// First round i with w ∉ L_i under L_{i+1} = refine(L_i, B(L_i)), with
/// L_0 = L(g). Returns nullopt when w survives `max_rounds` rounds.
std::optional<std::size_t> progress_trace(const Cfg& g, const Word& w, std::size_t max_rounds);

}  // namespace pbound

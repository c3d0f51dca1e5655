#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbound/grammar.hpp"
#include "pbound/intersect.hpp"
#include "pbound/symbols.hpp"

namespace pbound {

/// ⟨g,γ⟩ ↪ ⟨g′,α⟩ with α written top first.
struct PdnRule {
  std::uint32_t global = 0;
  std::uint32_t top = 0;
  std::uint32_t new_global = 0;
  std::vector<std::uint32_t> push;
};

struct PushdownNetwork {
  Alphabet globals;
  Alphabet stack_alphabet;
  std::vector<std::vector<PdnRule>> threads;

  std::size_t num_threads() const { return threads.size(); }
  /// Throws InputError on out-of-range indices or zero threads.
  void validate() const;
};

/// (g, α_1, …, α_n); every stack is written top first.
struct GlobalConfiguration {
  std::uint32_t global = 0;
  std::vector<std::vector<std::uint32_t>> stacks;
  auto operator<=>(const GlobalConfiguration&) const = default;
};

struct AcceptorRule {
  std::uint32_t global = 0;
  std::uint32_t top = 0;
  std::uint32_t new_global = 0;
  std::vector<std::uint32_t> push;
  std::optional<Symbol> label;  // nullopt = ε
};

/// Pushdown system with labeled rules, accepting by empty stack.
struct PushdownAcceptor {
  Alphabet globals;         // G ∪ {⊥}
  Alphabet stack_alphabet;  // Γ ∪ {bottom marker}
  Alphabet input;           // G × {1..n}
  std::vector<AcceptorRule> rules;
  std::uint32_t init_global = 0;
  std::vector<std::uint32_t> init_stack;
};

/// Input alphabet G × {1..n}; the symbol (g, i) is named "(g,i)" and sits at
/// index g * n + (i - 1).
Alphabet switch_alphabet(const PushdownNetwork& pdn);

/// One acceptor per thread. A bottom marker sits under every initial stack
/// so that an emptied thread can still take part in context switches; it
/// is popped only under the target global or ⊥.
std::vector<PushdownAcceptor> encode_to_acceptors(const PushdownNetwork& pdn, const GlobalConfiguration& c0,
                                                  const GlobalConfiguration& target);

/// Triple construction [p, γ, q]; trimmed.
Cfg acceptor_to_cfg(const PushdownAcceptor& pa);

struct PdnInstance {
  PushdownNetwork pdn;
  GlobalConfiguration init;
  GlobalConfiguration target;
};

/// The two-thread counter/bit program family; k ≥ 1.
PdnInstance family_instance(int k);

/// Explicit BFS over global configurations, at most `depth` steps and
/// stack height at most `depth`. Throws BudgetError past `max_states`.
bool pdn_reach_bounded(const PushdownNetwork& pdn, const GlobalConfiguration& c0, const GlobalConfiguration& target,
                       std::size_t depth, std::size_t max_states = 2'000'000);

/// Encodes the instance into CFLs and runs the refinement semi-algorithm.
IntersectionResult reach(const PushdownNetwork& pdn, const GlobalConfiguration& c0,
                         const GlobalConfiguration& target, const SemiAlgorithmOptions& options = {});

/// Human-readable schedule: one "thread i runs with g" line per symbol.
std::string decode_schedule(const PushdownNetwork& pdn, const Word& w);

/// JSON reader/writer for the PDN file format.
PdnInstance parse_pdn_json(const std::string& text);
std::string format_pdn_json(const PdnInstance& inst);

}  // namespace pbound

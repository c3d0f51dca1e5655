#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbound/grammar.hpp"
#include "pbound/symbols.hpp"

namespace pbound {

/// { c + Σ λi pi : λ ∈ ℕ^k }.
struct LinearSet {
  ParikhVector constant;
  std::vector<ParikhVector> periods;

  /// Drops zero periods and duplicates, sorts the rest.
  void normalize();
  bool operator==(const LinearSet&) const = default;
};

struct SemilinearSet {
  std::size_t dim = 0;
  std::vector<LinearSet> components;
};

struct WitnessedComponent {
  LinearSet set;
  Word witness;  // Π(witness) = set.constant
  /// Words b1…bm with Π(L ∩ b1*…bm*) ⊇ set: the witness tree cut at the
  /// nodes where the period pumps are inserted. Empty when not computed.
  std::vector<Word> blocks;
};

struct WitnessedSemilinear {
  std::size_t dim = 0;
  std::vector<WitnessedComponent> components;

  SemilinearSet set() const;
};

/// Nonnegative integer solutions of A·x = b (A given row-wise), found with
/// the Contejean–Devie procedure on [A | −b] with the last coordinate at
/// most 1. Throws BudgetError when the frontier grows past `budget`.
std::optional<std::vector<std::uint64_t>> solve_nonneg(const std::vector<std::vector<std::int64_t>>& a,
                                                       const std::vector<std::int64_t>& b,
                                                       std::size_t budget = 2'000'000);

/// v ∈ c + P*?
bool linear_membership(const LinearSet& l, const ParikhVector& v);
bool sl_membership(const SemilinearSet& s, const ParikhVector& v);

/// Some v ∈ s1 ∩ s2, solving c1 + P1·λ = c2 + P2·μ per component pair in
/// order.
std::optional<ParikhVector> sl_intersection_witness(const SemilinearSet& s1, const SemilinearSet& s2);
/// Some v in the intersection of all sets.
std::optional<ParikhVector> sl_intersection_witness(const std::vector<SemilinearSet>& sets);

struct ParikhBudget {
  std::size_t max_entries = 200'000;
  std::size_t max_search_steps = 50'000'000;
};

/// Π(L(g)) with one witness word per component constant.
WitnessedSemilinear parikh_image(const Cfg& g, ParikhBudget budget = {});

/// Some w ∈ L(g) with Π(w) = v, by dynamic programming over the vectors
/// below v.
std::optional<Word> witness_for_vector(const Cfg& g, const ParikhVector& v);

/// Lines "c = (…); periods = (…),(…)", optionally followed by
/// "; witness = …".
std::string format_semilinear(const SemilinearSet& s);
std::string format_semilinear(const WitnessedSemilinear& s, const Alphabet& sigma);
SemilinearSet parse_semilinear(const std::string& text, std::size_t dim);

}  // namespace pbound

#include "pbound/intersect.hpp"

#include <algorithm>
#include <set>

#include "pbound/boundedgen.hpp"
#include "pbound/error.hpp"
#include "pbound/semilinear.hpp"

namespace pbound {

std::string to_string(IntersectionResult::Kind k) {
  switch (k) {
    case IntersectionResult::Kind::NonEmpty:
      return "NonEmpty";
    case IntersectionResult::Kind::Empty:
      return "Empty";
    case IntersectionResult::Kind::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

namespace {

void check_shared_alphabet(const std::vector<Cfg>& gs) {
  if (gs.empty()) throw InputError("at least one grammar is required");
  for (const auto& g : gs)
    if (!(g.terminals() == gs[0].terminals())) throw InputError("grammars must share one terminal alphabet");
}

Word expand_blocks(const ElementaryBounded& b, const ParikhVector& t) {
  Word w;
  for (std::size_t j = 0; j < t.size(); ++j)
    for (std::uint32_t r = 0; r < t[j]; ++r) w.insert(w.end(), b.words()[j].begin(), b.words()[j].end());
  return w;
}

/// Letters a_j occurring in some word of L(p).
std::vector<bool> used_letters(const Cfg& p) {
  std::vector<bool> used(p.terminals().size(), false);
  const Cfg t = trim(p);
  for (const auto& prod : t.productions())
    for (const auto& s : prod.rhs)
      if (!s.is_var) used[s.id] = true;
  return used;
}

/// Short words of L(g_best) ∩ B checked against the other grammars, by
/// increasing length; cheap and often enough when a witness exists.
std::optional<Word> enumerate_common(const std::vector<Cfg>& gs, const ElementaryBounded& b) {
  constexpr std::size_t kMaxLength = 24;
  constexpr std::size_t kMaxWords = 20'000;
  const Nfa nb = eb_to_nfa(b);
  std::vector<Cfg> products;
  std::size_t best = 0;
  for (const auto& g : gs) products.push_back(product_with_nfa(g, nb));
  for (std::size_t i = 1; i < products.size(); ++i)
    if (products[i].size() < products[best].size()) best = i;
  std::set<Word> seen;
  for (std::size_t len = 0; len <= kMaxLength; len = len ? 2 * len : 2) {
    std::set<Word> words;
    try {
      words = enumerate_words(products[best], len, EnumerationBudget{kMaxWords});
    } catch (const BudgetError&) {
      return std::nullopt;
    }
    std::vector<Word> fresh;
    for (const auto& w : words)
      if (!seen.count(w)) fresh.push_back(w);
    std::stable_sort(fresh.begin(), fresh.end(), [](const Word& x, const Word& y) { return x.size() < y.size(); });
    for (const auto& w : fresh) {
      bool all = true;
      for (std::size_t i = 0; i < gs.size() && all; ++i)
        if (i != best) all = cyk_membership(gs[i], w);
      if (all) return w;
    }
    seen.merge(words);
  }
  return std::nullopt;
}

}  // namespace

std::optional<Word> intersect_modulo(const std::vector<Cfg>& gs_in, const ElementaryBounded& b) {
  check_shared_alphabet(gs_in);
  if (!(b.alphabet() == gs_in[0].terminals())) throw InputError("bounded expression uses a different alphabet");
  std::vector<Cfg> gs;
  for (const auto& g : gs_in) gs.push_back(compact(trim(g)));
  if (b.empty()) {
    for (const auto& g : gs)
      if (!cyk_membership(g, {})) return std::nullopt;
    return Word{};
  }
  auto certified = [&](const Word& w) {
    for (const auto& g : gs_in)
      if (!cyk_membership(g, w)) throw SoundnessError("intersection witness is not in every language");
    return w;
  };
  if (auto w = enumerate_common(gs, b)) return certified(*w);
  // Keep only blocks every language can use: a common word never pumps a
  // block some language cannot use.
  ElementaryBounded cur = b;
  std::vector<Cfg> proj;
  while (true) {
    proj.clear();
    std::vector<bool> keep(cur.size(), true);
    for (const auto& g : gs) {
      proj.push_back(block_projection(g, cur));
      auto used = used_letters(proj.back());
      for (std::size_t j = 0; j < cur.size(); ++j) keep[j] = keep[j] && used[j];
    }
    if (std::all_of(keep.begin(), keep.end(), [](bool k) { return k; })) break;
    std::vector<Word> words;
    for (std::size_t j = 0; j < cur.size(); ++j)
      if (keep[j]) words.push_back(cur.words()[j]);
    cur = ElementaryBounded(b.alphabet(), std::move(words));
    if (cur.empty()) {
      for (const auto& g : gs)
        if (!cyk_membership(g, {})) return std::nullopt;
      return Word{};
    }
  }
  constexpr std::size_t kMaxProjection = 40'000;
  std::vector<SemilinearSet> images;
  for (auto& p : proj) {
    p = compact(p);
    if (p.size() > kMaxProjection) throw BudgetError("block projection too large for the exact check");
    images.push_back(parikh_image(p).set());
  }
  auto v = sl_intersection_witness(images);
  if (!v) return std::nullopt;
  return certified(expand_blocks(cur, *v));
}

Cfg refine(const Cfg& g, const ElementaryBounded& b) {
  ElementaryBounded bt = b.alphabet() == g.terminals() ? b : eb_translate(b, g.terminals());
  return trim(product_with_dfa(g, eb_complement_dfa(bt, g.terminals())));
}

IntersectionResult semi_algorithm(const std::vector<Cfg>& gs, const SemiAlgorithmOptions& options) {
  check_shared_alphabet(gs);
  if (options.max_rounds < 1) throw InputError("the round budget must be at least 1");
  IntersectionResult result;
  std::vector<Cfg> cur;
  for (const auto& g : gs) cur.push_back(trim(g));
  // Empty may be claimed only while every removed part was certified
  // witness-free by a complete bounded check.
  bool removed_certified = true;
  auto report = [&](std::size_t round, const ElementaryBounded& b, const std::string& event) {
    if (!options.on_round) return;
    RoundTrace t;
    t.round = round;
    for (const auto& g : cur) t.grammar_sizes.push_back(g.productions().size());
    t.bounded = b;
    t.event = event;
    options.on_round(t);
  };
  auto claim_empty = [&] {
    if (options.oracle_length > 0) {
      auto common = enumerate_words(gs[0], options.oracle_length);
      for (const auto& w : common) {
        bool all = true;
        for (std::size_t i = 1; i < gs.size() && all; ++i) all = cyk_membership(gs[i], w);
        if (all) throw SoundnessError("Empty answer contradicted by a common word of length " + std::to_string(w.size()));
      }
    }
    result.kind = IntersectionResult::Kind::Empty;
  };
  for (std::size_t round = 1; round <= options.max_rounds; ++round) {
    result.rounds = round;
    // (1) Parikh-disjointness of the working languages.
    const bool some_empty = std::any_of(cur.begin(), cur.end(), [](const Cfg& g) { return is_empty_language(g); });
    if (some_empty && removed_certified) {
      report(round, {}, "a working language is empty");
      claim_empty();
      return result;
    }
    if (some_empty) {
      report(round, {}, "a working language is empty, but an earlier bounded check was incomplete");
      result.reason = "an earlier bounded check exceeded its budget";
      return result;
    }
    try {
      std::vector<SemilinearSet> images;
      for (const auto& g : cur) images.push_back(parikh_image(g).set());
      bool disjoint = false;
      for (std::size_t i = 0; i < images.size() && !disjoint; ++i) {
        if (images[i].components.empty()) disjoint = true;
        for (std::size_t j = i + 1; j < images.size() && !disjoint; ++j)
          disjoint = !sl_intersection_witness(images[i], images[j]);
      }
      if (!disjoint && images.size() > 2) disjoint = !sl_intersection_witness(images);
      if (disjoint && removed_certified) {
        report(round, {}, "Parikh images disjoint");
        claim_empty();
        return result;
      }
      if (disjoint) {
        report(round, {}, "Parikh images disjoint, but an earlier bounded check was incomplete");
        result.reason = "an earlier bounded check exceeded its budget";
        return result;
      }
    } catch (const BudgetError& e) {
      result.reason = e.what();
    }
    // (2) One bounded expression per working language, concatenated.
    ElementaryBounded b(gs[0].terminals(), {});
    try {
      for (const auto& g : cur) b = eb_concat(b, parikh_equivalent_bounded(g));
    } catch (const BudgetError& e) {
      result.reason = e.what();
      report(round, {}, std::string("bounded construction over budget: ") + e.what());
      return result;
    }
    // (3) The decidable check on the original languages. Sub-lists of B
    // are tried first: a witness there is a witness in B.
    try {
      for (const auto& g : cur)
        for (const auto& part : pumping_components(g)) {
          std::optional<Word> w;
          try {
            w = intersect_modulo(gs, part);
          } catch (const BudgetError&) {
          }
          if (w) {
            result.kind = IntersectionResult::Kind::NonEmpty;
            result.witness = *w;
            report(round, b, "witness found in a component sub-list");
            return result;
          }
        }
    } catch (const BudgetError&) {
    }
    try {
      if (auto w = intersect_modulo(gs, b)) {
        result.kind = IntersectionResult::Kind::NonEmpty;
        result.witness = *w;
        report(round, b, "witness found");
        return result;
      }
      report(round, b, "no witness in B");
    } catch (const BudgetError& e) {
      removed_certified = false;
      result.reason = e.what();
      report(round, b, std::string("bounded check over budget: ") + e.what());
    }
    // (4) Remove B from every working language.
    for (auto& g : cur) g = refine(g, b);
  }
  if (result.reason.empty()) result.reason = "round budget exhausted";
  return result;
}

std::optional<std::size_t> progress_trace(const Cfg& g, const Word& w, std::size_t max_rounds) {
  Cfg cur = trim(g);
  for (std::size_t i = 0; i <= max_rounds; ++i) {
    if (!cyk_membership(cur, w)) return i;
    if (i == max_rounds) break;
    cur = refine(cur, parikh_equivalent_bounded(cur));
  }
  return std::nullopt;
}

}  // namespace pbound

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pbound/boundedgen.hpp"
#include "pbound/error.hpp"
#include "pbound/intersect.hpp"

using namespace pbound;
using oracle::grammar;

namespace {

const char* kAnbn = "start S\nterminals a b\nS -> a S b | a b\n";
const char* kAbStar = "start T\nterminals a b\nT -> a b T | eps\n";

Word w(const Cfg& g, const std::string& s) { return parse_word(g.terminals(), s); }

bool common_word(const std::vector<Cfg>& gs, std::size_t n) {
  for (const auto& x : oracle::language(gs[0], n)) {
    bool all = true;
    for (std::size_t i = 1; i < gs.size() && all; ++i) all = oracle::member(gs[i], x);
    if (all) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("intersect_modulo examples") {
  Cfg anbn = grammar(kAnbn), abstar = grammar(kAbStar);
  ElementaryBounded b(anbn.terminals(), {w(anbn, "a"), w(anbn, "b")});
  auto x = intersect_modulo({anbn, abstar}, b);
  REQUIRE(x.has_value());
  CHECK(*x == w(anbn, "a b"));
  CHECK(oracle::member(anbn, *x));
  CHECK(oracle::member(abstar, *x));

  Cfg astar = grammar("start A\nterminals a b\nA -> a A | eps\n");
  Cfg bplus = grammar("start B\nterminals a b\nB -> b B | b\n");
  CHECK_FALSE(intersect_modulo({astar, bplus}, b).has_value());

  Cfg gex = grammar(oracle::kGex);
  auto bg = parikh_equivalent_bounded(gex);
  auto y = intersect_modulo({gex, gex}, bg);
  REQUIRE(y.has_value());
  CHECK(oracle::member(gex, *y));
  CHECK(oracle::in_bounded(bg.words(), *y));
}

TEST_CASE("intersect_modulo with the empty word list checks ε") {
  Cfg abstar = grammar(kAbStar), anbn = grammar(kAnbn);
  ElementaryBounded none(abstar.terminals(), {});
  CHECK(intersect_modulo({abstar, abstar}, none) == Word{});
  CHECK_FALSE(intersect_modulo({abstar, anbn}, none).has_value());
}

TEST_CASE("intersect_modulo agrees with brute force on random pairs") {
  std::mt19937 rng(59);
  for (int trial = 0; trial < 25; ++trial) {
    Cfg g1 = trim(oracle::random_grammar(rng, 2)), g2 = trim(oracle::random_grammar(rng, 2));
    if (g1.productions().empty() || g2.productions().empty()) continue;
    std::vector<Word> blocks;
    for (int k = 1 + rng() % 3; k > 0; --k) {
      Word x;
      for (int l = 1 + rng() % 2; l > 0; --l) x.push_back(rng() % 2);
      blocks.push_back(x);
    }
    ElementaryBounded b(g1.terminals(), blocks);
    std::optional<Word> x;
    try {
      x = intersect_modulo({g1, g2}, b);
    } catch (const BudgetError&) {
      continue;
    }
    if (x) {
      CHECK(oracle::member(g1, *x));
      CHECK(oracle::member(g2, *x));
      CHECK(oracle::in_bounded(blocks, *x));
    } else {
      for (const auto& y : oracle::language(g1, 9))
        if (oracle::in_bounded(blocks, y)) CHECK_FALSE(oracle::member(g2, y));
    }
  }
}

TEST_CASE("intersect_modulo rejects mismatched alphabets") {
  Cfg g = grammar(kAnbn), h = grammar("start S\nS -> c\n");
  ElementaryBounded b(g.terminals(), {w(g, "a")});
  CHECK_THROWS_AS(intersect_modulo({g, h}, b), InputError);
}

TEST_CASE("refine") {
  Cfg gex = grammar(oracle::kGex);
  ElementaryBounded b(gex.terminals(), {w(gex, "a"), w(gex, "a b")});
  auto r = refine(gex, b);
  std::set<Word> expected;
  for (const auto& x : oracle::language(gex, 10))
    if (!oracle::in_bounded(b.words(), x)) expected.insert(x);
  CHECK(oracle::language(r, 10) == expected);

  Cfg abstar = grammar(kAbStar);
  auto r0 = refine(abstar, ElementaryBounded(abstar.terminals(), {}));
  auto l0 = oracle::language(abstar, 8);
  l0.erase(Word{});
  CHECK(oracle::language(r0, 8) == l0);

  Cfg empty = grammar("start S\nterminals a b\nS -> a S\n");
  CHECK(is_empty_language(refine(empty, b)));
}

TEST_CASE("semi_algorithm examples") {
  Cfg aplus = grammar("start A\nterminals a b\nA -> a A | a\n");
  Cfg bplus = grammar("start B\nterminals a b\nB -> b B | b\n");
  auto e = semi_algorithm({aplus, bplus});
  CHECK(e.kind == IntersectionResult::Kind::Empty);
  CHECK(e.rounds == 1);

  auto ne = semi_algorithm({grammar(kAnbn), grammar(kAbStar)});
  REQUIRE(ne.kind == IntersectionResult::Kind::NonEmpty);
  CHECK(ne.rounds == 1);
  CHECK(ne.witness == w(aplus, "a b"));

  SemiAlgorithmOptions zero;
  zero.max_rounds = 0;
  CHECK_THROWS_AS(semi_algorithm({aplus, bplus}, zero), InputError);
}

TEST_CASE("semi_algorithm with three languages") {
  Cfg anbn = grammar(kAnbn), abstar = grammar(kAbStar);
  Cfg even = grammar("start E\nterminals a b\nE -> a E | b E | a b\n");
  auto r = semi_algorithm({anbn, abstar, even});
  REQUIRE(r.kind == IntersectionResult::Kind::NonEmpty);
  CHECK(r.witness == w(anbn, "a b"));
}

TEST_CASE("semi_algorithm reports Unknown when the rounds run out") {
  // a^n b^n and a^n b^(n+1) share no word but have overlapping Parikh
  // images after every finite refinement only when n is unbounded.
  Cfg g1 = grammar("start S\nterminals a b\nS -> a S b | a b\n");
  Cfg g2 = grammar("start S\nterminals a b\nS -> b S a | b a\n");
  SemiAlgorithmOptions one;
  one.max_rounds = 1;
  auto r = semi_algorithm({g1, g2}, one);
  CHECK(r.kind == IntersectionResult::Kind::Unknown);
  CHECK_FALSE(r.reason.empty());
}

TEST_CASE("semi_algorithm answers are sound on random pairs") {
  std::mt19937 rng(61);
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 15; ++trial) {
    Cfg g1 = trim(oracle::random_grammar(rng, 2)), g2 = trim(oracle::random_grammar(rng, 2));
    if (g1.productions().empty() || g2.productions().empty()) continue;
    ++tested;
    SemiAlgorithmOptions opts;
    opts.max_rounds = 2;
    opts.oracle_length = 8;
    auto r = semi_algorithm({g1, g2}, opts);
    if (r.kind == IntersectionResult::Kind::NonEmpty) {
      CHECK(oracle::member(g1, r.witness));
      CHECK(oracle::member(g2, r.witness));
    }
    if (r.kind == IntersectionResult::Kind::Empty) CHECK_FALSE(common_word({g1, g2}, 9));
  }
}

TEST_CASE("round trace reports every round") {
  std::vector<RoundTrace> seen;
  SemiAlgorithmOptions opts;
  opts.on_round = [&](const RoundTrace& t) { seen.push_back(t); };
  auto r = semi_algorithm({grammar(kAnbn), grammar(kAbStar)}, opts);
  REQUIRE(r.kind == IntersectionResult::Kind::NonEmpty);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].round == 1);
  CHECK(seen[0].grammar_sizes.size() == 2);
  CHECK_FALSE(seen[0].bounded.empty());
}

TEST_CASE("refinement rounds strictly shrink the enumerated language") {
  int chains = 0, over_budget = 0;
  for (const auto& [name, g] : oracle::corpus()) {
    if (g.terminals().size() > 2) continue;
    CAPTURE(name);
    ++chains;
    Cfg cur = g;
    for (int round = 0; round < 3; ++round) {
      ElementaryBounded b;
      try {
        b = parikh_equivalent_bounded(cur);
      } catch (const BudgetError&) {
        ++over_budget;
        break;
      }
      Cfg next = refine(cur, b);
      auto before = enumerate_words(cur, 8), after = enumerate_words(next, 8);
      bool hit = false;
      for (const auto& x : before) {
        if (oracle::in_bounded(b.words(), x)) {
          hit = true;
          CHECK_FALSE(after.count(x));
        } else {
          CHECK(after.count(x));
        }
      }
      if (hit) CHECK(after.size() < before.size());
      if (after.empty()) break;
      cur = next;
    }
  }
  CHECK(over_budget * 4 <= chains);
}

TEST_CASE("progress_trace") {
  Cfg gex = grammar(oracle::kGex);
  auto a = progress_trace(gex, w(gex, "a"), 5);
  REQUIRE(a.has_value());
  CHECK(*a >= 1);
  CHECK(*a <= 5);

  auto b0 = parikh_equivalent_bounded(gex);
  for (const auto& x : oracle::language(gex, 6))
    if (oracle::in_bounded(b0.words(), x)) CHECK(progress_trace(gex, x, 3) == std::optional<std::size_t>(1));

  Cfg perms = grammar("start S\nS -> a a b | a b a | b a a\n");
  auto p = progress_trace(perms, w(perms, "a a b"), 10);
  REQUIRE(p.has_value());
  CHECK(*p <= 3);

  CHECK(progress_trace(gex, w(gex, "b"), 3) == std::optional<std::size_t>(0));
}

TEST_CASE("every short word is eventually removed") {
  for (const auto& [name, g] : oracle::corpus()) {
    if (name != "gex" && name != "dyck" && name != "palindromes" && name != "equal_ab" && name != "anbn") continue;
    CAPTURE(name);
    for (const auto& x : oracle::language(g, 5)) {
      CAPTURE(format_word(g.terminals(), x));
      CHECK(progress_trace(g, x, 10).has_value());
    }
  }
}

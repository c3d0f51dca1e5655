#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pbound/newton.hpp"

using namespace pbound;
using oracle::grammar;

namespace {

std::set<std::string> production_strings(const Cfg& g) {
  std::set<std::string> out;
  for (const auto& p : g.productions()) {
    std::string s = g.var_name(p.lhs) + " ->";
    for (const auto& x : p.rhs) s += " " + (x.is_var ? g.var_name(x.id) : g.terminals().name(x.id));
    out.insert(s);
  }
  return out;
}

/// Per-length Parikh sets of L_X(g) up to length n.
std::set<ParikhVector> images_from(const Cfg& g, VarId x, std::size_t n) {
  return oracle::parikh_set(oracle::language_from(g, x, n), g.terminals().size());
}

std::size_t size_bound(const Cfg& g) {
  std::size_t bound = 0;
  for (const auto& p : g.productions()) {
    bound += 1;
    for (const auto& s : p.rhs) bound += s.is_var ? 1 : 0;
  }
  return bound;
}

}  // namespace

TEST_CASE("differential grammar of the example") {
  Cfg gex = grammar(oracle::kGex);
  auto d = differential_grammar(gex);
  std::set<std::string> expected{
      "X0 -> a X1",          "X0 -> a v_X1",      "X0 -> a",         "X1 -> X0 b",
      "X1 -> a X1 b v_X0",   "X1 -> a v_X1 b X0", "X1 -> v_X0 b",    "X1 -> a v_X1 b v_X0",
  };
  CHECK(production_strings(d.cfg()) == expected);
  CHECK(d.cfg().productions().size() == 8);
  CHECK(d.cfg().terminals().name(v_symbol(gex, 0)) == "v_X0");
  CHECK(d.cfg().terminals().name(v_symbol(gex, 1)) == "v_X1");
}

TEST_CASE("differential grammar of terminal-only productions") {
  auto d = differential_grammar(grammar("start X\nX -> a\n"));
  CHECK(production_strings(d.cfg()) == std::set<std::string>{"X -> a"});
}

TEST_CASE("v symbols stay fresh") {
  Cfg g = grammar("start X\nX -> v_X X | a\n");
  auto d = differential_grammar(g);
  CHECK(d.cfg().terminals().name(v_symbol(g, 0)) == "v_X'");
}

TEST_CASE("differential grammars are linear and respect the size bound") {
  for (const auto& [name, g] : oracle::corpus()) {
    CAPTURE(name);
    auto d = differential_grammar(g);
    CHECK(d.cfg().is_linear());
    CHECK(d.cfg().productions().size() <= size_bound(g));
  }
}

TEST_CASE("build_kfold") {
  auto kf = build_kfold(grammar(oracle::kGex));
  CHECK(kf.depth == 2);
  CHECK(kf.base_level[0] == std::vector<Word>{Word{0}});
  CHECK(kf.base_level[1].empty());

  auto single = build_kfold(grammar("start X\nX -> a\n"));
  CHECK(single.depth == 1);
  CHECK(single.base_level[0] == std::vector<Word>{Word{0}});

  auto none = build_kfold(grammar("start X\nX -> a X | Y b\nY -> X X\n"));
  for (const auto& words : none.base_level) CHECK(words.empty());
}

TEST_CASE("materialized iterates of the example") {
  Cfg gex = grammar(oracle::kGex);
  auto kf = build_kfold(gex);
  auto nu0 = materialize_iterate(kf, 0, 0);
  CHECK(oracle::language(nu0, 8) == std::set<Word>{Word{0}});

  // σ0∘σ1(v_X0): the differential grammar with v_X0 ↦ {a}, v_X1 ↦ ∅.
  Cfg nu1 = grammar("start X0\nX0 -> a X1 | a\nX1 -> X0 b | a X1 b a | a b\n");
  CHECK(oracle::language(materialize_iterate(kf, 0, 1), 10) == oracle::language(nu1, 10));

  auto nu2 = materialize_iterate(kf, 0, 2);
  CHECK(images_from(nu2, nu2.start(), 10) == images_from(gex, 0, 10));
}

TEST_CASE("iterates form an ascending chain inside the language") {
  std::mt19937 rng(43);
  std::vector<Cfg> gs{grammar(oracle::kGex)};
  for (int i = 0; i < 6; ++i) gs.push_back(trim(oracle::random_grammar(rng, 2 + i % 2)));
  for (const auto& g : gs) {
    if (g.productions().empty()) continue;
    auto kf = build_kfold(g);
    for (VarId x = 0; x < g.num_variables(); ++x) {
      auto full = oracle::language_from(g, x, 8);
      std::set<Word> prev;
      for (std::size_t k = 0; k <= kf.depth; ++k) {
        auto it = materialize_iterate(kf, x, k);
        auto cur = oracle::language(it, 8);
        for (const auto& w : prev) CHECK(cur.count(w));
        for (const auto& w : cur) CHECK(full.count(w));
        prev = std::move(cur);
      }
    }
  }
}

TEST_CASE("Parikh convergence after n iterates on random grammars") {
  std::mt19937 rng(47);
  int tested = 0;
  while (tested < 10) {
    Cfg g = trim(oracle::random_grammar(rng, 1 + tested % 3));
    if (g.productions().empty()) continue;
    ++tested;
    auto kf = build_kfold(g);
    for (VarId x = 0; x < g.num_variables(); ++x) {
      auto it = materialize_iterate(kf, x, kf.depth);
      CHECK(images_from(it, it.start(), 9) == images_from(g, x, 9));
    }
  }
}

TEST_CASE("depth override and range checks") {
  auto kf = build_kfold(grammar(oracle::kGex), 1);
  CHECK(kf.depth == 1);
  CHECK_THROWS(materialize_iterate(kf, 0, 2));
  CHECK_THROWS(materialize_iterate(kf, 5, 0));
}

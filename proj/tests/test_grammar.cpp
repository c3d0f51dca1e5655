#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pbound/error.hpp"
#include "pbound/grammar.hpp"

using namespace pbound;
using oracle::grammar;

namespace {

Word w(const Cfg& g, const std::string& s) { return parse_word(g.terminals(), s); }

std::set<Word> words_of(const Cfg& g, const std::vector<std::string>& ws) {
  std::set<Word> out;
  for (const auto& s : ws) out.insert(w(g, s));
  return out;
}

}  // namespace

TEST_CASE("grammar text format") {
  Cfg g = grammar("# comment\nstart X0\nX0 -> a X1 | a\nX1 -> X0 b | a X1 b X0\n");
  CHECK(g.num_variables() == 2);
  CHECK(g.productions().size() == 4);
  CHECK(g.terminals().names() == std::vector<std::string>{"a", "b"});
  CHECK(g.var_name(g.start()) == "X0");
  Cfg e = grammar("start S\nS -> eps | a S\n");
  CHECK(cyk_membership(e, {}));
  Cfg again = parse_grammar(format_grammar(g));
  CHECK(oracle::language(again, 8) == oracle::language(g, 8));
}

TEST_CASE("grammar parse errors carry line numbers") {
  try {
    parse_grammar("start S\nS -> a\nS a b\n");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_grammar("S -> -> a\n"), InputError);
}

TEST_CASE("trim") {
  Cfg g = grammar("start S\nS -> a S | b\nY -> a Y a | a\n");
  Cfg t = trim(g);
  CHECK_FALSE(t.find_variable("Y").has_value());
  CHECK(oracle::language(t, 8) == oracle::language(g, 8));

  Cfg loop = grammar("start X0\nX0 -> X0\n");
  Cfg tl = trim(loop);
  CHECK(tl.productions().empty());
  CHECK(is_empty_language(loop));

  Cfg gex = grammar(oracle::kGex);
  Cfg tg = trim(gex);
  CHECK(tg.productions() == gex.productions());
  CHECK(tg.variables() == gex.variables());
}

TEST_CASE("trim keeps every variable productive and reachable on random grammars") {
  std::mt19937 rng(17);
  for (int i = 0; i < 20; ++i) {
    Cfg g = oracle::random_grammar(rng, 3);
    g.add_variable("Dead");
    g.add_production(*g.find_variable("Dead"), {GSym::var(*g.find_variable("Dead"))});
    Cfg t = trim(g);
    CHECK_FALSE(t.find_variable("Dead").has_value());
    CHECK(oracle::language(t, 7) == oracle::language(g, 7));
    for (VarId x = 0; x < t.num_variables(); ++x) CHECK_FALSE(oracle::language_from(t, x, 9).empty());
  }
}

TEST_CASE("cyk_membership") {
  Cfg g = grammar(oracle::kGex);
  CHECK(cyk_membership(g, w(g, "a")));
  CHECK(cyk_membership(g, w(g, "a a b")));
  CHECK_FALSE(cyk_membership(g, w(g, "b")));
  CHECK_FALSE(cyk_membership(g, {}));
}

TEST_CASE("cyk_membership agrees with the derivation oracle") {
  auto corpus = oracle::corpus();
  for (const auto& [name, g] : corpus) {
    CAPTURE(name);
    std::size_t n = g.terminals().size() > 2 ? 6 : 8;
    for (const auto& x : oracle::words_upto(g.terminals().size(), n)) CHECK(cyk_membership(g, x) == oracle::member(g, x));
  }
}

TEST_CASE("enumerate_words") {
  Cfg g = grammar(oracle::kGex);
  CHECK(enumerate_words(g, 1) == words_of(g, {"a"}));
  CHECK(enumerate_words(g, 3) == words_of(g, {"a", "a a b"}));
  Cfg empty = grammar("start S\nS -> S a\n");
  CHECK(enumerate_words(empty, 5).empty());
  for (const auto& [name, h] : oracle::corpus()) {
    CAPTURE(name);
    std::size_t n = h.terminals().size() > 2 ? 6 : 9;
    CHECK(enumerate_words(h, n) == oracle::language(h, n));
  }
  CHECK_THROWS_AS(enumerate_words(grammar("start S\nS -> a S | b S | eps\n"), 12, EnumerationBudget{100}),
                  BudgetError);
}

TEST_CASE("product_with_dfa") {
  Cfg g = grammar(oracle::kGex);
  ElementaryBounded astarbstar(g.terminals(), {w(g, "a"), w(g, "b")});
  Dfa d = determinize(eb_to_nfa(astarbstar));
  Cfg p = product_with_dfa(g, d);
  std::set<Word> expected;
  for (const auto& x : oracle::language(g, 8))
    if (oracle::in_bounded(astarbstar.words(), x)) expected.insert(x);
  CHECK(oracle::language(p, 8) == expected);
  CHECK(is_empty_language(product_with_dfa(g, empty_dfa(2))));
  CHECK(oracle::language(product_with_dfa(g, universal_dfa(2)), 8) == oracle::language(g, 8));
}

TEST_CASE("product_with_dfa on random grammars and automata") {
  std::mt19937 rng(23);
  for (int i = 0; i < 15; ++i) {
    Cfg g = oracle::random_grammar(rng, 2);
    Nfa n;
    n.alphabet_size = 2;
    for (int s = 0; s < 3; ++s) n.add_state(rng() % 2 == 0);
    n.initial = {0};
    for (int t = 0; t < 6; ++t) n.add_transition(rng() % 3, rng() % 2, rng() % 3);
    Dfa d = determinize(n);
    Cfg p = product_with_dfa(g, d);
    Cfg pn = product_with_nfa(g, n);
    std::set<Word> expected;
    for (const auto& x : oracle::language(g, 8))
      if (n.accepts(x)) expected.insert(x);
    CHECK(oracle::language(p, 8) == expected);
    CHECK(oracle::language(pn, 8) == expected);
  }
}

TEST_CASE("substitute") {
  Cfg g = grammar("start S\nS -> a b\n");
  Alphabet cd({"c", "d"});
  std::map<std::string, Cfg> sub;
  sub["a"] = finite_language(cd, {parse_word(cd, "c")});
  sub["b"] = finite_language(cd, {parse_word(cd, "d"), parse_word(cd, "d d")});
  Cfg s = substitute(g, sub, cd);
  CHECK(oracle::language(s, 5) == std::set<Word>{parse_word(cd, "c d"), parse_word(cd, "c d d")});

  Cfg gex = grammar(oracle::kGex);
  CHECK(oracle::language(substitute(gex, {}), 7) == oracle::language(gex, 7));

  // σ(u·v) = σ(u)·σ(v) on finite languages.
  Alphabet ab({"a", "b"});
  Cfg u = finite_language(ab, {parse_word(ab, "a"), parse_word(ab, "a b")});
  Cfg v = finite_language(ab, {parse_word(ab, "b")});
  std::map<std::string, Cfg> sigma;
  sigma["a"] = finite_language(ab, {parse_word(ab, "b"), parse_word(ab, "a a")});
  auto lhs = substitute(concat_grammars({u, v}, ab), sigma, ab);
  auto rhs = concat_grammars({substitute(u, sigma, ab), substitute(v, sigma, ab)}, ab);
  CHECK(oracle::language(lhs, 8) == oracle::language(rhs, 8));

  Cfg mismatch = grammar("start S\nS -> x\n");
  std::map<std::string, Cfg> bad;
  bad["a"] = mismatch;
  CHECK_THROWS_AS(substitute(g, bad, ab), InputError);
}

TEST_CASE("concat and union") {
  Alphabet ab({"a", "b"});
  Cfg a = finite_language(ab, {parse_word(ab, "a")});
  Cfg b = finite_language(ab, {parse_word(ab, "b")});
  CHECK(oracle::language(concat_grammars({a, b}, ab), 4) == std::set<Word>{parse_word(ab, "a b")});
  CHECK(oracle::language(union_grammars({a, b}, ab), 4) == std::set<Word>{parse_word(ab, "a"), parse_word(ab, "b")});
  CHECK(oracle::language(concat_grammars({}, ab), 3) == std::set<Word>{Word{}});
  CHECK(oracle::language(union_grammars({}, ab), 3).empty());
  Cfg gex = grammar(oracle::kGex);
  Cfg eps = finite_language(ab, {Word{}});
  CHECK(oracle::language(concat_grammars({gex, eps}, ab), 7) == oracle::language(gex, 7));
}

TEST_CASE("block_projection") {
  Cfg anbn = grammar("start S\nS -> a S b | a b\n");
  ElementaryBounded b(anbn.terminals(), {w(anbn, "a"), w(anbn, "b")});
  Cfg p = block_projection(anbn, b);
  Alphabet a = block_alphabet(2);
  CHECK(p.terminals() == a);
  std::set<Word> expected;
  for (int n = 1; 2 * n <= 8; ++n) {
    Word x(n, 0);
    x.insert(x.end(), n, 1);
    expected.insert(x);
  }
  CHECK(oracle::language(p, 8) == expected);

  Cfg abstar = grammar("start S\nS -> a b S | eps\n");
  CHECK(oracle::language(block_projection(abstar, b), 8) == std::set<Word>{Word{}, Word{0, 1}});

  Cfg empty = grammar("start S\nS -> a S\n");
  CHECK(is_empty_language(block_projection(empty, ElementaryBounded(empty.terminals(), {w(empty, "a")}))));
}

TEST_CASE("block_projection matches its definition on block vectors") {
  for (const auto& [name, g] : oracle::corpus()) {
    if (g.terminals().size() != 2) continue;
    CAPTURE(name);
    std::vector<Word> blocks{w(g, "a b"), w(g, "a"), w(g, "b"), w(g, "b a")};
    ElementaryBounded b(g.terminals(), blocks);
    Cfg p = block_projection(g, b);
    for (const auto& t : oracle::words_upto(4, 5)) {
      if (!std::is_sorted(t.begin(), t.end())) continue;
      Word expanded;
      for (auto j : t) expanded.insert(expanded.end(), blocks[j].begin(), blocks[j].end());
      if (expanded.size() > 8) continue;
      CHECK(oracle::member(p, t) == oracle::member(g, expanded));
    }
  }
}

TEST_CASE("linear grammar validation") {
  CHECK_THROWS_AS(LinearGrammar(grammar("start S\nS -> S S | a\n")), InputError);
  CHECK_NOTHROW(LinearGrammar(grammar("start S\nS -> a S b | c\n")));
  CHECK(grammar("start S\nS -> a S b | c\n").is_linear());
}

TEST_CASE("compact preserves the language") {
  for (const auto& [name, g] : oracle::corpus()) {
    CAPTURE(name);
    std::size_t n = g.terminals().size() > 2 ? 6 : 8;
    CHECK(oracle::language(compact(g), n) == oracle::language(g, n));
  }
}

TEST_CASE("fresh names are deterministic") {
  Cfg g = grammar(oracle::kGex);
  ElementaryBounded b(g.terminals(), {w(g, "a"), w(g, "b")});
  CHECK(format_grammar(product_with_dfa(g, determinize(eb_to_nfa(b)))) ==
        format_grammar(product_with_dfa(g, determinize(eb_to_nfa(b)))));
  CHECK(format_grammar(block_projection(g, b)) == format_grammar(block_projection(g, b)));
}

TEST_CASE("regex_to_cfg") {
  Alphabet ab({"a", "b"});
  Regex r = Regex::star(Regex::alt(Regex::concat(Regex::symbol(0), Regex::symbol(1)), Regex::symbol(1)));
  Cfg g = regex_to_cfg(r, ab);
  for (const auto& x : oracle::words_upto(2, 7)) CHECK(oracle::member(g, x) == r.matches(x));
}

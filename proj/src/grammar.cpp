#include "pbound/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_set>

#include "pbound/error.hpp"

namespace pbound {

namespace {

std::string fresh_name(const Cfg& g, std::string base) {
  while (g.find_variable(base)) base += "'";
  return base;
}

std::uint64_t pack2(std::uint64_t a, std::uint64_t b) { return (a << 32) | b; }

}  // namespace

// ---------------------------------------------------------------- Cfg

Cfg::Cfg(Alphabet terminals, const std::string& start_name) : terminals_(std::move(terminals)) {
  start_ = add_variable(start_name);
}

VarId Cfg::add_variable(const std::string& name) {
  if (auto it = var_index_.find(name); it != var_index_.end()) return it->second;
  auto id = static_cast<VarId>(variables_.size());
  variables_.push_back(name);
  var_index_.emplace(name, id);
  return id;
}

std::optional<VarId> Cfg::find_variable(const std::string& name) const {
  auto it = var_index_.find(name);
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

void Cfg::add_production(VarId lhs, std::vector<GSym> rhs) {
  productions_.push_back({lhs, std::move(rhs)});
}

void Cfg::normalize() {
  std::sort(productions_.begin(), productions_.end());
  productions_.erase(std::unique(productions_.begin(), productions_.end()), productions_.end());
}

void Cfg::validate() const {
  if (variables_.empty()) throw InputError("grammar has no variables");
  if (start_ >= variables_.size()) throw InputError("start variable out of range");
  for (const auto& p : productions_) {
    if (p.lhs >= variables_.size()) throw InputError("production head out of range");
    for (const auto& s : p.rhs) {
      if (s.is_var ? s.id >= variables_.size() : s.id >= terminals_.size())
        throw InputError("production body symbol out of range");
    }
  }
}

bool Cfg::is_linear() const {
  for (const auto& p : productions_) {
    auto vars = std::count_if(p.rhs.begin(), p.rhs.end(), [](const GSym& s) { return s.is_var; });
    if (vars > 1) return false;
  }
  return true;
}

std::size_t Cfg::size() const {
  std::size_t n = 0;
  for (const auto& p : productions_) n += 1 + p.rhs.size();
  return n;
}

LinearGrammar::LinearGrammar(Cfg g) : g_(std::move(g)) {
  g_.validate();
  if (!g_.is_linear()) throw InputError("grammar is not linear");
}

// ---------------------------------------------------------------- trim

namespace {

std::vector<bool> productive_vars(const Cfg& g) {
  std::vector<bool> prod(g.num_variables(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.productions()) {
      if (prod[p.lhs]) continue;
      bool ok = std::all_of(p.rhs.begin(), p.rhs.end(),
                            [&](const GSym& s) { return !s.is_var || prod[s.id]; });
      if (ok) prod[p.lhs] = changed = true;
    }
  }
  return prod;
}

}  // namespace

Cfg trim(const Cfg& g) {
  g.validate();
  auto prod = productive_vars(g);
  std::vector<std::vector<std::size_t>> by_lhs(g.num_variables());
  for (std::size_t i = 0; i < g.productions().size(); ++i) {
    const auto& p = g.productions()[i];
    bool ok = prod[p.lhs] && std::all_of(p.rhs.begin(), p.rhs.end(), [&](const GSym& s) {
                return !s.is_var || prod[s.id];
              });
    // X -> X adds nothing to the language.
    bool unit_loop = p.rhs.size() == 1 && p.rhs[0].is_var && p.rhs[0].id == p.lhs;
    if (ok && !unit_loop) by_lhs[p.lhs].push_back(i);
  }
  std::vector<bool> reach(g.num_variables(), false);
  std::vector<VarId> order;
  if (prod[g.start()]) {
    std::deque<VarId> queue{g.start()};
    reach[g.start()] = true;
    while (!queue.empty()) {
      VarId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (auto i : by_lhs[v])
        for (const auto& s : g.productions()[i].rhs)
          if (s.is_var && !reach[s.id]) {
            reach[s.id] = true;
            queue.push_back(s.id);
          }
    }
  }
  Cfg out(g.terminals(), g.var_name(g.start()));
  std::vector<VarId> remap(g.num_variables(), 0);
  // Keep the source order so that output stays stable.
  for (VarId v = 0; v < g.num_variables(); ++v)
    if (reach[v]) remap[v] = out.add_variable(g.var_name(v));
  for (VarId v = 0; v < g.num_variables(); ++v) {
    if (!reach[v]) continue;
    for (auto i : by_lhs[v]) {
      std::vector<GSym> rhs = g.productions()[i].rhs;
      for (auto& s : rhs)
        if (s.is_var) s.id = remap[s.id];
      out.add_production(remap[v], std::move(rhs));
    }
  }
  out.normalize();
  return out;
}

bool is_empty_language(const Cfg& g) {
  g.validate();
  return !productive_vars(g)[g.start()];
}

// ---------------------------------------------------------------- CNF

CnfGrammar to_cnf(const Cfg& g) {
  g.validate();
  CnfGrammar c;
  c.alphabet_size = g.terminals().size();
  c.names = g.variables();
  const std::size_t source_vars = g.num_variables();
  auto new_var = [&](std::string name) {
    c.names.push_back(std::move(name));
    return static_cast<VarId>(c.names.size() - 1);
  };
  std::vector<VarId> term_var(g.terminals().size(), UINT32_MAX);
  auto var_for_term = [&](Symbol a) {
    if (term_var[a] == UINT32_MAX) {
      term_var[a] = new_var("$" + g.terminals().name(a));
      c.terminal_rules.push_back({term_var[a], a});
    }
    return term_var[a];
  };

  std::vector<bool> eps_rule(source_vars, false);
  std::vector<std::pair<VarId, VarId>> units;
  std::size_t aux = 0;
  for (const auto& p : g.productions()) {
    if (p.rhs.empty()) {
      eps_rule[p.lhs] = true;
    } else if (p.rhs.size() == 1) {
      if (p.rhs[0].is_var)
        units.push_back({p.lhs, p.rhs[0].id});
      else
        c.terminal_rules.push_back({p.lhs, p.rhs[0].id});
    } else {
      std::vector<VarId> body;
      for (const auto& s : p.rhs) body.push_back(s.is_var ? s.id : var_for_term(s.id));
      VarId head = p.lhs;
      for (std::size_t i = 0; i + 2 < body.size(); ++i) {
        VarId next = new_var("$" + std::to_string(++aux));
        c.binary_rules.push_back({head, body[i], next});
        head = next;
      }
      c.binary_rules.push_back({head, body[body.size() - 2], body.back()});
    }
  }
  c.num_vars = c.names.size();

  std::vector<bool> nullable(c.num_vars, false);
  for (std::size_t v = 0; v < source_vars; ++v) nullable[v] = eps_rule[v];
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto [a, b] : units)
      if (!nullable[a] && nullable[b]) nullable[a] = changed = true;
    for (const auto& r : c.binary_rules)
      if (!nullable[r.lhs] && nullable[r.left] && nullable[r.right]) nullable[r.lhs] = changed = true;
  }
  for (const auto& r : std::vector<CnfGrammar::Binary>(c.binary_rules)) {
    if (nullable[r.left]) units.push_back({r.lhs, r.right});
    if (nullable[r.right]) units.push_back({r.lhs, r.left});
  }

  // Unit closure.
  std::vector<std::vector<VarId>> unit_succ(c.num_vars);
  for (auto [a, b] : units)
    if (a != b) unit_succ[a].push_back(b);
  std::vector<std::vector<std::size_t>> term_by(c.num_vars), bin_by(c.num_vars);
  for (std::size_t i = 0; i < c.terminal_rules.size(); ++i) term_by[c.terminal_rules[i].first].push_back(i);
  for (std::size_t i = 0; i < c.binary_rules.size(); ++i) bin_by[c.binary_rules[i].lhs].push_back(i);
  std::vector<std::pair<VarId, Symbol>> terms;
  std::vector<CnfGrammar::Binary> bins;
  std::vector<std::uint32_t> seen(c.num_vars, UINT32_MAX);
  for (VarId a = 0; a < c.num_vars; ++a) {
    std::vector<VarId> stack{a};
    seen[a] = a;
    while (!stack.empty()) {
      VarId b = stack.back();
      stack.pop_back();
      for (auto i : term_by[b]) terms.push_back({a, c.terminal_rules[i].second});
      for (auto i : bin_by[b]) bins.push_back({a, c.binary_rules[i].left, c.binary_rules[i].right});
      for (VarId s : unit_succ[b])
        if (seen[s] != a) {
          seen[s] = a;
          stack.push_back(s);
        }
    }
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  auto key = [](const CnfGrammar::Binary& r) { return std::tuple(r.lhs, r.left, r.right); };
  std::sort(bins.begin(), bins.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  bins.erase(std::unique(bins.begin(), bins.end(), [&](auto& x, auto& y) { return key(x) == key(y); }),
             bins.end());
  c.terminal_rules = std::move(terms);
  c.binary_rules = std::move(bins);
  c.nullable = std::move(nullable);
  return c;
}

// ---------------------------------------------------------------- CYK

namespace {

bool cyk_cnf(const CnfGrammar& c, VarId x, const Word& w) {
  const std::size_t n = w.size();
  if (n == 0) return c.nullable[x];
  const std::size_t nv = c.num_vars;
  // table[(i * (n + 1) + len) * nv + A]
  std::vector<char> table((n * (n + 1) + n + 1) * nv, 0);
  auto cell = [&](std::size_t i, std::size_t len) { return &table[(i * (n + 1) + len) * nv]; };
  for (std::size_t i = 0; i < n; ++i)
    for (auto [a, s] : c.terminal_rules)
      if (s == w[i]) cell(i, 1)[a] = 1;
  for (std::size_t len = 2; len <= n; ++len)
    for (std::size_t i = 0; i + len <= n; ++i) {
      char* out = cell(i, len);
      for (std::size_t k = 1; k < len; ++k) {
        const char* l = cell(i, k);
        const char* r = cell(i + k, len - k);
        for (const auto& rule : c.binary_rules)
          if (l[rule.left] && r[rule.right]) out[rule.lhs] = 1;
      }
    }
  return cell(0, n)[x] != 0;
}

}  // namespace

bool cyk_membership(const Cfg& g, const Word& w) {
  for (Symbol s : w)
    if (s >= g.terminals().size()) return false;
  return cyk_cnf(to_cnf(g), g.start(), w);
}

// ---------------------------------------------------------------- enumeration

std::set<Word> enumerate_words_from(const Cfg& g, VarId x, std::size_t max_length,
                                    EnumerationBudget budget) {
  CnfGrammar c = to_cnf(g);
  if (x >= g.num_variables()) throw InputError("variable out of range");
  // Restrict to variables reachable from x.
  std::vector<bool> reach(c.num_vars, false);
  std::vector<std::vector<std::size_t>> bin_by(c.num_vars);
  for (std::size_t i = 0; i < c.binary_rules.size(); ++i) bin_by[c.binary_rules[i].lhs].push_back(i);
  std::vector<VarId> stack{x};
  reach[x] = true;
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    for (auto i : bin_by[v])
      for (VarId s : {c.binary_rules[i].left, c.binary_rules[i].right})
        if (!reach[s]) {
          reach[s] = true;
          stack.push_back(s);
        }
  }
  std::vector<std::vector<std::set<Word>>> words(c.num_vars,
                                                 std::vector<std::set<Word>>(max_length + 1));
  std::size_t total = 0;
  auto charge = [&] {
    if (++total > budget.max_words) throw BudgetError("word enumeration budget exceeded");
  };
  if (max_length >= 1)
    for (auto [a, s] : c.terminal_rules)
      if (reach[a] && words[a][1].insert(Word{s}).second) charge();
  for (std::size_t len = 2; len <= max_length; ++len)
    for (const auto& r : c.binary_rules) {
      if (!reach[r.lhs]) continue;
      for (std::size_t k = 1; k < len; ++k)
        for (const auto& u : words[r.left][k])
          for (const auto& v : words[r.right][len - k]) {
            Word w = u;
            w.insert(w.end(), v.begin(), v.end());
            if (words[r.lhs][len].insert(std::move(w)).second) charge();
          }
    }
  std::set<Word> out;
  if (c.nullable[x]) out.insert(Word{});
  for (std::size_t len = 1; len <= max_length; ++len) out.insert(words[x][len].begin(), words[x][len].end());
  return out;
}

std::set<Word> enumerate_words(const Cfg& g, std::size_t max_length, EnumerationBudget budget) {
  return enumerate_words_from(g, g.start(), max_length, budget);
}

// ---------------------------------------------------------------- products

Cfg product_with_transducer(const Cfg& g, const Transducer& t) {
  CnfGrammar c = to_cnf(g);
  const std::uint64_t nq = t.num_states;
  for (const auto& tr : t.transitions)
    if (tr.from >= nq || tr.to >= nq || tr.input >= t.input_size)
      throw InputError("transducer transition out of range");
  if (t.input_size != c.alphabet_size) throw InputError("transducer input alphabet does not match grammar");

  auto tkey = [&](std::uint64_t p, std::uint64_t a, std::uint64_t q) { return (p * c.num_vars + a) * nq + q; };
  std::unordered_set<std::uint64_t> derived;
  std::unordered_map<std::uint64_t, std::vector<State>> ends, starts;  // key (state, var)
  std::vector<std::vector<std::pair<State, State>>> by_var(c.num_vars);
  std::deque<std::tuple<State, VarId, State>> queue;
  auto derive = [&](State p, VarId a, State q) {
    if (!derived.insert(tkey(p, a, q)).second) return;
    ends[pack2(p, a)].push_back(q);
    starts[pack2(q, a)].push_back(p);
    by_var[a].push_back({p, q});
    queue.push_back({p, a, q});
  };

  std::vector<std::vector<std::size_t>> trans_by_input(t.input_size);
  for (std::size_t i = 0; i < t.transitions.size(); ++i) trans_by_input[t.transitions[i].input].push_back(i);
  for (auto [a, s] : c.terminal_rules)
    for (auto i : trans_by_input[s]) derive(t.transitions[i].from, a, t.transitions[i].to);

  std::vector<std::vector<std::pair<VarId, VarId>>> by_left(c.num_vars), by_right(c.num_vars);
  for (const auto& r : c.binary_rules) {
    by_left[r.left].push_back({r.lhs, r.right});
    by_right[r.right].push_back({r.lhs, r.left});
  }
  while (!queue.empty()) {
    auto [p, x, q] = queue.front();
    queue.pop_front();
    for (auto [a, cvar] : by_left[x]) {
      auto it = ends.find(pack2(q, cvar));
      if (it == ends.end()) continue;
      const auto& list = it->second;
      for (std::size_t i = 0; i < list.size(); ++i) derive(p, a, list[i]);
    }
    for (auto [a, bvar] : by_right[x]) {
      auto it = starts.find(pack2(p, bvar));
      if (it == starts.end()) continue;
      const auto& list = it->second;
      for (std::size_t i = 0; i < list.size(); ++i) derive(list[i], a, q);
    }
  }

  // Productions over triples, then keep the part reachable from the start.
  std::unordered_map<std::uint64_t, std::uint32_t> tid;
  std::vector<std::tuple<State, VarId, State>> triples;
  auto id_of = [&](State p, VarId a, State q) {
    auto [it, fresh] = tid.emplace(tkey(p, a, q), static_cast<std::uint32_t>(triples.size()));
    if (fresh) triples.push_back({p, a, q});
    return it->second;
  };
  struct TermProd {
    std::uint32_t lhs;
    const Word* out;
  };
  struct BinProd {
    std::uint32_t lhs, left, right;
  };
  std::vector<TermProd> tprods;
  std::vector<BinProd> bprods;
  for (auto [a, s] : c.terminal_rules)
    for (auto i : trans_by_input[s]) {
      const auto& tr = t.transitions[i];
      tprods.push_back({id_of(tr.from, a, tr.to), &tr.output});
    }
  for (const auto& r : c.binary_rules)
    for (auto [p, q] : by_var[r.left]) {
      auto it = ends.find(pack2(q, r.right));
      if (it == ends.end()) continue;
      for (State s : it->second) bprods.push_back({id_of(p, r.lhs, s), id_of(p, r.left, q), id_of(q, r.right, s)});
    }

  Cfg out(t.output, g.var_name(g.start()));
  const VarId start = out.start();
  std::vector<std::vector<std::size_t>> tp_by(triples.size()), bp_by(triples.size());
  for (std::size_t i = 0; i < tprods.size(); ++i) tp_by[tprods[i].lhs].push_back(i);
  for (std::size_t i = 0; i < bprods.size(); ++i) bp_by[bprods[i].lhs].push_back(i);

  std::vector<VarId> var_of(triples.size(), UINT32_MAX);
  std::vector<std::uint32_t> todo;
  auto var_for = [&](std::uint32_t id) {
    if (var_of[id] == UINT32_MAX) {
      auto [p, a, q] = triples[id];
      std::string name = c.names[a] + "[" + std::to_string(p) + "," + std::to_string(q) + "]";
      var_of[id] = out.add_variable(fresh_name(out, name));
      todo.push_back(id);
    }
    return var_of[id];
  };
  std::vector<bool> is_init(nq, false);
  for (State s : t.initial) is_init[s] = true;
  bool eps_ok = false;
  for (State s : t.initial)
    if (t.accepting[s]) eps_ok = true;
  if (eps_ok && c.nullable[g.start()]) out.add_production(start, {});
  for (State p : t.initial) {
    auto it = ends.find(pack2(p, g.start()));
    if (it == ends.end()) continue;
    for (State q : it->second)
      if (t.accepting[q]) out.add_production(start, {GSym::var(var_for(id_of(p, g.start(), q)))});
  }
  while (!todo.empty()) {
    auto id = todo.back();
    todo.pop_back();
    VarId lhs = var_of[id];
    for (auto i : tp_by[id]) {
      std::vector<GSym> rhs;
      for (Symbol s : *tprods[i].out) rhs.push_back(GSym::term(s));
      out.add_production(lhs, std::move(rhs));
    }
    for (auto i : bp_by[id]) {
      const auto& b = bprods[i];
      VarId l = var_for(b.left);
      VarId r = var_for(b.right);
      out.add_production(lhs, {GSym::var(l), GSym::var(r)});
    }
  }
  return trim(out);
}

Cfg product_with_nfa(const Cfg& g, const Nfa& n) {
  n.validate();
  if (n.alphabet_size != g.terminals().size()) throw InputError("automaton alphabet does not match grammar");
  Transducer t;
  t.num_states = n.num_states;
  t.input_size = n.alphabet_size;
  t.output = g.terminals();
  t.initial = n.initial;
  t.accepting = n.accepting;
  for (const auto& tr : n.transitions) t.transitions.push_back({tr.from, tr.symbol, Word{tr.symbol}, tr.to});
  return product_with_transducer(g, t);
}

Cfg product_with_dfa(const Cfg& g, const Dfa& d) { return product_with_nfa(g, d.to_nfa()); }

// ---------------------------------------------------------------- substitution

namespace {

/// Copies the variables and productions of `src` into `dst`, mapping
/// terminals with `term`. Returns the variable map.
std::vector<VarId> copy_into(Cfg& dst, const Cfg& src, const std::string& suffix,
                             const std::function<GSym(Symbol)>& term) {
  std::vector<VarId> map(src.num_variables());
  for (VarId v = 0; v < src.num_variables(); ++v) map[v] = dst.add_variable(fresh_name(dst, src.var_name(v) + suffix));
  for (const auto& p : src.productions()) {
    std::vector<GSym> rhs;
    for (const auto& s : p.rhs) rhs.push_back(s.is_var ? GSym::var(map[s.id]) : term(s.id));
    dst.add_production(map[p.lhs], std::move(rhs));
  }
  return map;
}

}  // namespace

Cfg substitute(const Cfg& g, const std::map<std::string, Cfg>& sub, const std::optional<Alphabet>& target) {
  g.validate();
  Alphabet sigma;
  if (target) {
    sigma = *target;
  } else {
    for (const auto& name : g.terminals().names()) {
      auto it = sub.find(name);
      if (it == sub.end())
        sigma.add(name);
      else
        for (const auto& n2 : it->second.terminals().names()) sigma.add(n2);
    }
  }
  Cfg out(sigma, g.var_name(g.start()));
  std::vector<VarId> map(g.num_variables());
  for (VarId v = 0; v < g.num_variables(); ++v) map[v] = out.add_variable(g.var_name(v));
  std::vector<std::optional<VarId>> copy_start(g.terminals().size());
  for (Symbol a = 0; a < g.terminals().size(); ++a) {
    auto it = sub.find(g.terminals().name(a));
    if (it == sub.end()) continue;
    const Cfg& sg = it->second;
    sg.validate();
    auto vm = copy_into(out, sg, "~" + g.terminals().name(a),
                        [&](Symbol s) { return GSym::term(sigma.at(sg.terminals().name(s))); });
    copy_start[a] = vm[sg.start()];
  }
  for (const auto& p : g.productions()) {
    std::vector<GSym> rhs;
    for (const auto& s : p.rhs) {
      if (s.is_var)
        rhs.push_back(GSym::var(map[s.id]));
      else if (copy_start[s.id])
        rhs.push_back(GSym::var(*copy_start[s.id]));
      else
        rhs.push_back(GSym::term(sigma.at(g.terminals().name(s.id))));
    }
    out.add_production(map[p.lhs], std::move(rhs));
  }
  return out;
}

namespace {

Cfg combine(const std::vector<Cfg>& gs, const Alphabet& sigma, bool concat) {
  Cfg out(sigma, "S");
  std::vector<GSym> body;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    gs[i].validate();
    const Cfg& gi = gs[i];
    auto vm = copy_into(out, gi, "~" + std::to_string(i + 1),
                        [&](Symbol s) { return GSym::term(sigma.at(gi.terminals().name(s))); });
    if (concat)
      body.push_back(GSym::var(vm[gi.start()]));
    else
      out.add_production(out.start(), {GSym::var(vm[gi.start()])});
  }
  if (concat) out.add_production(out.start(), body);
  return out;
}

}  // namespace

Cfg concat_grammars(const std::vector<Cfg>& gs, const Alphabet& sigma) { return combine(gs, sigma, true); }
Cfg union_grammars(const std::vector<Cfg>& gs, const Alphabet& sigma) { return combine(gs, sigma, false); }

Alphabet block_alphabet(std::size_t n) {
  Alphabet a;
  for (std::size_t j = 1; j <= n; ++j) a.add("a" + std::to_string(j));
  return a;
}

Cfg block_projection(const Cfg& g, const ElementaryBounded& b) {
  if (!(b.alphabet() == g.terminals())) throw InputError("bounded expression and grammar use different alphabets");
  const auto& words = b.words();
  Transducer t;
  t.input_size = g.terminals().size();
  t.output = block_alphabet(words.size());
  // Same layout as eb_to_nfa; finishing block j emits a_j.
  auto add_state = [&](bool acc) {
    t.accepting.push_back(acc);
    return static_cast<State>(t.num_states++);
  };
  const State start = add_state(true);
  t.initial = {start};
  std::vector<State> base(words.size());
  for (std::size_t j = 0; j < words.size(); ++j) {
    base[j] = static_cast<State>(t.num_states);
    for (std::size_t o = 1; o < words[j].size(); ++o) add_state(false);
    add_state(true);
  }
  auto end_of = [&](std::size_t j) { return static_cast<State>(base[j] + words[j].size() - 1); };
  auto after = [&](std::size_t j, std::size_t o) {
    return o == words[j].size() ? end_of(j) : static_cast<State>(base[j] + o - 1);
  };
  auto emit = [&](std::size_t j, std::size_t o) { return o == words[j].size() ? Word{static_cast<Symbol>(j)} : Word{}; };
  auto boundary = [&](State from, std::size_t m) {
    for (std::size_t j = m; j < words.size(); ++j) t.transitions.push_back({from, words[j][0], emit(j, 1), after(j, 1)});
  };
  boundary(start, 0);
  for (std::size_t j = 0; j < words.size(); ++j) {
    for (std::size_t o = 1; o < words[j].size(); ++o)
      t.transitions.push_back({after(j, o), words[j][o], emit(j, o + 1), after(j, o + 1)});
    boundary(end_of(j), j);
  }
  return product_with_transducer(g, t);
}

Cfg finite_language(const Alphabet& sigma, const std::vector<Word>& words) {
  Cfg out(sigma, "S");
  for (const auto& w : words) {
    std::vector<GSym> rhs;
    for (Symbol s : w) {
      if (s >= sigma.size()) throw InputError("word symbol outside the alphabet");
      rhs.push_back(GSym::term(s));
    }
    out.add_production(out.start(), std::move(rhs));
  }
  out.normalize();
  return out;
}

Cfg regex_to_cfg(const Regex& r, const Alphabet& sigma) {
  Cfg out(sigma, "R0");
  std::function<VarId(const Regex&, VarId)> build = [&](const Regex& e, VarId v) -> VarId {
    auto fresh = [&] { return out.add_variable("R" + std::to_string(out.num_variables())); };
    switch (e.kind()) {
      case Regex::Kind::Empty:
        break;
      case Regex::Kind::Epsilon:
        out.add_production(v, {});
        break;
      case Regex::Kind::Symbol:
        if (e.sym() >= sigma.size()) throw InputError("regex symbol outside the alphabet");
        out.add_production(v, {GSym::term(e.sym())});
        break;
      case Regex::Kind::Concat: {
        VarId l = build(e.left(), fresh());
        VarId rr = build(e.right(), fresh());
        out.add_production(v, {GSym::var(l), GSym::var(rr)});
        break;
      }
      case Regex::Kind::Union: {
        VarId l = build(e.left(), fresh());
        VarId rr = build(e.right(), fresh());
        out.add_production(v, {GSym::var(l)});
        out.add_production(v, {GSym::var(rr)});
        break;
      }
      case Regex::Kind::Star: {
        VarId ch = build(e.child(), fresh());
        out.add_production(v, {});
        out.add_production(v, {GSym::var(ch), GSym::var(v)});
        break;
      }
    }
    return v;
  };
  build(r, out.start());
  return out;
}

// ---------------------------------------------------------------- compaction

Cfg compact(const Cfg& g, std::size_t max_productions) {
  Cfg t = trim(g);
  const std::size_t nv = t.num_variables();
  std::vector<std::vector<std::vector<GSym>>> rules(nv);
  for (const auto& p : t.productions()) rules[p.lhs].push_back(p.rhs);
  std::vector<bool> alive(nv, true);
  std::size_t total = t.productions().size();

  auto occurrences = [](const std::vector<GSym>& rhs, VarId y) {
    return static_cast<std::size_t>(
        std::count_if(rhs.begin(), rhs.end(), [&](const GSym& s) { return s.is_var && s.id == y; }));
  };
  auto self_recursive = [&](VarId y) {
    for (const auto& rhs : rules[y])
      if (occurrences(rhs, y)) return true;
    return false;
  };
  while (true) {
    // Pick the cheapest variable to inline.
    std::optional<VarId> best;
    std::size_t best_total = 0;
    for (VarId y = 0; y < nv; ++y) {
      if (!alive[y] || y == t.start() || self_recursive(y)) continue;
      const double k = static_cast<double>(rules[y].size());
      double after = static_cast<double>(total) - k;
      bool skip = false;
      for (VarId x = 0; x < nv && !skip; ++x) {
        if (!alive[x] || x == y) continue;
        for (const auto& rhs : rules[x]) {
          auto occ = occurrences(rhs, y);
          if (occ == 0) continue;
          after += std::pow(k, static_cast<double>(occ)) - 1.0;
          if (after > static_cast<double>(max_productions)) {
            skip = true;
            break;
          }
        }
      }
      if (skip || after > static_cast<double>(max_productions)) continue;
      auto a = static_cast<std::size_t>(after);
      if (!best || a < best_total) {
        best = y;
        best_total = a;
      }
    }
    if (!best) break;
    VarId y = *best;
    for (VarId x = 0; x < nv; ++x) {
      if (!alive[x] || x == y) continue;
      std::vector<std::vector<GSym>> next;
      for (const auto& rhs : rules[x]) {
        std::vector<std::vector<GSym>> partial{{}};
        for (const auto& s : rhs) {
          if (s.is_var && s.id == y) {
            std::vector<std::vector<GSym>> grown;
            for (const auto& pre : partial)
              for (const auto& body : rules[y]) {
                auto w = pre;
                w.insert(w.end(), body.begin(), body.end());
                grown.push_back(std::move(w));
              }
            partial = std::move(grown);
          } else {
            for (auto& pre : partial) pre.push_back(s);
          }
        }
        next.insert(next.end(), partial.begin(), partial.end());
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      rules[x] = std::move(next);
    }
    alive[y] = false;
    rules[y].clear();
    total = 0;
    for (VarId x = 0; x < nv; ++x) total += rules[x].size();
  }
  Cfg out(t.terminals(), t.var_name(t.start()));
  std::vector<VarId> map(nv);
  for (VarId v = 0; v < nv; ++v)
    if (alive[v]) map[v] = out.add_variable(t.var_name(v));
  for (VarId v = 0; v < nv; ++v)
    for (auto rhs : rules[v]) {
      for (auto& s : rhs)
        if (s.is_var) s.id = map[s.id];
      out.add_production(map[v], std::move(rhs));
    }
  return trim(out);
}

// ---------------------------------------------------------------- SCCs

std::vector<std::vector<VarId>> variable_sccs(const Cfg& g) {
  const std::size_t n = g.num_variables();
  std::vector<std::vector<VarId>> succ(n);
  for (const auto& p : g.productions())
    for (const auto& s : p.rhs)
      if (s.is_var) succ[p.lhs].push_back(s.id);
  for (auto& v : succ) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  // Iterative Tarjan; components come out callees first.
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<VarId> stack;
  std::vector<std::vector<VarId>> out;
  int counter = 0;
  for (VarId root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<std::pair<VarId, std::size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, i] = call.back();
      if (i < succ[v].size()) {
        VarId w = succ[v][i++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<VarId> comp;
        VarId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      VarId done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }
  return out;
}

std::vector<bool> recursive_variables(const Cfg& g) {
  std::vector<bool> rec(g.num_variables(), false);
  for (const auto& comp : variable_sccs(g))
    if (comp.size() > 1)
      for (VarId v : comp) rec[v] = true;
  for (const auto& p : g.productions())
    for (const auto& s : p.rhs)
      if (s.is_var && s.id == p.lhs) rec[p.lhs] = true;
  return rec;
}

// ---------------------------------------------------------------- text format

Cfg parse_grammar(const std::string& text) {
  struct RawRule {
    std::string lhs;
    std::vector<std::string> rhs;
  };
  std::vector<RawRule> raw;
  std::vector<std::string> lhs_order;
  std::unordered_set<std::string> lhs_set;
  std::vector<std::string> declared_terminals;
  std::optional<std::string> start;
  std::string current;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InputError("grammar line " + std::to_string(lineno) + ": " + msg);
  };
  auto add_alternatives = [&](const std::string& lhs, const std::vector<std::string>& toks, std::size_t from) {
    std::vector<std::string> alt;
    for (std::size_t i = from; i < toks.size(); ++i) {
      if (toks[i] == "|") {
        raw.push_back({lhs, alt});
        alt.clear();
        continue;
      }
      if (toks[i] == "->") fail("unexpected '->'");
      if (toks[i] != "eps") alt.push_back(toks[i]);
    }
    raw.push_back({lhs, alt});
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string tok; ls >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks[0] == "start") {
      if (toks.size() != 2) fail("expected 'start <variable>'");
      start = toks[1];
    } else if (toks[0] == "variables") {
      for (std::size_t i = 1; i < toks.size(); ++i)
        if (lhs_set.insert(toks[i]).second) lhs_order.push_back(toks[i]);
    } else if (toks[0] == "terminals") {
      declared_terminals.insert(declared_terminals.end(), toks.begin() + 1, toks.end());
    } else if (toks[0] == "|") {
      if (current.empty()) fail("continuation without a rule");
      add_alternatives(current, toks, 1);
    } else {
      if (toks.size() < 2 || toks[1] != "->") fail("expected '<variable> -> ...'");
      if (toks[0] == "eps" || toks[0] == "|") fail("invalid variable name '" + toks[0] + "'");
      current = toks[0];
      if (lhs_set.insert(current).second) lhs_order.push_back(current);
      add_alternatives(current, toks, 2);
    }
  }
  if (!start) {
    if (lhs_order.empty()) throw InputError("grammar has no rules and no start variable");
    start = lhs_order.front();
  }
  Alphabet sigma;
  for (const auto& t : declared_terminals) {
    if (lhs_set.count(t)) throw InputError("'" + t + "' is declared as a terminal but has rules");
    sigma.add(t);
  }
  for (const auto& r : raw)
    for (const auto& s : r.rhs)
      if (!lhs_set.count(s) && s != *start) sigma.add(s);
  if (sigma.contains(*start)) throw InputError("start symbol '" + *start + "' is used as a terminal");
  Cfg g(sigma, *start);
  for (const auto& v : lhs_order) g.add_variable(v);
  for (const auto& r : raw) {
    std::vector<GSym> rhs;
    for (const auto& s : r.rhs) {
      if (auto v = g.find_variable(s))
        rhs.push_back(GSym::var(*v));
      else
        rhs.push_back(GSym::term(sigma.at(s)));
    }
    g.add_production(*g.find_variable(r.lhs), std::move(rhs));
  }
  g.normalize();
  return g;
}

std::string format_grammar(const Cfg& g) {
  g.validate();
  std::string out = "start " + g.var_name(g.start()) + "\n";
  if (!g.terminals().empty()) {
    out += "terminals";
    for (const auto& t : g.terminals().names()) out += " " + t;
    out += "\n";
  }
  std::vector<std::vector<const Production*>> by(g.num_variables());
  for (const auto& p : g.productions()) by[p.lhs].push_back(&p);
  std::string bare;
  for (VarId v = 0; v < g.num_variables(); ++v)
    if (by[v].empty() && v != g.start()) bare += " " + g.var_name(v);
  if (!bare.empty()) out += "variables" + bare + "\n";
  for (VarId v = 0; v < g.num_variables(); ++v) {
    if (by[v].empty()) continue;
    out += g.var_name(v) + " ->";
    for (std::size_t i = 0; i < by[v].size(); ++i) {
      if (i) out += " |";
      if (by[v][i]->rhs.empty()) out += " eps";
      for (const auto& s : by[v][i]->rhs)
        out += " " + (s.is_var ? g.var_name(s.id) : g.terminals().name(s.id));
    }
    out += "\n";
  }
  return out;
}

}  // namespace pbound

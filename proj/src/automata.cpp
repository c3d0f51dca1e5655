#include "pbound/automata.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "pbound/error.hpp"

namespace pbound {

// ---------------------------------------------------------------- Nfa / Dfa

State Nfa::add_state(bool accept) {
  accepting.push_back(accept);
  return static_cast<State>(num_states++);
}

void Nfa::add_transition(State from, Symbol symbol, State to) {
  transitions.push_back({from, symbol, to});
}

void Nfa::validate() const {
  if (accepting.size() != num_states) throw InputError("nfa: accepting vector size mismatch");
  for (State s : initial)
    if (s >= num_states) throw InputError("nfa: initial state out of range");
  for (const auto& t : transitions) {
    if (t.from >= num_states || t.to >= num_states)
      throw InputError("nfa: transition references an undeclared state");
    if (t.symbol >= alphabet_size) throw InputError("nfa: transition symbol out of range");
  }
}

bool Nfa::accepts(const Word& w) const {
  std::vector<char> cur(num_states, 0);
  for (State s : initial) cur[s] = 1;
  for (Symbol a : w) {
    std::vector<char> nxt(num_states, 0);
    for (const auto& t : transitions)
      if (cur[t.from] && t.symbol == a) nxt[t.to] = 1;
    cur.swap(nxt);
  }
  for (State s = 0; s < num_states; ++s)
    if (cur[s] && accepting[s]) return true;
  return false;
}

void Dfa::validate() const {
  if (accepting.size() != next.size()) throw InputError("dfa: accepting vector size mismatch");
  if (initial >= next.size()) throw InputError("dfa: initial state out of range");
  for (const auto& row : next) {
    if (row.size() != alphabet_size) throw InputError("dfa: transition function is not total");
    for (State t : row)
      if (t >= next.size()) throw InputError("dfa: transition to an undeclared state");
  }
}

bool Dfa::accepts(const Word& w) const {
  State s = initial;
  for (Symbol a : w) s = next[s][a];
  return accepting[s];
}

Nfa Dfa::to_nfa() const {
  Nfa n;
  n.alphabet_size = alphabet_size;
  for (std::size_t s = 0; s < next.size(); ++s) n.add_state(accepting[s]);
  n.initial = {initial};
  for (std::size_t s = 0; s < next.size(); ++s)
    for (Symbol a = 0; a < alphabet_size; ++a)
      n.add_transition(static_cast<State>(s), a, next[s][a]);
  return n;
}

Dfa determinize(const Nfa& nfa) {
  std::vector<std::vector<std::pair<Symbol, State>>> out(nfa.num_states);
  for (const auto& t : nfa.transitions) out[t.from].push_back({t.symbol, t.to});

  Dfa d;
  d.alphabet_size = nfa.alphabet_size;
  std::map<std::vector<State>, State> ids;
  std::vector<std::vector<State>> subsets;

  auto intern = [&](std::vector<State> set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    auto [it, fresh] = ids.emplace(set, static_cast<State>(subsets.size()));
    if (fresh) {
      bool acc = std::any_of(set.begin(), set.end(), [&](State s) { return nfa.accepting[s]; });
      subsets.push_back(std::move(set));
      d.next.emplace_back(nfa.alphabet_size, 0);
      d.accepting.push_back(acc);
    }
    return it->second;
  };

  d.initial = intern(nfa.initial);
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    for (Symbol a = 0; a < nfa.alphabet_size; ++a) {
      std::vector<State> target;
      for (State s : subsets[i])
        for (auto [sym, to] : out[s])
          if (sym == a) target.push_back(to);
      State t = intern(std::move(target));
      d.next[i][a] = t;
    }
  }
  return d;
}

Dfa complement(const Dfa& dfa) {
  Dfa c = dfa;
  c.accepting.flip();
  return c;
}

Dfa minimize(const Dfa& dfa) {
  const std::size_t n = dfa.num_states();
  // Moore refinement: split classes by (class, successor classes) until stable.
  std::vector<std::size_t> cls(n);
  for (State s = 0; s < n; ++s) cls[s] = dfa.accepting[s] ? 1 : 0;
  std::size_t count = 0;
  while (true) {
    std::map<std::vector<std::size_t>, std::size_t> ids;
    std::vector<std::size_t> next(n);
    for (State s = 0; s < n; ++s) {
      std::vector<std::size_t> key{cls[s]};
      for (auto t : dfa.next[s]) key.push_back(cls[t]);
      next[s] = ids.emplace(std::move(key), ids.size()).first->second;
    }
    bool stable = ids.size() == count;
    count = ids.size();
    cls = std::move(next);
    if (stable) break;
  }
  Dfa out;
  out.alphabet_size = dfa.alphabet_size;
  // Renumber classes by first occurrence in a BFS from the initial state.
  std::vector<std::optional<State>> id(count);
  std::vector<State> order{dfa.initial};
  id[cls[dfa.initial]] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (auto t : dfa.next[order[i]])
      if (!id[cls[t]]) {
        id[cls[t]] = static_cast<State>(order.size());
        order.push_back(t);
      }
  out.initial = 0;
  for (auto s : order) {
    std::vector<State> row;
    for (auto t : dfa.next[s]) row.push_back(*id[cls[t]]);
    out.next.push_back(std::move(row));
    out.accepting.push_back(dfa.accepting[s]);
  }
  return out;
}

Dfa universal_dfa(std::size_t alphabet_size) {
  Dfa d;
  d.alphabet_size = alphabet_size;
  d.next = {std::vector<State>(alphabet_size, 0)};
  d.accepting = {true};
  return d;
}

Dfa empty_dfa(std::size_t alphabet_size) {
  Dfa d = universal_dfa(alphabet_size);
  d.accepting = {false};
  return d;
}

// ------------------------------------------------------ ElementaryBounded

ElementaryBounded::ElementaryBounded(Alphabet alphabet, std::vector<Word> words)
    : alphabet_(std::move(alphabet)) {
  for (auto& w : words) {
    for (Symbol s : w)
      if (s >= alphabet_.size()) throw InputError("bounded word uses a symbol outside its alphabet");
    if (!w.empty()) words_.push_back(std::move(w));
  }
}

std::size_t ElementaryBounded::total_length() const {
  std::size_t n = 0;
  for (const auto& w : words_) n += w.size();
  return n;
}

bool ElementaryBounded::contains(const Word& w) const {
  // suffix[i][j]: w[i..] ∈ wj* … wk*
  const std::size_t n = w.size(), k = words_.size();
  std::vector<std::vector<char>> suffix(n + 1, std::vector<char>(k + 1, 0));
  suffix[n].assign(k + 1, 1);
  for (std::size_t i = n + 1; i-- > 0;) {
    suffix[i][k] = (i == n);
    for (std::size_t j = k; j-- > 0;) {
      bool ok = suffix[i][j + 1];
      const Word& b = words_[j];
      if (!ok && i + b.size() <= n && std::equal(b.begin(), b.end(), w.begin() + i))
        ok = suffix[i + b.size()][j];
      suffix[i][j] = ok;
    }
  }
  return suffix[0][0];
}

ElementaryBounded eb_concat(const ElementaryBounded& b1, const ElementaryBounded& b2) {
  if (!(b1.alphabet() == b2.alphabet())) throw InputError("eb_concat: alphabets differ");
  std::vector<Word> words = b1.words();
  words.insert(words.end(), b2.words().begin(), b2.words().end());
  return ElementaryBounded(b1.alphabet(), std::move(words));
}

ElementaryBounded eb_translate(const ElementaryBounded& b, const Alphabet& to) {
  std::vector<Word> words;
  for (const auto& w : b.words()) words.push_back(translate_word(w, b.alphabet(), to));
  return ElementaryBounded(to, std::move(words));
}

namespace {

// True when `w` is u^k for some k ≥ 1.
bool is_power_of(const Word& w, const Word& u) {
  if (u.empty() || w.size() % u.size() != 0) return false;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != u[i % u.size()]) return false;
  return true;
}

}  // namespace

ElementaryBounded eb_simplify(const ElementaryBounded& b) {
  std::vector<Word> words;
  for (const auto& w : b.words()) {
    if (!words.empty() && is_power_of(w, words.back())) continue;
    while (!words.empty() && is_power_of(words.back(), w)) words.pop_back();
    if (!words.empty() && is_power_of(w, words.back())) continue;
    words.push_back(w);
  }
  return ElementaryBounded(b.alphabet(), std::move(words));
}

Nfa eb_to_nfa(const ElementaryBounded& b) {
  Nfa n;
  n.alphabet_size = b.alphabet().size();
  const State start = n.add_state(true);
  n.initial = {start};
  const auto& words = b.words();
  // Block j owns |wj| states: offsets 1..|wj|-1, then its end state.
  std::vector<State> base(words.size());
  for (std::size_t j = 0; j < words.size(); ++j) {
    base[j] = static_cast<State>(n.num_states);
    for (std::size_t o = 1; o < words[j].size(); ++o) n.add_state(false);
    n.add_state(true);
  }
  auto end_of = [&](std::size_t j) { return static_cast<State>(base[j] + words[j].size() - 1); };
  auto after = [&](std::size_t j, std::size_t o) {  // state once o letters of wj are read
    return o == words[j].size() ? end_of(j) : static_cast<State>(base[j] + o - 1);
  };
  // From a block boundary that still allows blocks m..k-1.
  auto boundary = [&](State from, std::size_t m) {
    for (std::size_t j = m; j < words.size(); ++j) n.add_transition(from, words[j][0], after(j, 1));
  };
  boundary(start, 0);
  for (std::size_t j = 0; j < words.size(); ++j) {
    for (std::size_t o = 1; o < words[j].size(); ++o)
      n.add_transition(after(j, o), words[j][o], after(j, o + 1));
    boundary(end_of(j), j);
  }
  return n;
}

Dfa eb_complement_dfa(const ElementaryBounded& b, const Alphabet& sigma) {
  ElementaryBounded over = eb_translate(b, sigma);
  return complement(minimize(determinize(eb_to_nfa(over))));
}

std::string format_bounded(const ElementaryBounded& b) {
  if (b.empty()) return "# k=0\n";
  std::string out;
  for (const auto& w : b.words()) out += format_word(b.alphabet(), w) + "\n";
  return out;
}

ElementaryBounded parse_bounded(Alphabet sigma, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Word> words;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream toks(line);
    std::string tok;
    Word w;
    bool any = false;
    while (toks >> tok) {
      any = true;
      if (tok == "eps") continue;
      w.push_back(sigma.add(tok));
    }
    if (any) words.push_back(std::move(w));
  }
  return ElementaryBounded(std::move(sigma), std::move(words));
}

// ------------------------------------------------------------------ Regex

Regex Regex::empty() {
  static const Regex r(std::make_shared<const Node>(Node{Kind::Empty, 0, nullptr, nullptr}));
  return r;
}

Regex Regex::epsilon() {
  static const Regex r(std::make_shared<const Node>(Node{Kind::Epsilon, 0, nullptr, nullptr}));
  return r;
}

Regex Regex::symbol(Symbol s) {
  return Regex(std::make_shared<const Node>(Node{Kind::Symbol, s, nullptr, nullptr}));
}

Regex Regex::concat(const Regex& a, const Regex& b) {
  if (a.kind() == Kind::Empty || b.kind() == Kind::Empty) return empty();
  if (a.kind() == Kind::Epsilon) return b;
  if (b.kind() == Kind::Epsilon) return a;
  return Regex(std::make_shared<const Node>(
      Node{Kind::Concat, 0, std::make_shared<const Regex>(a), std::make_shared<const Regex>(b)}));
}

Regex Regex::alt(const Regex& a, const Regex& b) {
  if (a.kind() == Kind::Empty) return b;
  if (b.kind() == Kind::Empty) return a;
  if (a.node_ == b.node_) return a;
  return Regex(std::make_shared<const Node>(
      Node{Kind::Union, 0, std::make_shared<const Regex>(a), std::make_shared<const Regex>(b)}));
}

Regex Regex::star(const Regex& a) {
  if (a.kind() == Kind::Empty || a.kind() == Kind::Epsilon) return epsilon();
  if (a.kind() == Kind::Star) return a;
  return Regex(std::make_shared<const Node>(
      Node{Kind::Star, 0, std::make_shared<const Regex>(a), nullptr}));
}

bool Regex::nullable() const {
  switch (kind()) {
    case Kind::Empty:
    case Kind::Symbol:
      return false;
    case Kind::Epsilon:
    case Kind::Star:
      return true;
    case Kind::Concat:
      return left().nullable() && right().nullable();
    case Kind::Union:
      return left().nullable() || right().nullable();
  }
  return false;
}

Regex Regex::derivative(Symbol s) const {
  switch (kind()) {
    case Kind::Empty:
    case Kind::Epsilon:
      return empty();
    case Kind::Symbol:
      return sym() == s ? epsilon() : empty();
    case Kind::Concat: {
      Regex d = concat(left().derivative(s), right());
      return left().nullable() ? alt(d, right().derivative(s)) : d;
    }
    case Kind::Union:
      return alt(left().derivative(s), right().derivative(s));
    case Kind::Star:
      return concat(child().derivative(s), *this);
  }
  return empty();
}

bool Regex::matches(const Word& w) const {
  Regex cur = *this;
  for (Symbol s : w) {
    cur = cur.derivative(s);
    if (cur.kind() == Kind::Empty) return false;
  }
  return cur.nullable();
}

std::size_t Regex::size() const {
  switch (kind()) {
    case Kind::Concat:
    case Kind::Union:
      return 1 + left().size() + right().size();
    case Kind::Star:
      return 1 + child().size();
    default:
      return 1;
  }
}

std::string Regex::to_string(const Alphabet& sigma) const {
  // precedence: union 0, concat 1, star/atom 2
  std::function<std::string(const Regex&, int)> go = [&](const Regex& r, int ctx) -> std::string {
    std::string s;
    int prec = 2;
    switch (r.kind()) {
      case Kind::Empty: return "empty";
      case Kind::Epsilon: return "eps";
      case Kind::Symbol: return sigma.name(r.sym());
      case Kind::Concat:
        prec = 1;
        s = go(r.left(), 1) + " " + go(r.right(), 1);
        break;
      case Kind::Union:
        prec = 0;
        s = go(r.left(), 0) + " | " + go(r.right(), 0);
        break;
      case Kind::Star:
        s = go(r.child(), 2) + "*";
        break;
    }
    return prec < ctx ? "(" + s + ")" : s;
  };
  return go(*this, 0);
}

Regex nfa_to_regex(const Nfa& nfa) {
  // Generalized automaton over states 0..n-1 plus a fresh source and sink.
  const std::size_t n = nfa.num_states;
  const State src = static_cast<State>(n), dst = static_cast<State>(n + 1);
  std::map<std::pair<State, State>, Regex> edge;
  auto add = [&](State p, State q, const Regex& r) {
    auto it = edge.find({p, q});
    if (it == edge.end())
      edge.emplace(std::make_pair(p, q), r);
    else
      it->second = Regex::alt(it->second, r);
  };
  for (const auto& t : nfa.transitions) add(t.from, t.to, Regex::symbol(t.symbol));
  for (State s : nfa.initial) add(src, s, Regex::epsilon());
  for (State s = 0; s < n; ++s)
    if (nfa.accepting[s]) add(s, dst, Regex::epsilon());

  std::set<State> alive;
  for (State s = 0; s < n; ++s) alive.insert(s);
  while (!alive.empty()) {
    // fewest incident edges first; ties broken by state number
    State victim = *alive.begin();
    std::size_t best = SIZE_MAX;
    for (State s : alive) {
      std::size_t deg = 0;
      for (const auto& [pq, r] : edge)
        if ((pq.first == s) != (pq.second == s)) ++deg;
      if (deg < best) best = deg, victim = s;
    }
    Regex loop = Regex::epsilon();
    if (auto it = edge.find({victim, victim}); it != edge.end()) loop = Regex::star(it->second);
    std::vector<std::pair<State, Regex>> ins, outs;
    for (const auto& [pq, r] : edge) {
      if (pq.second == victim && pq.first != victim) ins.push_back({pq.first, r});
      if (pq.first == victim && pq.second != victim) outs.push_back({pq.second, r});
    }
    for (auto it = edge.begin(); it != edge.end();) {
      if (it->first.first == victim || it->first.second == victim)
        it = edge.erase(it);
      else
        ++it;
    }
    for (const auto& [p, rin] : ins)
      for (const auto& [q, rout] : outs) add(p, q, Regex::concat(Regex::concat(rin, loop), rout));
    alive.erase(victim);
  }
  auto it = edge.find({src, dst});
  return it == edge.end() ? Regex::empty() : it->second;
}

Nfa regex_to_nfa(const Regex& r, std::size_t alphabet_size) {
  struct Info {
    bool nullable;
    std::vector<State> first, last;
  };
  std::vector<Symbol> pos_symbol{0};  // position 0 is the initial state
  std::vector<std::set<State>> follow{{}};

  std::function<Info(const Regex&)> go = [&](const Regex& e) -> Info {
    switch (e.kind()) {
      case Regex::Kind::Empty: return {false, {}, {}};
      case Regex::Kind::Epsilon: return {true, {}, {}};
      case Regex::Kind::Symbol: {
        auto p = static_cast<State>(pos_symbol.size());
        pos_symbol.push_back(e.sym());
        follow.emplace_back();
        return {false, {p}, {p}};
      }
      case Regex::Kind::Concat: {
        Info a = go(e.left()), b = go(e.right());
        for (State l : a.last) follow[l].insert(b.first.begin(), b.first.end());
        Info out{a.nullable && b.nullable, a.first, b.last};
        if (a.nullable) out.first.insert(out.first.end(), b.first.begin(), b.first.end());
        if (b.nullable) out.last.insert(out.last.end(), a.last.begin(), a.last.end());
        return out;
      }
      case Regex::Kind::Union: {
        Info a = go(e.left()), b = go(e.right());
        a.nullable = a.nullable || b.nullable;
        a.first.insert(a.first.end(), b.first.begin(), b.first.end());
        a.last.insert(a.last.end(), b.last.begin(), b.last.end());
        return a;
      }
      case Regex::Kind::Star: {
        Info a = go(e.child());
        for (State l : a.last) follow[l].insert(a.first.begin(), a.first.end());
        a.nullable = true;
        return a;
      }
    }
    return {false, {}, {}};
  };
  Info top = go(r);

  Nfa n;
  n.alphabet_size = alphabet_size;
  for (std::size_t p = 0; p < pos_symbol.size(); ++p) n.add_state(false);
  n.initial = {0};
  n.accepting[0] = top.nullable;
  for (State l : top.last) n.accepting[l] = true;
  for (State f : top.first) n.add_transition(0, pos_symbol[f], f);
  for (State p = 1; p < pos_symbol.size(); ++p)
    for (State q : follow[p]) n.add_transition(p, pos_symbol[q], q);
  return n;
}

}  // namespace pbound

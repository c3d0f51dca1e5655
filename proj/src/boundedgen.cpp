#include "pbound/boundedgen.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <set>

#include "pbound/error.hpp"
#include "pbound/semilinear.hpp"

namespace pbound {

namespace {

std::atomic<std::size_t> g_verify_length{0};

constexpr std::size_t kMaxBoundedLength = 500'000;
thread_local std::size_t t_size_limit = kMaxBoundedLength;

void check_size(const ElementaryBounded& b) {
  if (b.total_length() > t_size_limit) throw BudgetError("bounded language grew past the size budget");
}

/// Lowers the size budget for the current thread within a scope.
class SizeLimit {
 public:
  explicit SizeLimit(std::size_t n) : saved_(t_size_limit) { t_size_limit = std::min(n, saved_); }
  ~SizeLimit() { t_size_limit = saved_; }
  SizeLimit(const SizeLimit&) = delete;
  SizeLimit& operator=(const SizeLimit&) = delete;

 private:
  std::size_t saved_;
};

void verify(const Cfg& g, const ElementaryBounded& b, const char* what) {
  std::size_t n = g_verify_length.load();
  if (n == 0) return;
  if (!check_bounded_property(g, b, n))
    throw SoundnessError(std::string("bounded property violated by ") + what);
}

Cfg with_start(const Cfg& g, VarId x) {
  Cfg c = g;
  c.set_start(x);
  return trim(c);
}

ElementaryBounded repeat_blocks(const Alphabet& sigma, const std::vector<Word>& head, const ElementaryBounded& b,
                                std::size_t times) {
  std::vector<Word> words = head;
  for (std::size_t i = 0; i < times; ++i) words.insert(words.end(), b.words().begin(), b.words().end());
  ElementaryBounded out(sigma, std::move(words));
  check_size(out);
  return out;
}

/// Prop. subst, with the per-word blocks cached so that repeated words of b
/// and repeated calls sharing σ and τ do not redo the Parikh work.
class Substitution {
 public:
  Substitution(const std::map<std::string, Cfg>& sigma, const std::map<std::string, ElementaryBounded>& tau,
               Alphabet target)
      : sigma_(sigma), tau_(tau), target_(std::move(target)) {}

  ElementaryBounded apply(const ElementaryBounded& b) {
    ElementaryBounded out(target_, {});
    for (const auto& w : b.words()) {
      std::vector<std::string> letters;
      for (auto s : w) letters.push_back(b.alphabet().name(s));
      out = eb_concat(out, block(letters));
      check_size(out);
    }
    return out;
  }

 private:
  const ElementaryBounded& block(const std::vector<std::string>& letters) {
    auto it = cache_.find(letters);
    if (it != cache_.end()) return it->second;
    std::vector<Cfg> parts;
    ElementaryBounded tau_w(target_, {});
    for (const auto& name : letters) {
      auto s = sigma_.find(name);
      if (s != sigma_.end()) {
        parts.push_back(s->second);
        auto t = tau_.find(name);
        if (t == tau_.end()) throw InputError("symbol '" + name + "' has a language but no bounded expression");
        tau_w = eb_concat(tau_w, eb_translate(t->second, target_));
      } else {
        auto sym = target_.find(name);
        if (!sym) throw InputError("symbol '" + name + "' is neither substituted nor in the target alphabet");
        parts.push_back(finite_language(target_, {Word{*sym}}));
        tau_w = eb_concat(tau_w, ElementaryBounded(target_, {Word{*sym}}));
      }
    }
    Cfg lw = trim(concat_grammars(parts, target_));
    return cache_.emplace(letters, bounded_for_powers(lw, tau_w)).first->second;
  }

  const std::map<std::string, Cfg>& sigma_;
  const std::map<std::string, ElementaryBounded>& tau_;
  Alphabet target_;
  std::map<std::vector<std::string>, ElementaryBounded> cache_;
};

}  // namespace

void set_verification_length(std::size_t n) { g_verify_length.store(n); }
std::size_t verification_length() { return g_verify_length.load(); }

bool check_bounded_property(const Cfg& g, const ElementaryBounded& b, std::size_t n) {
  auto words = enumerate_words(g, n);
  std::set<ParikhVector> all, kept;
  for (const auto& w : words) {
    auto v = parikh_of_word(w, g.terminals());
    all.insert(v);
    if (b.contains(translate_word(w, g.terminals(), b.alphabet()))) kept.insert(v);
  }
  return all == kept;
}

ElementaryBounded bounded_for_regex(const Regex& r, const Alphabet& sigma) {
  switch (r.kind()) {
    case Regex::Kind::Empty:
    case Regex::Kind::Epsilon:
      return ElementaryBounded(sigma, {});
    case Regex::Kind::Symbol:
      return ElementaryBounded(sigma, {Word{r.sym()}});
    case Regex::Kind::Concat:
    case Regex::Kind::Union: {
      auto out = eb_concat(bounded_for_regex(r.left(), sigma), bounded_for_regex(r.right(), sigma));
      check_size(out);
      return out;
    }
    case Regex::Kind::Star: {
      auto inner = bounded_for_regex(r.child(), sigma);
      auto out = bounded_for_powers(regex_to_cfg(r.child(), sigma), inner);
      if (verification_length()) verify(regex_to_cfg(r, sigma), out, "the regular construction");
      return out;
    }
  }
  throw SoundnessError("unknown regex node");
}

ElementaryBounded bounded_for_powers(const Cfg& g, const ElementaryBounded& b) {
  verify(g, b, "the caller of the powers construction");
  auto image = parikh_image(g);
  std::vector<Word> witnesses;
  for (const auto& c : image.components) witnesses.push_back(translate_word(c.witness, g.terminals(), b.alphabet()));
  return repeat_blocks(b.alphabet(), witnesses, b, image.components.size());
}

Word LinearDecomposition::expand(const Word& w) const {
  Word out;
  for (auto s : w) out.insert(out.end(), h.at(s).begin(), h.at(s).end());
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    const auto& tail = h.at(num_productions + *it);
    out.insert(out.end(), tail.begin(), tail.end());
  }
  return out;
}

LinearDecomposition decompose_linear(const LinearGrammar& lg, VarId x) {
  if (x >= lg.cfg().num_variables()) throw InputError("variable out of range");
  LinearDecomposition d;
  d.grammar = with_start(lg.cfg(), x);
  const auto& prods = d.grammar.productions();
  d.num_productions = prods.size();
  for (std::size_t i = 0; i < prods.size(); ++i) d.paired.add("a_p" + std::to_string(i + 1));
  for (std::size_t i = 0; i < prods.size(); ++i) d.paired.add("~a_p" + std::to_string(i + 1));
  d.h.assign(2 * prods.size(), {});
  const std::size_t nv = d.grammar.num_variables();
  d.nfa.alphabet_size = prods.size();
  for (std::size_t i = 0; i <= nv; ++i) d.nfa.add_state(i == nv);
  d.final_state = static_cast<State>(nv);
  d.nfa.initial = {d.grammar.start()};
  for (std::size_t i = 0; i < prods.size(); ++i) {
    const auto& p = prods[i];
    auto pos = std::find_if(p.rhs.begin(), p.rhs.end(), [](const GSym& s) { return s.is_var; });
    Word alpha, beta;
    for (auto it = p.rhs.begin(); it != pos; ++it) alpha.push_back(it->id);
    State to = d.final_state;
    if (pos != p.rhs.end()) {
      to = pos->id;
      for (auto it = pos + 1; it != p.rhs.end(); ++it) beta.push_back(it->id);
    }
    d.h[i] = std::move(alpha);
    d.h[prods.size() + i] = std::move(beta);
    d.nfa.add_transition(p.lhs, static_cast<Symbol>(i), to);
  }
  return d;
}

ElementaryBounded bounded_for_linear(const LinearGrammar& lg, VarId x) {
  auto d = decompose_linear(lg, x);
  const Alphabet& sigma = lg.cfg().terminals();
  Alphabet a;
  for (std::size_t i = 0; i < d.num_productions; ++i) a.add(d.paired.name(static_cast<Symbol>(i)));
  auto wb = bounded_for_regex(nfa_to_regex(d.nfa), a);
  std::vector<Word> words;
  for (const auto& w : wb.words()) {
    Word hw;
    for (auto s : w) hw.insert(hw.end(), d.h[s].begin(), d.h[s].end());
    words.push_back(std::move(hw));
  }
  for (auto it = wb.words().rbegin(); it != wb.words().rend(); ++it) {
    Word hw;
    for (auto s = it->rbegin(); s != it->rend(); ++s)
      hw.insert(hw.end(), d.h[d.num_productions + *s].begin(), d.h[d.num_productions + *s].end());
    words.push_back(std::move(hw));
  }
  ElementaryBounded out(sigma, std::move(words));
  check_size(out);
  if (verification_length()) verify(d.grammar, out, "the linear construction");
  return out;
}

ElementaryBounded bounded_for_substitution(const ElementaryBounded& b, const std::map<std::string, Cfg>& sigma,
                                           const std::map<std::string, ElementaryBounded>& tau,
                                           const Alphabet& target) {
  Substitution sub(sigma, tau, target);
  return sub.apply(b);
}

std::vector<ElementaryBounded> algorithm1_bounded_sequence(const KFoldComposition& kf,
                                                           const std::vector<ElementaryBounded>& btilde,
                                                           ProofLog* proof) {
  const Cfg& base = kf.base;
  const Cfg& d = kf.differential.cfg();
  const std::size_t nv = base.num_variables();
  if (btilde.size() != nv) throw InputError("one bounded expression per variable is required");
  const Alphabet& ext = d.terminals();
  auto log = [&](const std::string& label, const std::vector<ElementaryBounded>& bs) {
    if (!proof) return;
    ProofStep step{label, {}};
    for (VarId x = 0; x < nv; ++x) step.entries.push_back({base.var_name(x), bs[x]});
    proof->push_back(std::move(step));
  };
  // Every level reuses the same alphabet Σ ∪ {v_X}: each substitution
  // consumes all v-symbols of the level above, so level tags are not needed.
  std::map<std::string, Cfg> sigma_level;
  std::map<std::string, ElementaryBounded> tau_level;
  std::map<std::string, Cfg> sigma_0;
  std::map<std::string, ElementaryBounded> tau_0;
  for (VarId y = 0; y < nv; ++y) {
    const std::string& v = ext.name(v_symbol(base, y));
    sigma_level.emplace(v, with_start(d, y));
    tau_level.emplace(v, eb_translate(btilde[y], ext));
    sigma_0.emplace(v, finite_language(ext, kf.base_level[y]));
    tau_0.emplace(v, ElementaryBounded(ext, kf.base_level[y]));
  }
  const std::size_t n = std::max<std::size_t>(kf.depth, 1);
  std::vector<ElementaryBounded> cur;
  for (VarId x = 0; x < nv; ++x) cur.push_back(eb_translate(btilde[x], ext));
  log("B_" + std::to_string(n - 1), cur);
  Substitution level(sigma_level, tau_level, ext);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (auto& b : cur) b = eb_simplify(level.apply(b));
    log("B_" + std::to_string(i), cur);
  }
  Substitution bottom(sigma_0, tau_0, ext);
  const std::size_t sigma_size = base.terminals().size();
  std::vector<ElementaryBounded> out;
  for (const auto& b : cur) {
    auto r = eb_simplify(bottom.apply(b));
    std::vector<Word> words;
    for (const auto& w : r.words()) {
      if (std::any_of(w.begin(), w.end(), [&](Symbol s) { return s >= sigma_size; }))
        throw SoundnessError("v-symbol left after the base substitution");
      words.push_back(w);
    }
    out.emplace_back(base.terminals(), std::move(words));
  }
  log("B", out);
  return out;
}

namespace {

ElementaryBounded newton_bounded(const Cfg& g, ProofLog* proof) {
  const Alphabet& sigma = g.terminals();
  Cfg t = compact(trim(g));
  if (t.productions().empty()) return ElementaryBounded(sigma, {});
  const std::size_t nv = t.num_variables();
  auto sccs = variable_sccs(t);
  std::vector<std::size_t> scc_of(nv);
  for (std::size_t i = 0; i < sccs.size(); ++i)
    for (VarId v : sccs[i]) scc_of[v] = i;
  std::vector<ElementaryBounded> bound(nv);
  std::map<VarId, Cfg> lang;
  for (std::size_t si = 0; si < sccs.size(); ++si) {
    const auto& comp = sccs[si];
    // The component as a grammar whose lower variables are symbols.
    Alphabet ext = sigma;
    std::map<VarId, Symbol> lower;
    for (VarId v : comp)
      for (const auto& p : t.productions())
        if (p.lhs == v)
          for (const auto& s : p.rhs)
            if (s.is_var && scc_of[s.id] != si && !lower.count(s.id)) {
              std::string name = "<" + t.var_name(s.id) + ">";
              while (ext.contains(name)) name += "'";
              lower[s.id] = ext.add(name);
            }
    Cfg h(ext, t.var_name(comp.front()));
    std::vector<VarId> local(nv, 0);
    for (VarId v : comp) local[v] = h.add_variable(t.var_name(v));
    for (const auto& p : t.productions()) {
      if (scc_of[p.lhs] != si) continue;
      std::vector<GSym> rhs;
      for (const auto& s : p.rhs) {
        if (!s.is_var)
          rhs.push_back(s);
        else if (scc_of[s.id] == si)
          rhs.push_back(GSym::var(local[s.id]));
        else
          rhs.push_back(GSym::term(lower.at(s.id)));
      }
      h.add_production(local[p.lhs], std::move(rhs));
    }
    h.normalize();
    std::vector<ElementaryBounded> bh(comp.size());
    if (h.is_linear()) {
      LinearGrammar lh(h);
      for (std::size_t i = 0; i < comp.size(); ++i) bh[i] = bounded_for_linear(lh, local[comp[i]]);
    } else {
      auto kf = build_kfold(h, comp.size());
      std::vector<ElementaryBounded> btilde;
      for (VarId x = 0; x < h.num_variables(); ++x) btilde.push_back(bounded_for_linear(kf.differential, x));
      auto all = algorithm1_bounded_sequence(kf, btilde, proof);
      for (std::size_t i = 0; i < comp.size(); ++i) bh[i] = all[local[comp[i]]];
    }
    std::map<std::string, Cfg> sub_sigma;
    std::map<std::string, ElementaryBounded> sub_tau;
    for (const auto& [z, sym] : lower) {
      auto it = lang.find(z);
      if (it == lang.end()) it = lang.emplace(z, with_start(t, z)).first;
      sub_sigma.emplace(ext.name(sym), it->second);
      sub_tau.emplace(ext.name(sym), bound[z]);
    }
    Substitution sub(sub_sigma, sub_tau, sigma);
    ProofStep step{"component " + std::to_string(si + 1), {}};
    for (std::size_t i = 0; i < comp.size(); ++i) {
      bound[comp[i]] = eb_simplify(sub.apply(bh[i]));
      step.entries.push_back({t.var_name(comp[i]), bound[comp[i]]});
    }
    if (proof) proof->push_back(std::move(step));
  }
  return bound[t.start()];
}

}  // namespace

std::vector<ElementaryBounded> pumping_components(const Cfg& g) {
  auto image = parikh_image(g);
  std::vector<ElementaryBounded> out;
  for (const auto& c : image.components) out.push_back(eb_simplify(ElementaryBounded(g.terminals(), c.blocks)));
  return out;
}

ElementaryBounded bounded_by_pumping(const Cfg& g) {
  ElementaryBounded out(g.terminals(), {});
  for (const auto& c : pumping_components(g)) out = eb_concat(out, c);
  out = eb_simplify(out);
  check_size(out);
  return out;
}

ElementaryBounded parikh_equivalent_bounded(const Cfg& g, ProofLog* proof, const BoundedOptions& options) {
  ElementaryBounded out;
  switch (options.method) {
    case BoundedMethod::Newton:
      out = newton_bounded(g, proof);
      break;
    case BoundedMethod::Pumping:
      out = bounded_by_pumping(g);
      break;
    case BoundedMethod::Auto: {
      ElementaryBounded pumped = bounded_by_pumping(g);
      std::optional<ElementaryBounded> newton;
      ProofLog log;
      try {
        SizeLimit limit(options.auto_newton_limit);
        newton = newton_bounded(g, proof ? &log : nullptr);
      } catch (const BudgetError&) {
      }
      if (newton && newton->size() <= pumped.size()) {
        out = std::move(*newton);
        if (proof) proof->insert(proof->end(), log.begin(), log.end());
      } else {
        out = std::move(pumped);
        if (proof) proof->push_back({"pumping", {{g.var_name(g.start()), out}}});
      }
      break;
    }
  }
  if (verification_length()) verify(g, out, "the context-free construction");
  return out;
}

Cfg bounded_subset(const Cfg& g, ElementaryBounded* b_out, const BoundedOptions& options) {
  auto b = parikh_equivalent_bounded(g, nullptr, options);
  Cfg out = product_with_nfa(g, eb_to_nfa(b));
  if (b_out) *b_out = std::move(b);
  return out;
}

}  // namespace pbound

namespace pbound {

ElementaryBounded prune_bounded(const Cfg& g, const ElementaryBounded& b, std::size_t n) {
  std::vector<Word> words = b.words();
  for (std::size_t i = words.size(); i-- > 0;) {
    std::vector<Word> without = words;
    without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
    if (check_bounded_property(g, ElementaryBounded(b.alphabet(), without), n)) words = std::move(without);
  }
  return ElementaryBounded(b.alphabet(), std::move(words));
}

}  // namespace pbound

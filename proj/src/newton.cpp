#include "pbound/newton.hpp"

#include <algorithm>

#include "pbound/error.hpp"

namespace pbound {

PolynomialTransformation::PolynomialTransformation(const Cfg& g) : g_(&g), by_var_(g.num_variables()) {
  for (std::size_t i = 0; i < g.productions().size(); ++i) by_var_[g.productions()[i].lhs].push_back(i);
}

std::vector<Word> PolynomialTransformation::constant_words(VarId x) const {
  std::vector<Word> out;
  for (auto i : by_var_.at(x)) {
    const auto& rhs = g_->productions()[i].rhs;
    bool terminal = std::none_of(rhs.begin(), rhs.end(), [](const GSym& s) { return s.is_var; });
    if (!terminal) continue;
    Word w;
    for (const auto& s : rhs) w.push_back(s.id);
    out.push_back(std::move(w));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LinearGrammar differential_grammar(const Cfg& g) {
  g.validate();
  Alphabet sigma = g.terminals();
  for (VarId x = 0; x < g.num_variables(); ++x) {
    std::string name = "v_" + g.var_name(x);
    while (sigma.contains(name)) name += "'";
    sigma.add(name);
  }
  Cfg out(sigma, g.var_name(g.start()));
  for (VarId x = 0; x < g.num_variables(); ++x) out.add_variable(g.var_name(x));
  auto vsym = [&](VarId y) { return GSym::term(v_symbol(g, y)); };
  for (const auto& p : g.productions()) {
    std::vector<std::size_t> occ;
    for (std::size_t i = 0; i < p.rhs.size(); ++i)
      if (p.rhs[i].is_var) occ.push_back(i);
    auto substituted = [&](std::size_t keep) {
      std::vector<GSym> rhs = p.rhs;
      for (auto i : occ)
        if (i != keep) rhs[i] = vsym(p.rhs[i].id);
      return rhs;
    };
    for (auto keep : occ) out.add_production(p.lhs, substituted(keep));
    out.add_production(p.lhs, substituted(SIZE_MAX));
  }
  out.normalize();
  return LinearGrammar(std::move(out));
}

KFoldComposition build_kfold(const Cfg& g, std::size_t depth) {
  KFoldComposition kf;
  kf.base = g;
  kf.differential = differential_grammar(g);
  kf.depth = depth ? depth : g.num_variables();
  PolynomialTransformation f(g);
  for (VarId x = 0; x < g.num_variables(); ++x) kf.base_level.push_back(f.constant_words(x));
  return kf;
}

Cfg materialize_iterate(const KFoldComposition& kf, VarId x, std::size_t k) {
  const Cfg& g = kf.base;
  const Cfg& d = kf.differential.cfg();
  const std::size_t n = g.num_variables();
  if (x >= n) throw InputError("variable out of range");
  if (k > kf.depth) throw InputError("iterate index exceeds the composition depth");
  const std::size_t sigma_size = g.terminals().size();
  Cfg out(g.terminals(), g.var_name(x) + "@" + std::to_string(k));
  // ids[i][y] is the variable "y@i".
  std::vector<std::vector<VarId>> ids(k + 1, std::vector<VarId>(n));
  for (std::size_t i = 0; i <= k; ++i)
    for (VarId y = 0; y < n; ++y) ids[i][y] = out.add_variable(g.var_name(y) + "@" + std::to_string(i));
  for (VarId y = 0; y < n; ++y)
    for (const auto& w : kf.base_level[y]) {
      std::vector<GSym> rhs;
      for (auto s : w) rhs.push_back(GSym::term(s));
      out.add_production(ids[0][y], std::move(rhs));
    }
  for (std::size_t i = 1; i <= k; ++i)
    for (const auto& p : d.productions()) {
      std::vector<GSym> rhs;
      for (const auto& s : p.rhs) {
        if (s.is_var)
          rhs.push_back(GSym::var(ids[i][s.id]));
        else if (s.id >= sigma_size)
          rhs.push_back(GSym::var(ids[i - 1][s.id - sigma_size]));
        else
          rhs.push_back(s);
      }
      out.add_production(ids[i][p.lhs], std::move(rhs));
    }
  return trim(out);
}

}  // namespace pbound

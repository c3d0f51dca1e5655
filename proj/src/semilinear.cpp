#include "pbound/semilinear.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pbound/error.hpp"

namespace pbound {

void LinearSet::normalize() {
  periods.erase(std::remove_if(periods.begin(), periods.end(),
                               [](const ParikhVector& p) { return vector_norm(p) == 0; }),
                periods.end());
  std::sort(periods.begin(), periods.end());
  periods.erase(std::unique(periods.begin(), periods.end()), periods.end());
}

SemilinearSet WitnessedSemilinear::set() const {
  SemilinearSet s;
  s.dim = dim;
  for (const auto& c : components) s.components.push_back(c.set);
  return s;
}

// ---------------------------------------------------------------- Diophantine core

std::optional<std::vector<std::uint64_t>> solve_nonneg(const std::vector<std::vector<std::int64_t>>& a,
                                                       const std::vector<std::int64_t>& b, std::size_t budget) {
  const std::size_t rows = b.size();
  for (const auto& r : a)
    if (r.size() != (a.empty() ? 0 : a[0].size())) throw InputError("ragged coefficient matrix");
  if (a.size() != rows) throw InputError("matrix and right-hand side disagree in size");
  const std::size_t m = rows == 0 ? 0 : a[0].size();
  if (std::all_of(b.begin(), b.end(), [](std::int64_t x) { return x == 0; }))
    return std::vector<std::uint64_t>(m, 0);
  if (m == 0) return std::nullopt;

  // Columns of [A | -b]; column m carries the right-hand side.
  std::vector<std::vector<std::int64_t>> col(m + 1, std::vector<std::int64_t>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < m; ++j) col[j][r] = a[r][j];
    col[m][r] = -b[r];
  }
  auto dot = [&](const std::vector<std::int64_t>& s, std::size_t j) {
    std::int64_t acc = 0;
    for (std::size_t r = 0; r < rows; ++r) acc += s[r] * col[j][r];
    return acc;
  };
  using Vec = std::vector<std::uint32_t>;
  std::vector<Vec> minimal;  // homogeneous minimal solutions with last coordinate 0
  auto dominated = [&](const Vec& x) {
    for (const auto& mn : minimal) {
      bool ge = true;
      for (std::size_t j = 0; j <= m && ge; ++j) ge = x[j] >= mn[j];
      if (ge) return true;
    }
    return false;
  };
  std::set<Vec> frontier;
  for (std::size_t j = 0; j <= m; ++j) {
    Vec e(m + 1, 0);
    e[j] = 1;
    frontier.insert(e);
  }
  std::size_t work = 0;
  while (!frontier.empty()) {
    std::set<Vec> next;
    for (const auto& x : frontier) {
      std::vector<std::int64_t> s(rows, 0);
      for (std::size_t j = 0; j <= m; ++j)
        if (x[j])
          for (std::size_t r = 0; r < rows; ++r) s[r] += static_cast<std::int64_t>(x[j]) * col[j][r];
      if (std::all_of(s.begin(), s.end(), [](std::int64_t v) { return v == 0; })) {
        if (x[m] == 1) return std::vector<std::uint64_t>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
        minimal.push_back(x);
        continue;
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (j == m && x[m] == 1) continue;
        if (dot(s, j) >= 0) continue;
        Vec y = x;
        ++y[j];
        if (dominated(y)) continue;
        next.insert(std::move(y));
        if (++work > budget) throw BudgetError("Diophantine solver budget exceeded");
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

namespace {

std::vector<std::vector<std::int64_t>> period_matrix(const std::vector<const std::vector<ParikhVector>*>& blocks,
                                                     const std::vector<int>& signs, std::size_t dim) {
  std::size_t cols = 0;
  for (auto* b : blocks) cols += b->size();
  std::vector<std::vector<std::int64_t>> a(dim, std::vector<std::int64_t>(cols, 0));
  std::size_t j = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    for (const auto& p : *blocks[k]) {
      for (std::size_t r = 0; r < dim; ++r) a[r][j] = signs[k] * static_cast<std::int64_t>(p.at(r));
      ++j;
    }
  return a;
}

ParikhVector apply(const LinearSet& l, const std::vector<std::uint64_t>& lambda, std::size_t offset) {
  ParikhVector v = l.constant;
  for (std::size_t j = 0; j < l.periods.size(); ++j)
    for (std::size_t r = 0; r < v.size(); ++r)
      v[r] += static_cast<std::uint32_t>(lambda[offset + j] * l.periods[j][r]);
  return v;
}

}  // namespace

bool linear_membership(const LinearSet& l, const ParikhVector& v) {
  if (v.size() != l.constant.size()) throw InputError("dimension mismatch in membership test");
  std::vector<std::int64_t> b(v.size());
  for (std::size_t r = 0; r < v.size(); ++r) {
    b[r] = static_cast<std::int64_t>(v[r]) - l.constant[r];
    if (b[r] < 0) return false;
  }
  auto a = period_matrix({&l.periods}, {1}, v.size());
  return solve_nonneg(a, b).has_value();
}

bool sl_membership(const SemilinearSet& s, const ParikhVector& v) {
  if (v.size() != s.dim) throw InputError("dimension mismatch in membership test");
  return std::any_of(s.components.begin(), s.components.end(),
                     [&](const LinearSet& l) { return linear_membership(l, v); });
}

std::optional<ParikhVector> sl_intersection_witness(const std::vector<SemilinearSet>& sets) {
  if (sets.empty()) throw InputError("intersection of no semilinear sets");
  const std::size_t dim = sets[0].dim;
  for (const auto& s : sets)
    if (s.dim != dim) throw InputError("dimension mismatch in intersection");
  if (sets.size() == 1) {
    if (sets[0].components.empty()) return std::nullopt;
    return sets[0].components[0].constant;
  }
  // Pairwise-compatible components against the first set prune the tuple search.
  const std::size_t k = sets.size();
  std::vector<std::size_t> pick(k, 0);
  std::optional<ParikhVector> found;
  std::function<void(std::size_t)> rec = [&](std::size_t level) {
    if (found) return;
    if (level == k) {
      // c_1 + P_1 λ_1 = c_i + P_i λ_i for i = 2..k.
      std::size_t cols = 0;
      std::vector<std::size_t> offset(k);
      for (std::size_t i = 0; i < k; ++i) {
        offset[i] = cols;
        cols += sets[i].components[pick[i]].periods.size();
      }
      const auto& first = sets[0].components[pick[0]];
      std::vector<std::vector<std::int64_t>> a((k - 1) * dim, std::vector<std::int64_t>(cols, 0));
      std::vector<std::int64_t> b((k - 1) * dim, 0);
      for (std::size_t i = 1; i < k; ++i) {
        const auto& li = sets[i].components[pick[i]];
        for (std::size_t r = 0; r < dim; ++r) {
          std::size_t row = (i - 1) * dim + r;
          for (std::size_t j = 0; j < first.periods.size(); ++j) a[row][offset[0] + j] = first.periods[j][r];
          for (std::size_t j = 0; j < li.periods.size(); ++j)
            a[row][offset[i] + j] = -static_cast<std::int64_t>(li.periods[j][r]);
          b[row] = static_cast<std::int64_t>(li.constant[r]) - first.constant[r];
        }
      }
      if (auto sol = solve_nonneg(a, b)) found = apply(first, *sol, 0);
      return;
    }
    for (std::size_t c = 0; c < sets[level].components.size() && !found; ++c) {
      pick[level] = c;
      if (level > 0) {
        // Cheap pairwise filter against the first chosen component.
        const auto& l0 = sets[0].components[pick[0]];
        const auto& li = sets[level].components[c];
        auto a = period_matrix({&l0.periods, &li.periods}, {1, -1}, dim);
        std::vector<std::int64_t> b(dim);
        for (std::size_t r = 0; r < dim; ++r) b[r] = static_cast<std::int64_t>(li.constant[r]) - l0.constant[r];
        if (!solve_nonneg(a, b)) continue;
      }
      rec(level + 1);
    }
  };
  rec(0);
  return found;
}

std::optional<ParikhVector> sl_intersection_witness(const SemilinearSet& s1, const SemilinearSet& s2) {
  return sl_intersection_witness(std::vector<SemilinearSet>{s1, s2});
}

// ---------------------------------------------------------------- Parikh image

namespace {

/// Set of recursive variables, as a bitset.
struct Key {
  std::vector<std::uint64_t> bits;

  explicit Key(std::size_t n = 0) : bits((n + 63) / 64, 0) {}
  void set(std::size_t i) { bits[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (bits[i / 64] >> (i % 64)) & 1U; }
  void merge(const Key& o) {
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] |= o.bits[i];
  }
  bool subset_of(const Key& o) const {
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i] & ~o.bits[i]) return false;
    return true;
  }
  bool operator==(const Key& o) const { return bits == o.bits; }
  bool operator<(const Key& o) const { return bits < o.bits; }
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (auto b : k.bits) h ^= std::hash<std::uint64_t>()(b) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

bool leq(const ParikhVector& a, const ParikhVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

ParikhVector minus(const ParikhVector& a, const ParikhVector& b) {
  ParikhVector r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

/// r ∈ gens* for nonnegative vectors, by depth-first search over
/// nondecreasing generator indices.
class MonoidTester {
 public:
  explicit MonoidTester(std::size_t max_steps) : max_steps_(max_steps) {}

  bool contains(const ParikhVector& r, const std::vector<const ParikhVector*>& gens) {
    if (vector_norm(r) == 0) return true;
    // Every positive coordinate needs some generator touching it.
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i]) continue;
      bool any = std::any_of(gens.begin(), gens.end(), [&](const ParikhVector* g) { return (*g)[i] > 0; });
      if (!any) return false;
    }
    failed_.clear();
    return dfs(r, 0, gens);
  }

 private:
  bool dfs(const ParikhVector& r, std::size_t from, const std::vector<const ParikhVector*>& gens) {
    if (vector_norm(r) == 0) return true;
    if (++steps_ > max_steps_) throw BudgetError("Parikh image search budget exceeded");
    auto key = std::make_pair(r, from);
    if (failed_.count(key)) return false;
    // The first positive coordinate must be covered by some generator from `from` on.
    std::size_t first = 0;
    while (r[first] == 0) ++first;
    for (std::size_t i = from; i < gens.size(); ++i) {
      const auto& g = *gens[i];
      if (!leq(g, r)) continue;
      if (g[first] == 0) {
        // Generators not touching `first` can be used later as well; only
        // try them when some later generator still covers `first`.
        bool later = false;
        for (std::size_t j = i + 1; j < gens.size() && !later; ++j) later = (*gens[j])[first] > 0;
        if (!later) continue;
      }
      if (dfs(minus(r, g), i, gens)) return true;
    }
    failed_.insert(std::move(key));
    return false;
  }

  std::size_t max_steps_;
  std::size_t steps_ = 0;
  std::set<std::pair<ParikhVector, std::size_t>> failed_;
};

class ParikhSaturation {
 public:
  ParikhSaturation(const Cfg& g, ParikhBudget budget) : g_(g), budget_(budget), tester_(budget.max_search_steps) {
    d_ = g.terminals().size();
    n_ = g.num_variables();
    auto rec = recursive_variables(g);
    rec_bit_.assign(n_, -1);
    for (VarId v = 0; v < n_; ++v)
      if (rec[v]) rec_bit_[v] = static_cast<int>(nr_++);
    scc_of_.assign(n_, 0);
    auto sccs = variable_sccs(g);
    for (std::size_t i = 0; i < sccs.size(); ++i)
      for (VarId v : sccs[i]) scc_of_[v] = i;
    for (const auto& p : g.productions()) {
      Prod pr;
      pr.lhs = p.lhs;
      pr.rhs = &p.rhs;
      pr.base.assign(d_, 0);
      for (const auto& s : p.rhs) {
        if (s.is_var)
          pr.occ.push_back(s.id);
        else
          ++pr.base[s.id];
      }
      prods_.push_back(std::move(pr));
    }
    trees_.resize(n_);
    tree_index_.resize(n_);
    tree_old_.assign(n_, 0);
    tree_new_.assign(n_, 0);
  }

  WitnessedSemilinear run() {
    for (std::size_t round = 1;; ++round) {
      std::vector<CtxCand> ctx_cands;
      std::vector<TreeCand> tree_cands;
      generate(round, tree_cands, ctx_cands);
      bool changed = false;
      std::stable_sort(ctx_cands.begin(), ctx_cands.end(),
                       [](const CtxCand& a, const CtxCand& b) { return vector_norm(a.vec) < vector_norm(b.vec); });
      for (auto& c : ctx_cands) changed |= insert_context(std::move(c));
      std::stable_sort(tree_cands.begin(), tree_cands.end(),
                       [](const TreeCand& a, const TreeCand& b) { return vector_norm(a.vec) < vector_norm(b.vec); });
      for (auto& t : tree_cands) changed |= insert_tree(std::move(t));
      // Advance the semi-naive windows.
      for (VarId v = 0; v < n_; ++v) {
        tree_old_[v] = tree_new_[v];
        tree_new_[v] = trees_[v].size();
      }
      for (auto& [yz, list] : ctx_) {
        auto& w = ctx_window_[yz];
        w.first = w.second;
        w.second = list.size();
      }
      if (!changed) break;
    }
    return collect();
  }

 private:
  struct Prod {
    VarId lhs;
    const std::vector<GSym>* rhs;
    ParikhVector base;
    std::vector<VarId> occ;
  };
  /// Yield of a derivation tree with open/close markers around the
  /// subtrees of recursive variables.
  using Trace = std::vector<std::uint32_t>;
  static constexpr std::uint32_t kOpen = 1U << 31;
  static constexpr std::uint32_t kClose = 1U << 30;

  struct Tree {
    Key key;
    ParikhVector vec;
    Trace trace;
    Word word;
  };
  struct TreeCand {
    VarId var;
    Key key;
    ParikhVector vec;
    Trace trace;
  };
  /// One-hole tree from -> left to right.
  struct Ctx {
    Key key;
    ParikhVector vec;
    Word left, right;
  };
  struct CtxCand {
    VarId from, to;
    Key key;
    ParikhVector vec;
    Word left, right;
  };
  struct Gen {
    Key key;
    ParikhVector vec;
    VarId root;
    Word left, right;
  };

  static Word trace_word(const Trace& t) {
    Word w;
    for (auto x : t)
      if (!(x & (kOpen | kClose))) w.push_back(x);
    return w;
  }

  Key singleton(VarId v) const {
    Key k(nr_);
    if (rec_bit_[v] >= 0) k.set(static_cast<std::size_t>(rec_bit_[v]));
    return k;
  }

  void charge() {
    if (++entries_ > budget_.max_entries) throw BudgetError("Parikh image entry budget exceeded");
  }

  const std::vector<const ParikhVector*>& gens_for(const Key& k) {
    auto& c = gen_cache_[k];
    for (; c.seen < gens_.size(); ++c.seen)
      if (gens_[c.seen].key.subset_of(k)) c.ids.push_back(c.seen);
    c.ptrs.clear();
    for (auto id : c.ids) c.ptrs.push_back(&gens_[id].vec);
    return c.ptrs;
  }

  /// Enumerates index tuples over `bounds` (old_end, new_end) per position
  /// with at least one index in a "new" range.
  template <class F>
  static void semi_naive(const std::vector<std::pair<std::size_t, std::size_t>>& bounds, F&& f) {
    const std::size_t k = bounds.size();
    std::vector<std::size_t> pick(k);
    for (std::size_t first_new = 0; first_new < k; ++first_new) {
      std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == k) {
          f(pick);
          return;
        }
        std::size_t lo = 0, hi = bounds[i].second;
        if (i < first_new) hi = bounds[i].first;
        if (i == first_new) lo = bounds[i].first;
        for (std::size_t x = lo; x < hi; ++x) {
          pick[i] = x;
          rec(i + 1);
        }
      };
      rec(0);
    }
  }

  Trace build_trace(const Prod& p, const std::vector<const Trace*>& children) const {
    Trace t;
    const bool marked = rec_bit_[p.lhs] >= 0;
    if (marked) t.push_back(kOpen | p.lhs);
    std::size_t c = 0;
    for (const auto& s : *p.rhs) {
      if (s.is_var)
        t.insert(t.end(), children[c]->begin(), children[c]->end()), ++c;
      else
        t.push_back(s.id);
    }
    if (marked) t.push_back(kClose | p.lhs);
    return t;
  }

  void generate(std::size_t round, std::vector<TreeCand>& trees_out, std::vector<CtxCand>& ctx_out) {
    for (const auto& p : prods_) {
      const std::size_t k = p.occ.size();
      // Trees.
      if (k == 0) {
        if (round == 1) trees_out.push_back({p.lhs, singleton(p.lhs), p.base, build_trace(p, {})});
      } else {
        std::vector<std::pair<std::size_t, std::size_t>> bounds;
        for (VarId y : p.occ) bounds.push_back({tree_old_[y], tree_new_[y]});
        semi_naive(bounds, [&](const std::vector<std::size_t>& pick) {
          Key key = singleton(p.lhs);
          ParikhVector vec = p.base;
          std::vector<const Trace*> kids;
          for (std::size_t i = 0; i < k; ++i) {
            const auto& t = trees_[p.occ[i]][pick[i]];
            key.merge(t.key);
            for (std::size_t r = 0; r < d_; ++r) vec[r] += t.vec[r];
            kids.push_back(&t.trace);
          }
          charge();
          trees_out.push_back({p.lhs, std::move(key), std::move(vec), build_trace(p, kids)});
        });
      }
      // Contexts: one occurrence continues the spine inside the same SCC.
      if (rec_bit_[p.lhs] < 0) continue;
      for (std::size_t s = 0; s < k; ++s) {
        VarId w = p.occ[s];
        if (scc_of_[w] != scc_of_[p.lhs]) continue;
        std::vector<std::pair<std::size_t, std::size_t>> bounds;
        std::vector<std::size_t> others;
        for (std::size_t i = 0; i < k; ++i)
          if (i != s) {
            others.push_back(i);
            bounds.push_back({tree_old_[p.occ[i]], tree_new_[p.occ[i]]});
          }
        auto emit = [&](const std::vector<std::size_t>& pick, VarId to, const Key& spine_key,
                        const ParikhVector& spine_vec, const Word& spine_left, const Word& spine_right) {
          Key key = singleton(p.lhs);
          key.merge(spine_key);
          ParikhVector vec = p.base;
          for (std::size_t r = 0; r < d_; ++r) vec[r] += spine_vec[r];
          for (std::size_t j = 0; j < others.size(); ++j) {
            const auto& t = trees_[p.occ[others[j]]][pick[j]];
            key.merge(t.key);
            for (std::size_t r = 0; r < d_; ++r) vec[r] += t.vec[r];
          }
          Word left, right;
          Word* side = &left;
          std::size_t occ = 0, other = 0;
          for (const auto& sym : *p.rhs) {
            if (!sym.is_var) {
              side->push_back(sym.id);
            } else if (occ++ == s) {
              left.insert(left.end(), spine_left.begin(), spine_left.end());
              right = spine_right;
              side = &right;
            } else {
              const auto& tw = trees_[p.occ[others[other]]][pick[other]].word;
              ++other;
              side->insert(side->end(), tw.begin(), tw.end());
            }
          }
          charge();
          ctx_out.push_back({p.lhs, to, std::move(key), std::move(vec), std::move(left), std::move(right)});
        };
        // The occurrence is the hole itself.
        const ParikhVector zero(d_, 0);
        const Key hole_key = singleton(w);
        const Word none;
        if (bounds.empty()) {
          if (round == 1) emit({}, w, hole_key, zero, none, none);
        } else {
          semi_naive(bounds,
                     [&](const std::vector<std::size_t>& pick) { emit(pick, w, hole_key, zero, none, none); });
        }
        // The occurrence carries a longer context w → z.
        for (auto& [yz, list] : ctx_) {
          if (yz.first != w) continue;
          auto [old_end, new_end] = ctx_window_[yz];
          auto all = bounds;
          all.push_back({old_end, new_end});
          semi_naive(all, [&](const std::vector<std::size_t>& pick) {
            const auto& c = list[pick.back()];
            std::vector<std::size_t> tree_pick(pick.begin(), pick.end() - 1);
            emit(tree_pick, yz.second, c.key, c.vec, c.left, c.right);
          });
        }
      }
    }
  }

  bool covered(const ParikhVector& v, const std::vector<const ParikhVector*>& cands, const Key& key) {
    const auto& gens = gens_for(key);
    for (const auto* c : cands)
      if (leq(*c, v) && tester_.contains(minus(v, *c), gens)) return true;
    return false;
  }

  bool insert_context(CtxCand c) {
    if (c.from == c.to) {
      if (tester_.contains(c.vec, gens_for(c.key))) return false;
      gens_.push_back({std::move(c.key), std::move(c.vec), c.from, std::move(c.left), std::move(c.right)});
      return true;
    }
    auto yz = std::make_pair(c.from, c.to);
    auto& list = ctx_[yz];
    auto& idx = ctx_index_[yz][c.key];
    std::vector<const ParikhVector*> cands;
    for (auto i : idx) cands.push_back(&list[i].vec);
    if (covered(c.vec, cands, c.key)) return false;
    idx.push_back(list.size());
    list.push_back({std::move(c.key), std::move(c.vec), std::move(c.left), std::move(c.right)});
    ctx_window_.try_emplace(yz, std::make_pair(std::size_t{0}, std::size_t{0}));
    return true;
  }

  bool insert_tree(TreeCand t) {
    auto& idx = tree_index_[t.var][t.key];
    std::vector<const ParikhVector*> cands;
    for (auto i : idx) cands.push_back(&trees_[t.var][i].vec);
    if (covered(t.vec, cands, t.key)) return false;
    idx.push_back(trees_[t.var].size());
    Word word = trace_word(t.trace);
    trees_[t.var].push_back({std::move(t.key), std::move(t.vec), std::move(t.trace), std::move(word)});
    return true;
  }

  WitnessedSemilinear collect() {
    struct Comp {
      Key key;
      LinearSet set;
      const Trace* trace;
      std::vector<std::size_t> gens;
    };
    std::vector<Comp> comps;
    for (const auto& t : trees_[g_.start()]) {
      Comp c{t.key, {}, &t.trace, {}};
      c.set.constant = t.vec;
      gens_for(t.key);
      // One generator per distinct nonzero vector, largest first.
      std::map<ParikhVector, std::size_t> by_vec;
      for (auto id : gen_cache_[t.key].ids)
        if (vector_norm(gens_[id].vec) > 0) by_vec.try_emplace(gens_[id].vec, id);
      for (auto& [v, id] : by_vec) c.gens.push_back(id);
      std::sort(c.gens.begin(), c.gens.end(), [&](std::size_t a, std::size_t b) {
        const auto& va = gens_[a].vec;
        const auto& vb = gens_[b].vec;
        return std::make_pair(vector_norm(va), va) > std::make_pair(vector_norm(vb), vb);
      });
      // Drop generators expressible by the remaining ones.
      for (std::size_t i = 0; i < c.gens.size();) {
        std::vector<const ParikhVector*> rest;
        for (std::size_t j = 0; j < c.gens.size(); ++j)
          if (j != i) rest.push_back(&gens_[c.gens[j]].vec);
        if (tester_.contains(gens_[c.gens[i]].vec, rest))
          c.gens.erase(c.gens.begin() + static_cast<std::ptrdiff_t>(i));
        else
          ++i;
      }
      std::sort(c.gens.begin(), c.gens.end());
      for (auto id : c.gens) c.set.periods.push_back(gens_[id].vec);
      c.set.normalize();
      comps.push_back(std::move(c));
    }
    std::sort(comps.begin(), comps.end(), [](const Comp& a, const Comp& b) {
      return std::make_tuple(vector_norm(a.set.constant), a.set.constant, a.set.periods.size(), a.set.periods) <
             std::make_tuple(vector_norm(b.set.constant), b.set.constant, b.set.periods.size(), b.set.periods);
    });
    // Drop components contained in another one.
    std::vector<bool> gone(comps.size(), false);
    for (std::size_t i = 0; i < comps.size(); ++i) {
      for (std::size_t j = 0; j < comps.size() && !gone[i]; ++j) {
        if (i == j || gone[j]) continue;
        const auto& a = comps[i];
        const auto& b = comps[j];
        if (!leq(b.set.constant, a.set.constant)) continue;
        std::vector<const ParikhVector*> pb;
        for (const auto& p : b.set.periods) pb.push_back(&p);
        bool periods_inside = std::all_of(a.set.periods.begin(), a.set.periods.end(),
                                          [&](const ParikhVector& p) { return tester_.contains(p, pb); });
        if (periods_inside && tester_.contains(minus(a.set.constant, b.set.constant), pb)) gone[i] = true;
      }
    }
    WitnessedSemilinear out;
    out.dim = d_;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (gone[i]) continue;
      auto& c = comps[i];
      out.components.push_back({std::move(c.set), trace_word(*c.trace), pump_blocks(*c.trace, c.gens)});
    }
    return out;
  }

  /// Blocks s0 x1 … y1 s1 … realizing constant + any combination of the
  /// generators: every pump is wrapped around the first node of its root.
  std::vector<Word> pump_blocks(const Trace& trace, const std::vector<std::size_t>& gen_ids) const {
    std::map<VarId, std::vector<std::size_t>> at_root;
    for (auto id : gen_ids) at_root[gens_[id].root].push_back(id);
    std::vector<std::vector<std::size_t>> opens(trace.size()), closes(trace.size());
    std::set<VarId> placed;
    std::vector<std::pair<VarId, std::size_t>> stack;  // (var, open index)
    for (std::size_t i = 0; i < trace.size(); ++i) {
      auto x = trace[i];
      if (x & kOpen) {
        VarId v = x & ~kOpen;
        stack.push_back({v, i});
      } else if (x & kClose) {
        auto [v, o] = stack.back();
        stack.pop_back();
        auto it = at_root.find(v);
        if (it != at_root.end() && placed.insert(v).second) {
          opens[o] = it->second;
          closes[i] = it->second;
          std::reverse(closes[i].begin(), closes[i].end());
        }
      }
    }
    if (placed.size() != at_root.size()) throw SoundnessError("pump root missing from the witness tree");
    std::vector<Word> blocks;
    Word segment;
    auto flush = [&] {
      if (!segment.empty()) blocks.push_back(std::move(segment));
      segment.clear();
    };
    for (std::size_t i = 0; i < trace.size(); ++i) {
      auto x = trace[i];
      if (!(x & (kOpen | kClose))) {
        segment.push_back(x);
        continue;
      }
      const auto& ids = (x & kOpen) ? opens[i] : closes[i];
      if (ids.empty()) continue;
      flush();
      for (auto id : ids) {
        const Word& w = (x & kOpen) ? gens_[id].left : gens_[id].right;
        if (!w.empty()) blocks.push_back(w);
      }
    }
    flush();
    return blocks;
  }

  struct GenCache {
    std::size_t seen = 0;
    std::vector<std::size_t> ids;
    std::vector<const ParikhVector*> ptrs;
  };

  const Cfg& g_;
  ParikhBudget budget_;
  MonoidTester tester_;
  std::size_t d_ = 0, n_ = 0, nr_ = 0;
  std::size_t entries_ = 0;
  std::vector<int> rec_bit_;
  std::vector<std::size_t> scc_of_;
  std::vector<Prod> prods_;
  std::vector<std::vector<Tree>> trees_;
  std::vector<std::unordered_map<Key, std::vector<std::size_t>, KeyHash>> tree_index_;
  std::vector<std::size_t> tree_old_, tree_new_;
  std::map<std::pair<VarId, VarId>, std::vector<Ctx>> ctx_;
  std::map<std::pair<VarId, VarId>, std::unordered_map<Key, std::vector<std::size_t>, KeyHash>> ctx_index_;
  std::map<std::pair<VarId, VarId>, std::pair<std::size_t, std::size_t>> ctx_window_;
  std::vector<Gen> gens_;
  std::unordered_map<Key, GenCache, KeyHash> gen_cache_;
};

}  // namespace

WitnessedSemilinear parikh_image(const Cfg& g, ParikhBudget budget) {
  // Inlining non-recursive variables shrinks the saturation without
  // changing the language.
  Cfg t = compact(trim(g));
  WitnessedSemilinear out;
  out.dim = t.terminals().size();
  if (t.productions().empty()) return out;
  ParikhSaturation sat(t, budget);
  return sat.run();
}

// ---------------------------------------------------------------- witnesses

std::optional<Word> witness_for_vector(const Cfg& g, const ParikhVector& v) {
  const std::size_t d = g.terminals().size();
  if (v.size() != d) throw InputError("dimension mismatch in witness search");
  CnfGrammar c = to_cnf(g);
  if (vector_norm(v) == 0) {
    if (c.nullable[g.start()]) return Word{};
    return std::nullopt;
  }
  // Mixed-radix index over the box 0 ≤ u ≤ v.
  std::vector<std::size_t> radix(d);
  std::size_t box = 1;
  for (std::size_t i = 0; i < d; ++i) {
    radix[i] = box;
    box *= v[i] + 1;
  }
  if (box > 4'000'000) throw BudgetError("witness search box too large");
  auto decode = [&](std::size_t idx) {
    ParikhVector u(d);
    for (std::size_t i = 0; i < d; ++i) u[i] = static_cast<std::uint32_t>((idx / radix[i]) % (v[i] + 1));
    return u;
  };
  std::vector<std::size_t> order(box);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> norm(box);
  for (std::size_t i = 0; i < box; ++i) norm[i] = vector_norm(decode(i));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norm[a] < norm[b]; });

  struct Back {
    std::int32_t rule = -1;  // terminal rule index when split == SIZE_MAX
    std::size_t split = 0;
  };
  constexpr std::size_t kTerminal = SIZE_MAX;
  std::vector<std::vector<Back>> back(c.num_vars, std::vector<Back>(box));
  std::vector<std::vector<char>> has(c.num_vars, std::vector<char>(box, 0));
  for (std::size_t ti = 0; ti < c.terminal_rules.size(); ++ti) {
    auto [a, s] = c.terminal_rules[ti];
    if (v[s] == 0) continue;
    std::size_t idx = radix[s];
    if (!has[a][idx]) {
      has[a][idx] = 1;
      back[a][idx] = {static_cast<std::int32_t>(ti), kTerminal};
    }
  }
  for (auto idx : order) {
    if (norm[idx] < 2) continue;
    ParikhVector u = decode(idx);
    // Enumerate proper nonzero sub-vectors u1 of u.
    std::vector<std::uint32_t> u1(d, 0);
    while (true) {
      std::size_t i = 0;
      while (i < d && u1[i] == u[i]) u1[i++] = 0;
      if (i == d) break;
      ++u1[i];
      std::uint64_t n1 = 0;
      std::size_t i1 = 0;
      for (std::size_t r = 0; r < d; ++r) {
        n1 += u1[r];
        i1 += u1[r] * radix[r];
      }
      if (n1 == 0 || n1 == norm[idx]) continue;
      std::size_t i2 = idx - i1;
      for (std::size_t ri = 0; ri < c.binary_rules.size(); ++ri) {
        const auto& rule = c.binary_rules[ri];
        if (has[rule.lhs][idx]) continue;
        if (has[rule.left][i1] && has[rule.right][i2]) {
          has[rule.lhs][idx] = 1;
          back[rule.lhs][idx] = {static_cast<std::int32_t>(ri), i1};
        }
      }
    }
  }
  std::size_t full = box - 1;
  if (!has[g.start()][full]) return std::nullopt;
  Word w;
  std::function<void(VarId, std::size_t)> emit = [&](VarId a, std::size_t idx) {
    const auto& b = back[a][idx];
    if (b.split == kTerminal) {
      w.push_back(c.terminal_rules[static_cast<std::size_t>(b.rule)].second);
      return;
    }
    const auto& rule = c.binary_rules[static_cast<std::size_t>(b.rule)];
    emit(rule.left, b.split);
    emit(rule.right, idx - b.split);
  };
  emit(g.start(), full);
  return w;
}

// ---------------------------------------------------------------- serialization

std::string format_semilinear(const SemilinearSet& s) {
  std::string out;
  for (const auto& l : s.components) {
    out += "c = " + format_vector(l.constant) + "; periods =";
    for (std::size_t i = 0; i < l.periods.size(); ++i) out += (i ? "," : " ") + format_vector(l.periods[i]);
    out += "\n";
  }
  return out;
}

std::string format_semilinear(const WitnessedSemilinear& s, const Alphabet& sigma) {
  std::string out;
  for (const auto& c : s.components) {
    out += "c = " + format_vector(c.set.constant) + "; periods =";
    for (std::size_t i = 0; i < c.set.periods.size(); ++i) out += (i ? "," : " ") + format_vector(c.set.periods[i]);
    out += "; witness = " + format_word(sigma, c.witness) + "\n";
  }
  return out;
}

namespace {

ParikhVector parse_vector(const std::string& text, std::size_t dim) {
  auto open = text.find('(');
  auto close = text.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw InputError("malformed vector '" + text + "'");
  ParikhVector v;
  std::string body = text.substr(open + 1, close - open - 1);
  std::stringstream ss(body);
  for (std::string item; std::getline(ss, item, ',');) v.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  if (v.size() != dim) throw InputError("vector '" + text + "' has the wrong dimension");
  return v;
}

}  // namespace

SemilinearSet parse_semilinear(const std::string& text, std::size_t dim) {
  SemilinearSet s;
  s.dim = dim;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto c = line.find("c =");
    auto p = line.find("periods =");
    if (c == std::string::npos || p == std::string::npos) throw InputError("malformed semilinear line: " + line);
    LinearSet l;
    l.constant = parse_vector(line.substr(c, p - c), dim);
    std::string rest = line.substr(p + 9);
    if (auto w = rest.find(';'); w != std::string::npos) rest.resize(w);
    for (std::size_t pos = rest.find('('); pos != std::string::npos; pos = rest.find('(', pos + 1))
      l.periods.push_back(parse_vector(rest.substr(pos), dim));
    l.normalize();
    s.components.push_back(std::move(l));
  }
  return s;
}

}  // namespace pbound

#include "pbound/pdn.hpp"

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pbound/error.hpp"

namespace pbound {

namespace {

std::string fresh_symbol(const Alphabet& a, std::string base) {
  while (a.contains(base)) base += "'";
  return base;
}

}  // namespace

void PushdownNetwork::validate() const {
  if (threads.empty()) throw InputError("pushdown network needs at least one thread");
  for (const auto& rules : threads)
    for (const auto& r : rules) {
      if (r.global >= globals.size() || r.new_global >= globals.size())
        throw InputError("rule global out of range");
      if (r.top >= stack_alphabet.size()) throw InputError("rule stack symbol out of range");
      for (auto s : r.push)
        if (s >= stack_alphabet.size()) throw InputError("rule stack symbol out of range");
    }
}

Alphabet switch_alphabet(const PushdownNetwork& pdn) {
  Alphabet sigma;
  for (const auto& g : pdn.globals.names())
    for (std::size_t i = 1; i <= pdn.num_threads(); ++i) sigma.add("(" + g + "," + std::to_string(i) + ")");
  return sigma;
}

namespace {

void check_config(const PushdownNetwork& pdn, const GlobalConfiguration& c, const char* what) {
  if (c.global >= pdn.globals.size()) throw InputError(std::string(what) + ": global out of range");
  if (c.stacks.size() != pdn.num_threads())
    throw InputError(std::string(what) + ": expected one stack per thread");
  for (const auto& st : c.stacks)
    for (auto s : st)
      if (s >= pdn.stack_alphabet.size()) throw InputError(std::string(what) + ": stack symbol out of range");
}

}  // namespace

std::vector<PushdownAcceptor> encode_to_acceptors(const PushdownNetwork& pdn, const GlobalConfiguration& c0,
                                                  const GlobalConfiguration& target) {
  pdn.validate();
  check_config(pdn, c0, "initial configuration");
  check_config(pdn, target, "target configuration");
  for (const auto& st : target.stacks)
    if (!st.empty())
      throw InputError("target stacks must be empty; add rules that drain the stacks to a fresh global instead");

  const std::size_t n = pdn.num_threads();
  const std::size_t ng = pdn.globals.size();
  Alphabet globals = pdn.globals;
  const std::uint32_t bot = globals.add(fresh_symbol(pdn.globals, "bot"));
  Alphabet stack = pdn.stack_alphabet;
  const std::uint32_t marker = stack.add(fresh_symbol(pdn.stack_alphabet, "bottom"));
  const Alphabet sigma = switch_alphabet(pdn);
  auto letter = [&](std::uint32_t g, std::size_t j) { return static_cast<Symbol>(g * n + j); };

  std::vector<PushdownAcceptor> out;
  for (std::size_t i = 0; i < n; ++i) {
    PushdownAcceptor pa;
    pa.globals = globals;
    pa.stack_alphabet = stack;
    pa.input = sigma;
    for (const auto& r : pdn.threads[i]) pa.rules.push_back({r.global, r.top, r.new_global, r.push, std::nullopt});
    for (std::uint32_t gamma = 0; gamma < stack.size(); ++gamma) {
      for (std::uint32_t g = 0; g < ng; ++g) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          pa.rules.push_back({g, gamma, bot, {gamma}, letter(g, j)});    // deactivation
          pa.rules.push_back({bot, gamma, bot, {gamma}, letter(g, j)});  // idle
        }
        pa.rules.push_back({bot, gamma, g, {gamma}, letter(g, i)});  // activation
      }
    }
    pa.rules.push_back({target.global, marker, target.global, {}, std::nullopt});
    pa.rules.push_back({bot, marker, bot, {}, std::nullopt});
    pa.init_global = i == 0 ? c0.global : bot;
    pa.init_stack = c0.stacks[i];
    pa.init_stack.push_back(marker);
    out.push_back(std::move(pa));
  }
  return out;
}

Cfg acceptor_to_cfg(const PushdownAcceptor& pa) {
  const std::size_t ng = pa.globals.size();
  Cfg g(pa.input, "S");
  auto triple = [&](std::uint32_t p, std::uint32_t gamma, std::uint32_t q) {
    return g.add_variable("[" + pa.globals.name(p) + "," + pa.stack_alphabet.name(gamma) + "," + pa.globals.name(q) +
                          "]");
  };
  // [p, γ1 … γm, q] expanded over every choice of intermediate globals.
  auto chains = [&](std::uint32_t p, const std::vector<std::uint32_t>& stack, std::uint32_t q,
                    std::vector<GSym> prefix, auto&& emit) {
    std::function<void(std::size_t, std::uint32_t, std::vector<GSym>&)> rec = [&](std::size_t k, std::uint32_t from,
                                                                                  std::vector<GSym>& body) {
      if (k + 1 == stack.size()) {
        body.push_back(GSym::var(triple(from, stack[k], q)));
        emit(body);
        body.pop_back();
        return;
      }
      for (std::uint32_t mid = 0; mid < ng; ++mid) {
        body.push_back(GSym::var(triple(from, stack[k], mid)));
        rec(k + 1, mid, body);
        body.pop_back();
      }
    };
    if (stack.empty()) {
      if (p == q) emit(prefix);
      return;
    }
    rec(0, p, prefix);
  };
  for (const auto& r : pa.rules) {
    std::vector<GSym> prefix;
    if (r.label) prefix.push_back(GSym::term(*r.label));
    if (r.push.empty()) {
      VarId lhs = triple(r.global, r.top, r.new_global);
      g.add_production(lhs, prefix);
      continue;
    }
    for (std::uint32_t q = 0; q < ng; ++q) {
      VarId lhs = triple(r.global, r.top, q);
      chains(r.new_global, r.push, q, prefix, [&](const std::vector<GSym>& body) { g.add_production(lhs, body); });
    }
  }
  for (std::uint32_t q = 0; q < ng; ++q)
    chains(pa.init_global, pa.init_stack, q, {}, [&](const std::vector<GSym>& body) { g.add_production(g.start(), body); });
  return trim(g);
}

PdnInstance family_instance(int k) {
  if (k < 1) throw InputError("family instance needs k >= 1");
  PdnInstance inst;
  auto& pdn = inst.pdn;
  const auto T = pdn.globals.add("T");
  const auto F = pdn.globals.add("F");
  const auto D = pdn.globals.add("D");
  std::vector<std::uint32_t> loc(k), chk(k);
  for (int j = 0; j < k; ++j) {
    loc[j] = pdn.stack_alphabet.add("L" + std::to_string(j));
    chk[j] = pdn.stack_alphabet.add("CHK" + std::to_string(j));
  }
  const auto exit = pdn.stack_alphabet.add("EXIT");
  const auto cnt = pdn.stack_alphabet.add("c");
  const auto l1 = pdn.stack_alphabet.add("L1");
  pdn.threads.resize(2);
  auto& p1 = pdn.threads[0];
  for (int j = 0; j < k; ++j) {
    for (auto g : {T, F}) p1.push_back({g, loc[j], T, {chk[j]}});  // bit = true
    p1.push_back({T, chk[j], T, {loc[j]}});                         // bit still true: goto L
    auto next = j + 1 < k ? loc[j + 1] : exit;
    p1.push_back({F, chk[j], F, {next, cnt}});  // ++c, then loop or leave
  }
  for (auto g : {T, F}) p1.push_back({g, exit, D, {}});
  p1.push_back({D, cnt, D, {}});
  auto& p2 = pdn.threads[1];
  for (auto g : {T, F}) {
    p2.push_back({g, l1, F, {l1}});  // bit = false; goto L1
    p2.push_back({g, l1, F, {}});    // leave the loop so the stack can drain
  }
  inst.init = {F, {{loc[0]}, {l1}}};
  inst.target = {D, {{}, {}}};
  return inst;
}

bool pdn_reach_bounded(const PushdownNetwork& pdn, const GlobalConfiguration& c0, const GlobalConfiguration& target,
                       std::size_t depth, std::size_t max_states) {
  pdn.validate();
  check_config(pdn, c0, "initial configuration");
  check_config(pdn, target, "target configuration");
  if (c0 == target) return true;
  std::set<GlobalConfiguration> seen{c0};
  std::deque<std::pair<GlobalConfiguration, std::size_t>> queue{{c0, 0}};
  while (!queue.empty()) {
    auto [c, d] = queue.front();
    queue.pop_front();
    if (d == depth) continue;
    for (std::size_t i = 0; i < pdn.num_threads(); ++i) {
      const auto& st = c.stacks[i];
      if (st.empty()) continue;
      for (const auto& r : pdn.threads[i]) {
        if (r.global != c.global || r.top != st.front()) continue;
        GlobalConfiguration next = c;
        next.global = r.new_global;
        auto& ns = next.stacks[i];
        ns.erase(ns.begin());
        ns.insert(ns.begin(), r.push.begin(), r.push.end());
        if (ns.size() > depth) continue;
        if (next == target) return true;
        if (seen.insert(next).second) {
          if (seen.size() > max_states) throw BudgetError("reachability oracle state budget exceeded");
          queue.push_back({std::move(next), d + 1});
        }
      }
    }
  }
  return false;
}

IntersectionResult reach(const PushdownNetwork& pdn, const GlobalConfiguration& c0, const GlobalConfiguration& target,
                         const SemiAlgorithmOptions& options) {
  auto acceptors = encode_to_acceptors(pdn, c0, target);
  std::vector<Cfg> gs;
  for (const auto& pa : acceptors) gs.push_back(acceptor_to_cfg(pa));
  // One thread: L ∩ L = L.
  if (gs.size() == 1) gs.push_back(gs.front());
  return semi_algorithm(gs, options);
}

std::string decode_schedule(const PushdownNetwork& pdn, const Word& w) {
  const std::size_t n = pdn.num_threads();
  std::string out;
  for (Symbol s : w) {
    auto g = s / n;
    auto i = s % n + 1;
    out += "thread " + std::to_string(i) + " runs with " + pdn.globals.name(g) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- JSON

namespace {

using nlohmann::json;

std::vector<std::uint32_t> parse_stack(const Alphabet& gamma, const json& j) {
  std::vector<std::uint32_t> out;
  if (j.is_string()) {
    std::istringstream in(j.get<std::string>());
    for (std::string tok; in >> tok;)
      if (tok != "eps") out.push_back(gamma.at(tok));
  } else if (j.is_array()) {
    for (const auto& e : j) out.push_back(gamma.at(e.get<std::string>()));
  } else {
    throw InputError("stack must be a string or an array of symbols");
  }
  return out;
}

GlobalConfiguration parse_config(const PushdownNetwork& pdn, const json& j) {
  GlobalConfiguration c;
  c.global = pdn.globals.at(j.at("global").get<std::string>());
  for (const auto& s : j.at("stacks")) c.stacks.push_back(parse_stack(pdn.stack_alphabet, s));
  return c;
}

std::string join_stack(const Alphabet& gamma, const std::vector<std::uint32_t>& st) {
  std::string out;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (i) out += ' ';
    out += gamma.name(st[i]);
  }
  return out;
}

json config_json(const PushdownNetwork& pdn, const GlobalConfiguration& c) {
  json stacks = json::array();
  for (const auto& st : c.stacks) stacks.push_back(join_stack(pdn.stack_alphabet, st));
  return {{"global", pdn.globals.name(c.global)}, {"stacks", stacks}};
}

}  // namespace

PdnInstance parse_pdn_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid PDN JSON: ") + e.what());
  }
  try {
    PdnInstance inst;
    auto& pdn = inst.pdn;
    for (const auto& g : j.at("globals")) pdn.globals.add(g.get<std::string>());
    for (const auto& s : j.at("stack_alphabet")) pdn.stack_alphabet.add(s.get<std::string>());
    for (const auto& rules : j.at("threads")) {
      std::vector<PdnRule> thread;
      for (const auto& r : rules) {
        const auto& from = r.at("from");
        const auto& to = r.at("to");
        if (from.size() != 2 || to.size() != 2) throw InputError("rule needs from:[g,gamma] and to:[g2,alpha]");
        PdnRule rule;
        rule.global = pdn.globals.at(from[0].get<std::string>());
        rule.top = pdn.stack_alphabet.at(from[1].get<std::string>());
        rule.new_global = pdn.globals.at(to[0].get<std::string>());
        rule.push = parse_stack(pdn.stack_alphabet, to[1]);
        thread.push_back(std::move(rule));
      }
      pdn.threads.push_back(std::move(thread));
    }
    pdn.validate();
    inst.init = parse_config(pdn, j.at("init"));
    inst.target = parse_config(pdn, j.at("target"));
    check_config(pdn, inst.init, "init");
    check_config(pdn, inst.target, "target");
    return inst;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed PDN document: ") + e.what());
  }
}

std::string format_pdn_json(const PdnInstance& inst) {
  const auto& pdn = inst.pdn;
  json threads = json::array();
  for (const auto& rules : pdn.threads) {
    json t = json::array();
    for (const auto& r : rules)
      t.push_back({{"from", {pdn.globals.name(r.global), pdn.stack_alphabet.name(r.top)}},
                   {"to", {pdn.globals.name(r.new_global), join_stack(pdn.stack_alphabet, r.push)}}});
    threads.push_back(t);
  }
  json j = {{"globals", pdn.globals.names()},
            {"stack_alphabet", pdn.stack_alphabet.names()},
            {"threads", threads},
            {"init", config_json(pdn, inst.init)},
            {"target", config_json(pdn, inst.target)}};
  return j.dump(2) + "\n";
}

}  // namespace pbound

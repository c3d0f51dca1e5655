// pbound: command-line frontend for bounded Parikh-equivalent subsets,
// Parikh images, CFL intersection and pushdown-network reachability.

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pbound/boundedgen.hpp"
#include "pbound/error.hpp"
#include "pbound/intersect.hpp"
#include "pbound/pdn.hpp"
#include "pbound/semilinear.hpp"

using namespace pbound;
using nlohmann::json;

namespace {

enum Exit { kNonEmpty = 0, kEmpty = 1, kUnknown = 2, kInputError = 3, kBudgetError = 4, kSoundnessError = 5 };

struct Config {
  std::size_t verify = 0;
  std::size_t max_rounds = 5;
  std::string format = "text";
  bool seed_names = false;
  bool json() const { return format == "json"; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Cfg load_grammar(const std::string& path) {
  try {
    return parse_grammar(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

json words_json(const ElementaryBounded& b) {
  json a = json::array();
  for (const auto& w : b.words()) a.push_back(format_word(b.alphabet(), w));
  return a;
}

BoundedMethod parse_method(const std::string& m) {
  if (m == "newton") return BoundedMethod::Newton;
  if (m == "pumping") return BoundedMethod::Pumping;
  if (m == "auto") return BoundedMethod::Auto;
  throw InputError("unknown method '" + m + "' (expected newton, pumping or auto)");
}

/// The three subset properties of L' = L ∩ B, up to length n.
void verify_subset(const Cfg& g, const Cfg& sub, const ElementaryBounded& b, std::size_t n) {
  auto lw = enumerate_words(g, n);
  auto sw = enumerate_words(sub, n);
  std::set<ParikhVector> pl, ps;
  for (const auto& w : lw) pl.insert(parikh_of_word(w, g.terminals()));
  for (const auto& w : sw) {
    if (!cyk_membership(g, w)) throw SoundnessError("subset word outside the language");
    if (!b.contains(w)) throw SoundnessError("subset word outside the bounded expression");
    ps.insert(parikh_of_word(w, g.terminals()));
  }
  if (pl != ps) throw SoundnessError("subset is not Parikh-equivalent up to the verification length");
}

int cmd_bound(const Config& cfg, const std::string& file, bool subset, bool emit_proof, const std::string& method,
              std::size_t prune) {
  Cfg g = trim(load_grammar(file));
  set_verification_length(cfg.verify);
  BoundedOptions opts;
  opts.method = parse_method(method);
  ProofLog proof;
  ElementaryBounded b = parikh_equivalent_bounded(g, emit_proof ? &proof : nullptr, opts);
  if (prune) b = prune_bounded(g, b, prune);
  if (cfg.verify && !check_bounded_property(g, b, cfg.verify))
    throw SoundnessError("bounded property fails up to the verification length");
  std::optional<Cfg> sub;
  if (subset) {
    sub = product_with_nfa(g, eb_to_nfa(b));
    if (cfg.verify) verify_subset(g, *sub, b, cfg.verify);
  }
  if (cfg.json()) {
    json out{{"command", "bound"}, {"bounded", words_json(b)}};
    if (sub) out["subset"] = format_grammar(*sub);
    if (emit_proof) {
      json steps = json::array();
      for (const auto& s : proof) {
        json entries = json::object();
        for (const auto& [name, eb] : s.entries) entries[name] = words_json(eb);
        steps.push_back({{"label", s.label}, {"entries", entries}});
      }
      out["proof"] = steps;
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << format_bounded(b);
    if (sub) std::cout << "# subset grammar\n" << format_grammar(*sub);
    if (emit_proof)
      for (const auto& s : proof) {
        std::cout << "## " << s.label << "\n";
        for (const auto& [name, eb] : s.entries) std::cout << "# " << name << "\n" << format_bounded(eb);
      }
  }
  return 0;
}

int cmd_parikh(const Config& cfg, const std::string& file) {
  Cfg g = trim(load_grammar(file));
  auto s = parikh_image(g);
  if (cfg.verify) {
    auto set = s.set();
    std::set<ParikhVector> checked;
    for (const auto& w : enumerate_words(g, cfg.verify)) {
      auto v = parikh_of_word(w, g.terminals());
      if (!sl_membership(set, v))
        throw SoundnessError("Parikh vector of '" + format_word(g.terminals(), w) + "' missing from the image");
      checked.insert(v);
    }
    for (const auto& v : checked) std::cerr << "# member " << format_vector(v) << "\n";
    for (const auto& c : s.components)
      if (!cyk_membership(g, c.witness)) throw SoundnessError("component witness outside the language");
  }
  if (cfg.json()) {
    json comps = json::array();
    for (const auto& c : s.components) {
      json periods = json::array();
      for (const auto& p : c.set.periods) periods.push_back(p);
      comps.push_back({{"constant", c.set.constant},
                       {"periods", periods},
                       {"witness", format_word(g.terminals(), c.witness)}});
    }
    std::cout << json{{"command", "parikh"}, {"alphabet", g.terminals().names()}, {"components", comps}}.dump(2)
              << "\n";
  } else {
    std::cout << "# alphabet";
    for (const auto& n : g.terminals().names()) std::cout << " " << n;
    std::cout << "\n" << format_semilinear(s, g.terminals());
  }
  return 0;
}

int report_result(const Config& cfg, const std::string& command, const IntersectionResult& r, const Alphabet& sigma,
                  const std::vector<std::string>& trace, const std::string& extra) {
  if (cfg.json()) {
    json out{{"command", command}, {"result", to_string(r.kind)}, {"rounds", r.rounds}};
    if (r.kind == IntersectionResult::Kind::NonEmpty) out["witness"] = format_word(sigma, r.witness);
    if (!r.reason.empty() && r.kind == IntersectionResult::Kind::Unknown) out["reason"] = r.reason;
    if (!trace.empty()) out["trace"] = trace;
    if (!extra.empty()) out["schedule"] = extra;
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& t : trace) std::cout << t;
    std::cout << "result: " << to_string(r.kind) << "\nrounds: " << r.rounds << "\n";
    if (r.kind == IntersectionResult::Kind::NonEmpty) std::cout << "witness: " << format_word(sigma, r.witness) << "\n";
    if (r.kind == IntersectionResult::Kind::Unknown && !r.reason.empty()) std::cout << "reason: " << r.reason << "\n";
    std::cout << extra;
  }
  switch (r.kind) {
    case IntersectionResult::Kind::NonEmpty:
      return kNonEmpty;
    case IntersectionResult::Kind::Empty:
      return kEmpty;
    default:
      return kUnknown;
  }
}

SemiAlgorithmOptions make_options(const Config& cfg, std::size_t oracle_length, bool trace,
                                  std::vector<std::string>& lines) {
  SemiAlgorithmOptions o;
  o.max_rounds = cfg.max_rounds;
  o.oracle_length = std::max(oracle_length, cfg.verify);
  if (trace)
    o.on_round = [&lines](const RoundTrace& t) {
      std::ostringstream ss;
      ss << "# round " << t.round << ": sizes";
      for (auto s : t.grammar_sizes) ss << " " << s;
      ss << "; |B| = " << t.bounded.size() << "; " << t.event << "\n";
      for (const auto& w : t.bounded.words()) ss << "#   " << format_word(t.bounded.alphabet(), w) << "\n";
      lines.push_back(ss.str());
    };
  return o;
}

int cmd_check_intersection(const Config& cfg, const std::vector<std::string>& files, std::size_t oracle_length,
                           bool trace) {
  if (files.size() < 2) throw InputError("check-intersection needs at least two grammar files");
  std::vector<Cfg> gs;
  for (const auto& f : files) gs.push_back(load_grammar(f));
  // Bring every grammar onto the union alphabet, in file order.
  Alphabet sigma;
  for (const auto& g : gs)
    for (const auto& n : g.terminals().names()) sigma.add(n);
  for (auto& g : gs) g = substitute(g, {}, sigma);
  std::vector<std::string> lines;
  auto r = semi_algorithm(gs, make_options(cfg, oracle_length, trace, lines));
  return report_result(cfg, "check-intersection", r, sigma, lines, "");
}

int cmd_reach_pdn(const Config& cfg, const std::string& file, int family, std::size_t oracle_depth, bool trace) {
  PdnInstance inst;
  if (family > 0)
    inst = family_instance(family);
  else if (!file.empty())
    inst = parse_pdn_json(read_file(file));
  else
    throw InputError("reach-pdn needs a PDN file or --family k");
  std::vector<std::string> lines;
  auto r = reach(inst.pdn, inst.init, inst.target, make_options(cfg, 0, trace, lines));
  std::string extra;
  if (r.kind == IntersectionResult::Kind::NonEmpty) extra = decode_schedule(inst.pdn, r.witness);
  if (oracle_depth > 0) {
    bool reachable = pdn_reach_bounded(inst.pdn, inst.init, inst.target, oracle_depth);
    if (r.kind == IntersectionResult::Kind::Empty && reachable)
      throw SoundnessError("Empty answer contradicted by the BFS oracle");
    extra += std::string("oracle: ") + (reachable ? "reachable" : "not reached") + " within depth " +
             std::to_string(oracle_depth) + "\n";
  }
  return report_result(cfg, "reach-pdn", r, switch_alphabet(inst.pdn), lines, extra);
}

int cmd_oracle_verify(const Config& cfg, const std::string& grammar_file, const std::string& bounded_file,
                      std::size_t length) {
  Cfg g = load_grammar(grammar_file);
  Alphabet sigma = g.terminals();
  ElementaryBounded b = parse_bounded(sigma, read_file(bounded_file));
  if (!(b.alphabet() == g.terminals())) g = substitute(g, {}, b.alphabet());
  std::size_t n = length ? length : (cfg.verify ? cfg.verify : 10);
  bool ok = check_bounded_property(g, b, n);
  if (cfg.json())
    std::cout << json{{"command", "oracle-verify"}, {"length", n}, {"holds", ok}}.dump(2) << "\n";
  else
    std::cout << "property " << (ok ? "holds" : "fails") << " up to length " << n << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parikh-equivalent bounded subsets of context-free languages"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--verify", cfg.verify, "Re-check contracts up to this word length (0 = off)");
  app.add_option("--max-rounds", cfg.max_rounds, "Refinement rounds for the intersection procedure")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--seed-names", cfg.seed_names, "Accepted for compatibility; names are always deterministic");

  std::string file, method = "auto";
  bool subset = false, emit_proof = false;
  auto* bound = app.add_subcommand("bound", "Elementary bounded B with the Parikh property");
  bound->add_option("grammar", file, "Grammar file")->required();
  bound->add_flag("--subset", subset, "Also print the grammar of L ∩ B");
  bound->add_flag("--emit-proof", emit_proof, "Dump the intermediate B maps");
  bound->add_option("--method", method, "newton, pumping or auto");
  std::size_t prune = 0;
  bound->add_option("--prune", prune, "Drop words not needed up to this length (heuristic)");

  auto* parikh = app.add_subcommand("parikh", "Parikh image as a semilinear set");
  parikh->add_option("grammar", file, "Grammar file")->required();

  std::vector<std::string> files;
  std::size_t oracle_length = 0;
  bool trace = false;
  auto* check = app.add_subcommand("check-intersection", "Refinement procedure for CFL intersection");
  check->add_option("grammars", files, "Two or more grammar files")->required();
  check->add_option("--oracle-length", oracle_length, "Cross-check Empty answers up to this length");
  check->add_flag("--trace", trace, "Print per-round sizes and B");

  int family = 0;
  std::size_t oracle_depth = 0;
  auto* reach_cmd = app.add_subcommand("reach-pdn", "Pushdown-network reachability");
  reach_cmd->add_option("pdn", file, "PDN JSON file");
  reach_cmd->add_option("--family", family, "Use the built-in family instance k")->check(CLI::PositiveNumber);
  reach_cmd->add_option("--oracle-depth", oracle_depth, "Cross-check with bounded BFS");
  reach_cmd->add_flag("--trace", trace, "Print per-round sizes and B");

  std::string bounded_file;
  std::size_t length = 0;
  auto* oracle = app.add_subcommand("oracle-verify", "Check Π(L ∩ B) = Π(L) by enumeration");
  oracle->add_option("grammar", file, "Grammar file")->required();
  oracle->add_option("bounded", bounded_file, "Bounded expression file")->required();
  oracle->add_option("--length", length, "Maximal word length (default: --verify or 10)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*bound) return cmd_bound(cfg, file, subset, emit_proof, method, prune);
    if (*parikh) return cmd_parikh(cfg, file);
    if (*check) return cmd_check_intersection(cfg, files, oracle_length, trace);
    if (*reach_cmd) return cmd_reach_pdn(cfg, file, family, oracle_depth, trace);
    if (*oracle) return cmd_oracle_verify(cfg, file, bounded_file, length);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudgetError;
  } catch (const SoundnessError& e) {
    std::cerr << "internal check failed: " << e.what() << "\n";
    return kSoundnessError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

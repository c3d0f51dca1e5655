#include "pbound/symbols.hpp"

#include <sstream>

#include "pbound/error.hpp"

namespace pbound {

Alphabet::Alphabet(std::vector<std::string> symbols) {
  for (auto& s : symbols) {
    if (index_.count(s)) throw InputError("duplicate alphabet symbol '" + s + "'");
    index_.emplace(s, static_cast<Symbol>(names_.size()));
    names_.push_back(std::move(s));
  }
}

std::optional<Symbol> Alphabet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Symbol Alphabet::at(std::string_view name) const {
  if (auto s = find(name)) return *s;
  throw InputError("symbol '" + std::string(name) + "' is not in the alphabet");
}

Symbol Alphabet::add(const std::string& name) {
  if (auto s = find(name)) return *s;
  auto id = static_cast<Symbol>(names_.size());
  index_.emplace(name, id);
  names_.push_back(name);
  return id;
}

Word parse_word(const Alphabet& sigma, std::string_view text) {
  std::istringstream in{std::string(text)};
  Word w;
  std::string tok;
  while (in >> tok) {
    if (tok == "eps") continue;
    w.push_back(sigma.at(tok));
  }
  return w;
}

std::string format_word(const Alphabet& sigma, const Word& w) {
  if (w.empty()) return "eps";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += sigma.name(w[i]);
  }
  return out;
}

ParikhVector parikh_of_word(const Word& w, const Alphabet& sigma) {
  ParikhVector v(sigma.size(), 0);
  for (Symbol s : w) {
    if (s >= sigma.size()) throw InputError("word symbol outside the alphabet");
    ++v[s];
  }
  return v;
}

Word translate_word(const Word& w, const Alphabet& from, const Alphabet& to) {
  Word out;
  out.reserve(w.size());
  for (Symbol s : w) out.push_back(to.at(from.name(s)));
  return out;
}

ParikhVector operator+(const ParikhVector& a, const ParikhVector& b) {
  ParikhVector r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b.at(i);
  return r;
}

std::string format_vector(const ParikhVector& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out + ")";
}

std::uint64_t vector_norm(const ParikhVector& v) {
  std::uint64_t n = 0;
  for (auto x : v) n += x;
  return n;
}

std::vector<Word> all_words(std::size_t alphabet_size, std::size_t max_length) {
  std::vector<Word> out{Word{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_length && alphabet_size > 0; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (Symbol s = 0; s < alphabet_size; ++s) {
        Word w = out[i];
        w.push_back(s);
        out.push_back(std::move(w));
      }
    }
    begin = end;
  }
  return out;
}

}  // namespace pbound

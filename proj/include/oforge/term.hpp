// Generic finite terms: atoms at the leaves, labelled constructor nodes above.
// Everything downstream (monad elements, pasting diagrams, free arrows) is a Term
// plus an interpretation, so canonical encoding and ordering live here.
#pragma once
#include <string>
#include <vector>
#include <stdexcept>
#include <algorithm>

namespace oforge {

struct Term {
  bool leaf = true;
  std::string head;         // atom name for leaves, constructor tag for nodes
  std::vector<Term> kids;   // empty for leaves

  static Term atom(std::string a) { return Term{true, std::move(a), {}}; }
  static Term node(std::string tag, std::vector<Term> ks = {}) {
    return Term{false, std::move(tag), std::move(ks)};
  }

  friend bool operator==(const Term& a, const Term& b) {
    return a.leaf == b.leaf && a.head == b.head && a.kids == b.kids;
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
};

// Canonical textual encoding: nodes as tag[k1,k2,...]; leaves verbatim, except
// that leaf atoms containing syntax characters (they are often encodings of
// terms one level down) are brace-quoted so the encoding stays injective.
inline bool atom_needs_quoting(const std::string& a) {
  for (char ch : a)
    if (ch == '[' || ch == ']' || ch == ',' || ch == '{' || ch == '}') return true;
  return false;
}

inline void enc_into(const Term& t, std::string& out) {
  if (t.leaf) {
    if (atom_needs_quoting(t.head)) {
      out += '{';
      out += t.head;
      out += '}';
    } else {
      out += t.head;
    }
    return;
  }
  out += t.head;
  out += '[';
  for (size_t i = 0; i < t.kids.size(); ++i) {
    if (i) out += ',';
    enc_into(t.kids[i], out);
  }
  out += ']';
}

inline std::string enc(const Term& t) {
  std::string s;
  enc_into(t, s);
  return s;
}

namespace detail {
inline Term parse_term(const std::string& s, size_t& i) {
  if (i < s.size() && s[i] == '{') {  // brace-quoted leaf
    int depth = 0;
    size_t start = ++i;
    while (i < s.size()) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}') {
        if (depth == 0) break;
        --depth;
      }
      ++i;
    }
    if (i >= s.size()) throw std::runtime_error("unterminated quoted atom: " + s);
    std::string head = s.substr(start, i - start);
    ++i;  // consume '}'
    return Term::atom(std::move(head));
  }
  size_t start = i;
  int depth = 0;
  // scan the head: stop at '[' (node) or at a top-level ',' / ']' (leaf end)
  while (i < s.size()) {
    char ch = s[i];
    if (depth == 0 && (ch == ',' || ch == ']')) break;
    if (depth == 0 && ch == '[') break;
    if (ch == '(' || ch == '<') ++depth;
    if (ch == ')' || ch == '>') --depth;
    ++i;
  }
  std::string head = s.substr(start, i - start);
  if (i < s.size() && s[i] == '[') {
    ++i;  // consume '['
    std::vector<Term> kids;
    if (i < s.size() && s[i] == ']') {
      ++i;
    } else {
      while (true) {
        kids.push_back(parse_term(s, i));
        if (i >= s.size()) throw std::runtime_error("unterminated term: " + s);
        if (s[i] == ',') { ++i; continue; }
        if (s[i] == ']') { ++i; break; }
        throw std::runtime_error("bad term syntax: " + s);
      }
    }
    return Term::node(std::move(head), std::move(kids));
  }
  return Term::atom(std::move(head));
}
}  // namespace detail

inline Term parse_term(const std::string& s) {
  size_t i = 0;
  Term t = detail::parse_term(s, i);
  if (i != s.size()) throw std::runtime_error("trailing input in term: " + s);
  return t;
}

// Total order used for deterministic enumeration: by node count, then
// structurally (leaf < node, then head, then children lexicographically).
inline int term_weight(const Term& t) {
  int w = 1;
  for (const Term& k : t.kids) w += term_weight(k);
  return w;
}

inline int term_cmp(const Term& a, const Term& b) {
  int wa = term_weight(a), wb = term_weight(b);
  if (wa != wb) return wa < wb ? -1 : 1;
  if (a.leaf != b.leaf) return a.leaf ? -1 : 1;
  if (a.head != b.head) return a.head < b.head ? -1 : 1;
  size_t n = std::min(a.kids.size(), b.kids.size());
  for (size_t i = 0; i < n; ++i)
    if (int c = term_cmp(a.kids[i], b.kids[i])) return c;
  if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
  return 0;
}

inline bool term_less(const Term& a, const Term& b) { return term_cmp(a, b) < 0; }

inline void sort_terms(std::vector<Term>& ts) {
  std::sort(ts.begin(), ts.end(), term_less);
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
}

}  // namespace oforge

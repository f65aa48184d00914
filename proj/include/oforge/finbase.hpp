// Finite sets, total maps, spans, chosen pullbacks, coproducts, slice objects.
// Atoms are ordered opaque strings; the chosen pullback is a pure function of
// its inputs so span composition is reproducible.
#pragma once
#include <map>
#include <set>
#include <string>
#include <vector>
#include <stdexcept>
#include <algorithm>

namespace oforge {

using Atom = std::string;

struct FinSet {
  std::vector<Atom> elements;  // sorted, distinct

  FinSet() = default;
  explicit FinSet(std::vector<Atom> es) : elements(std::move(es)) {
    std::sort(elements.begin(), elements.end());
    auto it = std::unique(elements.begin(), elements.end());
    if (it != elements.end()) throw std::runtime_error("FinSet: duplicate atoms");
  }

  size_t size() const { return elements.size(); }
  bool contains(const Atom& a) const {
    return std::binary_search(elements.begin(), elements.end(), a);
  }
  friend bool operator==(const FinSet& a, const FinSet& b) {
    return a.elements == b.elements;
  }
};

// n atoms named p0..p{n-1} (or with a custom stem)
inline FinSet std_finset(int n, const std::string& stem = "x") {
  std::vector<Atom> es;
  es.reserve(n);
  for (int i = 0; i < n; ++i) es.push_back(stem + std::to_string(i));
  return FinSet(std::move(es));
}

struct FinMap {
  FinSet dom, cod;
  std::map<Atom, Atom> graph;

  FinMap() = default;
  FinMap(FinSet d, FinSet c, std::map<Atom, Atom> g)
      : dom(std::move(d)), cod(std::move(c)), graph(std::move(g)) {
    for (const Atom& a : dom.elements) {
      auto it = graph.find(a);
      if (it == graph.end()) throw std::runtime_error("FinMap: not total at " + a);
      if (!cod.contains(it->second))
        throw std::runtime_error("FinMap: image outside codomain: " + it->second);
    }
    if (graph.size() != dom.size()) throw std::runtime_error("FinMap: extra graph entries");
  }

  const Atom& operator()(const Atom& a) const {
    auto it = graph.find(a);
    if (it == graph.end()) throw std::runtime_error("FinMap: applied outside domain: " + a);
    return it->second;
  }
  friend bool operator==(const FinMap& a, const FinMap& b) {
    return a.dom == b.dom && a.cod == b.cod && a.graph == b.graph;
  }
};

inline FinMap identity_map(const FinSet& X) {
  std::map<Atom, Atom> g;
  for (const Atom& a : X.elements) g[a] = a;
  return FinMap(X, X, std::move(g));
}

inline FinMap compose(const FinMap& g, const FinMap& f) {  // g after f
  if (!(f.cod == g.dom)) throw std::runtime_error("compose: cod/dom mismatch");
  std::map<Atom, Atom> h;
  for (const Atom& a : f.dom.elements) h[a] = g(f(a));
  return FinMap(f.dom, g.cod, std::move(h));
}

struct Span {
  FinSet apex;
  FinMap left, right;  // apex -> L, apex -> R

  Span(FinSet ap, FinMap l, FinMap r)
      : apex(std::move(ap)), left(std::move(l)), right(std::move(r)) {
    if (!(left.dom == apex) || !(right.dom == apex))
      throw std::runtime_error("Span: legs must share the apex as domain");
  }
};

struct SliceObj {
  FinSet total;
  FinMap proj;  // total -> base
  FinSet base;

  SliceObj(FinSet t, FinMap p, FinSet b)
      : total(std::move(t)), proj(std::move(p)), base(std::move(b)) {
    if (!(proj.dom == total) || !(proj.cod == base))
      throw std::runtime_error("SliceObj: projection must be total -> base");
  }
};

inline Atom pair_atom(const Atom& a, const Atom& b) { return "(" + a + "," + b + ")"; }

struct Pullback {
  FinSet apex;
  FinMap pA, pB;
};

// The chosen pullback of f: A -> C against g: B -> C.
inline Pullback pullback(const FinMap& f, const FinMap& g) {
  if (!(f.cod == g.cod)) throw std::runtime_error("pullback: codomain mismatch");
  std::vector<Atom> apex;
  std::map<Atom, Atom> ga, gb;
  for (const Atom& a : f.dom.elements)
    for (const Atom& b : g.dom.elements)
      if (f(a) == g(b)) {
        Atom p = pair_atom(a, b);
        apex.push_back(p);
        ga[p] = a;
        gb[p] = b;
      }
  FinSet ap(std::move(apex));
  return Pullback{ap, FinMap(ap, f.dom, std::move(ga)), FinMap(ap, g.dom, std::move(gb))};
}

// Square: p: P -> A, q: P -> B, f: A -> C, g: B -> C with f.p = g.q.
// True iff the comparison into the chosen pullback of (f, g) is a bijection.
inline bool is_pullback(const FinMap& p, const FinMap& q, const FinMap& f, const FinMap& g) {
  if (!(p.dom == q.dom) || !(f.cod == g.cod) || !(p.cod == f.dom) || !(q.cod == g.dom))
    throw std::runtime_error("is_pullback: maps do not form a square");
  for (const Atom& x : p.dom.elements)
    if (f(p(x)) != g(q(x))) throw std::runtime_error("is_pullback: square does not commute");
  Pullback pb = pullback(f, g);
  std::set<Atom> hit;
  for (const Atom& x : p.dom.elements) {
    Atom img = pair_atom(p(x), q(x));
    if (!hit.insert(img).second) return false;  // comparison not injective
  }
  return hit.size() == pb.apex.size();
}

inline Atom tag_atom(const std::string& tag, const Atom& a) { return tag + ":" + a; }

struct Coproduct {
  FinSet sum;
  FinMap inl, inr;
};

inline Coproduct coproduct(const FinSet& A, const FinSet& B) {
  std::vector<Atom> es;
  std::map<Atom, Atom> il, ir;
  for (const Atom& a : A.elements) {
    Atom t = tag_atom("L", a);
    es.push_back(t);
    il[a] = t;
  }
  for (const Atom& b : B.elements) {
    Atom t = tag_atom("R", b);
    es.push_back(t);
    ir[b] = t;
  }
  FinSet sum(std::move(es));
  return Coproduct{sum, FinMap(A, sum, std::move(il)), FinMap(B, sum, std::move(ir))};
}

}  // namespace oforge

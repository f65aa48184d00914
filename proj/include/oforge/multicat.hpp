// (S,T)-graphs, multicategories, maps, discrete opfibrations, and both
// notions of algebra (opfibration-style and slice-monad-style), generic over a
// Monad instance. Composition configurations are Terms over the arrow set
// whose c-image matches the outer arrow's domain.
#pragma once
#include "monadkit.hpp"

#include <optional>

namespace oforge {

inline void collect_leaves_mut(Term& t, std::vector<Term*>& out) {
  if (t.leaf) {
    out.push_back(&t);
    return;
  }
  for (Term& k : t.kids) collect_leaves_mut(k, out);
}

// Replace the i-th leaf of t by repl[i] (a whole subterm).
inline Term replace_leaf_subterms(const Term& t, const std::vector<Term>& repl) {
  Term r = t;
  std::vector<Term*> ls;
  collect_leaves_mut(r, ls);
  if (ls.size() != repl.size()) throw std::runtime_error("replace_leaf_subterms: arity mismatch");
  for (size_t i = 0; i < ls.size(); ++i) *ls[i] = repl[i];
  return r;
}

// "(left,right)" with balanced-delimiter splitting; inverse of pair_atom.
inline std::pair<std::string, std::string> split_pair(const Atom& p) {
  if (p.size() < 3 || p.front() != '(' || p.back() != ')')
    throw std::runtime_error("split_pair: not a pair atom: " + p);
  int depth = 0;
  for (size_t i = 1; i + 1 < p.size(); ++i) {
    char ch = p[i];
    if (ch == '(' || ch == '[' || ch == '{') ++depth;
    if (ch == ')' || ch == ']' || ch == '}') --depth;
    if (ch == ',' && depth == 0)
      return {p.substr(1, i - 1), p.substr(i + 1, p.size() - i - 2)};
  }
  throw std::runtime_error("split_pair: no top-level comma: " + p);
}

struct MGraph {
  const Monad* T = nullptr;
  FinSet C0, C1;
  std::map<Atom, Term> d;  // arrow -> element of T C0
  std::map<Atom, Atom> c;  // arrow -> object

  const Term& dom(const Atom& a) const {
    auto it = d.find(a);
    if (it == d.end()) throw std::runtime_error("MGraph: no domain for " + a);
    return it->second;
  }
  const Atom& cod(const Atom& a) const {
    auto it = c.find(a);
    if (it == c.end()) throw std::runtime_error("MGraph: no codomain for " + a);
    return it->second;
  }
  FinMap c_map() const {
    std::map<Atom, Atom> g;
    for (const Atom& a : C1.elements) g[a] = cod(a);
    return FinMap(C1, C0, std::move(g));
  }
  void validate() const {
    for (const Atom& a : C1.elements) {
      for (const Atom& x : leaf_atoms(dom(a)))
        if (!C0.contains(x)) throw std::runtime_error("MGraph: domain leaf outside C0: " + x);
      if (!C0.contains(cod(a))) throw std::runtime_error("MGraph: codomain outside C0");
    }
  }
};

struct Multicat {
  MGraph g;
  std::map<Atom, Atom> ids;                          // object -> arrow
  std::map<std::pair<Atom, std::string>, Atom> comp;  // (outer, enc config) -> arrow

  const Monad& T() const { return *g.T; }

  std::optional<Atom> compose(const Atom& outer, const Term& config) const {
    auto it = comp.find({outer, enc(config)});
    if (it == comp.end()) return std::nullopt;
    return it->second;
  }
};

// All configurations composable under `outer`: elements kappa of T C1 with
// (T c)(kappa) = d(outer).
inline std::vector<Term> configs_for(const Multicat& M, const Atom& outer) {
  return tf_fiber(M.T(), M.g.c_map(), M.g.dom(outer));
}

inline bool config_matches(const Multicat& M, const Atom& outer, const Term& config) {
  return M.T().map(M.g.c_map(), config) == M.g.dom(outer);
}

// The composite's boundary: domain mult(T d (config)), codomain c(outer).
inline Term composite_domain(const Multicat& M, const Term& config) {
  Term td = M.T().map_with([&](const Atom& a) { return enc(M.g.dom(a)); }, config);
  return M.T().mult(td);
}

inline Atom compose_cells(const Multicat& M, const Atom& outer, const Term& config) {
  if (!config_matches(M, outer, config))
    throw std::runtime_error("compose_cells: configuration does not match d(outer)");
  auto r = M.compose(outer, config);
  if (!r) throw std::runtime_error("compose_cells: composite not represented in fragment");
  return *r;
}

// Exhaustive law check. Fragments may have a partial comp table; laws are
// verified wherever all participating composites are represented, and every
// represented entry is checked for well-formedness.
inline CheckReport check_multicategory(const Multicat& M) {
  CheckReport rep;
  const Monad& T = M.T();
  M.g.validate();

  for (const Atom& s : M.g.C0.elements) {
    auto it = M.ids.find(s);
    if (it == M.ids.end()) {
      rep.fail("no identity on object " + s);
      continue;
    }
    if (M.g.dom(it->second) != T.unit(s)) rep.fail("d(id) != unit at " + s);
    if (M.g.cod(it->second) != s) rep.fail("c(id) != object at " + s);
  }

  for (const auto& [key, r] : M.comp) {
    const auto& [outer, cfg_enc] = key;
    Term config = parse_term(cfg_enc);
    if (!config_matches(M, outer, config)) {
      rep.fail("comp entry with invalid configuration at " + outer + " / " + cfg_enc);
      continue;
    }
    if (M.g.dom(r) != composite_domain(M, config))
      rep.fail("composite domain mismatch at " + outer + " / " + cfg_enc);
    if (M.g.cod(r) != M.g.cod(outer))
      rep.fail("composite codomain mismatch at " + outer + " / " + cfg_enc);
  }

  // unit laws
  for (const Atom& a : M.g.C1.elements) {
    auto idc = M.ids.find(M.g.cod(a));
    if (idc != M.ids.end()) {
      auto r = M.compose(idc->second, T.unit(a));
      if (r && *r != a) rep.fail("left unit law fails at " + a);
    }
    bool ids_total = true;
    Term id_config = T.map_with(
        [&](const Atom& s) {
          auto it = M.ids.find(s);
          if (it == M.ids.end()) {
            ids_total = false;
            return s;
          }
          return it->second;
        },
        M.g.dom(a));
    if (ids_total) {
      auto r = M.compose(a, id_config);
      if (r && *r != a) rep.fail("right unit law fails at " + a);
    }
  }

  // associativity over all defined double composites
  for (const auto& [key, ar] : M.comp) {
    const auto& [outer, cfg_enc] = key;
    Term config = parse_term(cfg_enc);
    if (!config_matches(M, outer, config)) continue;
    std::vector<Atom> inner = leaf_atoms(config);
    // choose a configuration for every inner arrow
    std::vector<std::vector<Term>> choices;
    for (const Atom& ai : inner) choices.push_back(configs_for(M, ai));
    bool any_empty = false;
    for (const auto& cs : choices) any_empty |= cs.empty();
    // nothing to substitute (or some inner arrow has no configuration): trivial
    if (inner.empty() || any_empty) continue;
    std::vector<size_t> idx(inner.size(), 0);
    bool done = false;
    while (!done) {
      std::vector<Term> picked;
      for (size_t i = 0; i < inner.size(); ++i) picked.push_back(choices[i][idx[i]]);
      // lambda = mult(config with leaf i replaced by enc(picked_i))
      size_t j = 0;
      Term nested = T.map_with([&](const Atom&) { return enc(picked[j++]); }, config);
      Term lambda = T.mult(nested);
      // kappa' = config with leaf i replaced by the composite arrow
      bool all_defined = true;
      std::vector<Atom> comps;
      for (size_t i = 0; i < inner.size(); ++i) {
        auto r = M.compose(inner[i], picked[i]);
        if (!r) {
          all_defined = false;
          break;
        }
        comps.push_back(*r);
      }
      if (all_defined) {
        size_t k = 0;
        Term kprime = T.map_with([&](const Atom&) { return comps[k++]; }, config);
        auto lhs = M.compose(ar, lambda);
        auto rhs = M.compose(outer, kprime);
        if (lhs && rhs && *lhs != *rhs)
          rep.fail("associativity fails at outer " + outer + " config " + cfg_enc);
      }
      // advance
      size_t i = 0;
      for (; i < idx.size(); ++i) {
        if (++idx[i] < choices[i].size()) break;
        idx[i] = 0;
      }
      done = (i == idx.size());
    }
  }
  return rep;
}

// One object, one arrow per element of T 1 of size <= arity_bound;
// composition given by mult wherever the result stays within the fragment.
inline Multicat terminal_multicategory(const Monad& T, int arity_bound) {
  Multicat M;
  M.g.T = &T;
  M.g.C0 = FinSet({"*"});
  std::vector<Term> elems = T.enumerate(M.g.C0, arity_bound);
  std::vector<Atom> cells;
  for (const Term& e : elems) {
    Atom a = enc(e);
    cells.push_back(a);
    M.g.d[a] = e;
    M.g.c[a] = "*";
  }
  M.g.C1 = FinSet(cells);
  M.ids["*"] = enc(T.unit("*"));
  for (const Atom& a : M.g.C1.elements)
    for (const Term& config : configs_for(M, a)) {
      Term dd = composite_domain(M, config);
      Atom r = enc(dd);
      if (M.g.C1.contains(r)) M.comp[{a, enc(config)}] = r;
    }
  return M;
}

struct MultiMap {
  FinMap f0, f1;  // C0 -> C0', C1 -> C1'
};

inline CheckReport check_multimap(const Multicat& D, const Multicat& C, const MultiMap& f) {
  CheckReport rep;
  const Monad& T = D.T();
  for (const Atom& a : D.g.C1.elements) {
    if (C.g.dom(f.f1(a)) != T.map(f.f0, D.g.dom(a))) rep.fail("d-square fails at " + a);
    if (C.g.cod(f.f1(a)) != f.f0(D.g.cod(a))) rep.fail("c-square fails at " + a);
  }
  for (const auto& [s, i] : D.ids)
    if (C.ids.count(f.f0(s)) && C.ids.at(f.f0(s)) != f.f1(i)) rep.fail("ids not preserved at " + s);
  for (const auto& [key, r] : D.comp) {
    Term config = parse_term(key.second);
    Term mapped = T.map(f.f1, config);
    auto rr = C.compose(f.f1(key.first), mapped);
    if (rr && *rr != f.f1(r)) rep.fail("comp not preserved at " + key.first);
  }
  return rep;
}

// The d-square of f is a pullback iff every arrow downstairs with a lift of
// its domain has exactly one arrow lift.
inline bool is_discrete_opfibration(const Multicat& D, const Multicat& C, const MultiMap& f) {
  const Monad& T = D.T();
  for (const Atom& a : C.g.C1.elements) {
    for (const Term& delta : tf_fiber(T, f.f0, C.g.dom(a))) {
      int lifts = 0;
      for (const Atom& b : D.g.C1.elements)
        if (f.f1(b) == a && D.g.dom(b) == delta) ++lifts;
      if (lifts != 1) return false;
    }
  }
  return true;
}

// --- the slice ("blob") monad on Set/C0 -------------------------------------

// X_bullet: pairs (xi, a) with a an arrow and xi a T-labelling of X over d(a).
inline SliceObj blob_apply(const Multicat& M, const SliceObj& X) {
  if (!(X.base == M.g.C0)) throw std::runtime_error("blob_apply: carrier base mismatch");
  const Monad& T = M.T();
  std::vector<Atom> total;
  std::map<Atom, Atom> proj;
  for (const Atom& a : M.g.C1.elements)
    for (const Term& xi : tf_fiber(T, X.proj, M.g.dom(a))) {
      Atom p = pair_atom(enc(xi), a);
      total.push_back(p);
      proj[p] = M.g.cod(a);
    }
  FinSet tot(std::move(total));
  return SliceObj(tot, FinMap(tot, M.g.C0, std::move(proj)), M.g.C0);
}

inline Atom blob_unit(const Multicat& M, const SliceObj& X, const Atom& x) {
  return pair_atom(enc(M.T().unit(x)), M.ids.at(X.proj(x)));
}

// mu on an element of blob(blob(X)); nullopt when the needed composite is not
// in the fragment.
inline std::optional<Atom> blob_mult(const Multicat& M, const SliceObj& /*X*/, const Atom& bb) {
  const Monad& T = M.T();
  auto [xi_enc, a] = split_pair(bb);
  Term Xi = parse_term(xi_enc);  // leaves are pair atoms (enc xi_i, a_i)
  Term kappa = T.map_with([&](const Atom& leaf) { return split_pair(leaf).second; }, Xi);
  auto r = M.compose(a, kappa);
  if (!r) return std::nullopt;
  Term nested = T.map_with([&](const Atom& leaf) { return split_pair(leaf).first; }, Xi);
  return pair_atom(enc(T.mult(nested)), *r);
}

inline CheckReport check_blob_monad(const Multicat& M, const SliceObj& X, int depth) {
  CheckReport rep;
  const Monad& T = M.T();
  SliceObj BX = blob_apply(M, X);
  SliceObj BBX = blob_apply(M, BX);
  // unit laws on blob(X)
  for (const Atom& y : BX.total.elements) {
    auto [xi_enc, a] = split_pair(y);
    // eta at blob(X): (unit(y), ids(proj y))
    Atom etay = pair_atom(enc(T.unit(y)), M.ids.at(BX.proj(y)));
    auto r = blob_mult(M, X, etay);
    if (r && *r != y) rep.fail("blob left unit fails at " + y);
    // blob(eta): relabel xi's leaves by blob_unit
    Term xi = parse_term(xi_enc);
    Term lifted = T.map_with([&](const Atom& x) { return blob_unit(M, X, x); }, xi);
    Atom be = pair_atom(enc(lifted), a);
    auto r2 = blob_mult(M, X, be);
    if (r2 && *r2 != y) rep.fail("blob right unit fails at " + y);
  }
  if (depth >= 2) {
    SliceObj BBBX = blob_apply(M, BBX);
    for (const Atom& z : BBBX.total.elements) {
      auto [Xi_enc, a] = split_pair(z);
      auto lhs_mid = blob_mult(M, BX, z);  // mu at the outer level
      std::optional<Atom> lhs;
      if (lhs_mid) lhs = blob_mult(M, X, *lhs_mid);
      // blob(mu): apply mu to every leaf of Xi
      Term Xi = parse_term(Xi_enc);
      bool all = true;
      Term mapped = T.map_with(
          [&](const Atom& leaf) {
            auto r = blob_mult(M, X, leaf);
            if (!r) {
              all = false;
              return leaf;
            }
            return *r;
          },
          Xi);
      std::optional<Atom> rhs;
      if (all) rhs = blob_mult(M, X, pair_atom(enc(mapped), a));
      if (lhs && rhs && *lhs != *rhs) rep.fail("blob associativity fails at " + z);
    }
  }
  return rep;
}

// --- algebras ---------------------------------------------------------------

struct AlgebraStr {
  SliceObj carrier;
  FinMap h;  // blob_apply(M, carrier).total -> carrier.total
};

inline CheckReport check_algebra(const Multicat& M, const AlgebraStr& alg) {
  CheckReport rep;
  const Monad& T = M.T();
  SliceObj BX = blob_apply(M, alg.carrier);
  if (!(alg.h.dom == BX.total) || !(alg.h.cod == alg.carrier.total)) {
    rep.fail("structure map has the wrong boundary");
    return rep;
  }
  for (const Atom& y : BX.total.elements)
    if (alg.carrier.proj(alg.h(y)) != BX.proj(y))
      rep.fail("structure map does not respect the projection at " + y);
  for (const Atom& x : alg.carrier.total.elements)
    if (alg.h(blob_unit(M, alg.carrier, x)) != x) rep.fail("algebra unit law fails at " + x);
  SliceObj BBX = blob_apply(M, BX);
  for (const Atom& bb : BBX.total.elements) {
    auto mu = blob_mult(M, alg.carrier, bb);
    auto [Xi_enc, a] = split_pair(bb);
    Term Xi = parse_term(Xi_enc);
    Term mapped = T.map_with([&](const Atom& leaf) { return alg.h(leaf); }, Xi);
    Atom via_h = alg.h(pair_atom(enc(mapped), a));
    if (mu && alg.h(*mu) != via_h) rep.fail("algebra multiplication law fails at " + bb);
  }
  return rep;
}

struct Opfibration {
  Multicat D;
  MultiMap f;  // D -> C
};

// Grothendieck-style construction: arrows upstairs are blob elements, with
// codomain given by the structure map.
inline Opfibration algebra_to_opfibration(const Multicat& C, const AlgebraStr& alg) {
  CheckReport ok = check_algebra(C, alg);
  if (!ok.ok()) throw std::runtime_error("algebra_to_opfibration: invalid algebra: " + ok.failures[0]);
  const Monad& T = C.T();
  SliceObj BX = blob_apply(C, alg.carrier);
  Opfibration O;
  O.D.g.T = C.g.T;
  O.D.g.C0 = alg.carrier.total;
  O.D.g.C1 = BX.total;
  for (const Atom& y : BX.total.elements) {
    auto [xi_enc, a] = split_pair(y);
    O.D.g.d[y] = parse_term(xi_enc);
    O.D.g.c[y] = alg.h(y);
  }
  for (const Atom& x : alg.carrier.total.elements)
    O.D.ids[x] = blob_unit(C, alg.carrier, x);
  // composition: graft blob elements, when C's composite exists
  for (const Atom& y : BX.total.elements) {
    auto [xi_enc, a] = split_pair(y);
    for (const Term& config : tf_fiber(T, O.D.g.c_map(), O.D.g.dom(y))) {
      // config's leaves are D-arrows (pairs); assemble the blob^2 element
      Atom bb = pair_atom(enc(config), a);
      auto r = blob_mult(C, alg.carrier, bb);
      if (r && BX.total.contains(*r)) O.D.comp[{y, enc(config)}] = *r;
    }
  }
  std::map<Atom, Atom> g0, g1;
  for (const Atom& x : alg.carrier.total.elements) g0[x] = alg.carrier.proj(x);
  for (const Atom& y : BX.total.elements) g1[y] = split_pair(y).second;
  O.f.f0 = FinMap(O.D.g.C0, C.g.C0, std::move(g0));
  O.f.f1 = FinMap(O.D.g.C1, C.g.C1, std::move(g1));
  return O;
}

inline AlgebraStr opfibration_to_algebra(const Multicat& C, const Multicat& D, const MultiMap& f) {
  if (!is_discrete_opfibration(D, C, f))
    throw std::runtime_error("opfibration_to_algebra: not a discrete opfibration");
  SliceObj carrier(D.g.C0, f.f0, C.g.C0);
  SliceObj BX = blob_apply(C, carrier);
  std::map<Atom, Atom> hg;
  for (const Atom& y : BX.total.elements) {
    auto [xi_enc, a] = split_pair(y);
    Term xi = parse_term(xi_enc);
    // the unique lift of (xi, a)
    std::optional<Atom> lift;
    for (const Atom& b : D.g.C1.elements)
      if (f.f1(b) == a && D.g.dom(b) == xi) {
        lift = b;
        break;
      }
    if (!lift) throw std::runtime_error("opfibration_to_algebra: missing lift at " + y);
    hg[y] = D.g.cod(*lift);
  }
  return AlgebraStr{carrier, FinMap(BX.total, carrier.total, std::move(hg))};
}

// Pull an algebra back along a multicategory map g: C -> C'.
inline AlgebraStr restrict_algebra(const Multicat& C, const Multicat& Cp, const MultiMap& g,
                                   const AlgebraStr& alg) {
  const Monad& T = C.T();
  // carrier: pullback of alg.carrier.proj along g0
  Pullback pb = pullback(g.f0, alg.carrier.proj);  // pairs (s, x)
  SliceObj carrier(pb.apex, pb.pA, C.g.C0);
  SliceObj BX = blob_apply(C, carrier);
  std::map<Atom, Atom> hg;
  for (const Atom& y : BX.total.elements) {
    auto [xi_enc, a] = split_pair(y);
    Term xi = parse_term(xi_enc);  // leaves are pair atoms (s, x)
    Term xi_x = T.map_with([&](const Atom& leaf) { return pb.pB(leaf); }, xi);
    Atom up = alg.h(pair_atom(enc(xi_x), g.f1(a)));
    hg[y] = pair_atom(C.g.cod(a), up);
  }
  return AlgebraStr{carrier, FinMap(BX.total, carrier.total, std::move(hg))};
}

}  // namespace oforge

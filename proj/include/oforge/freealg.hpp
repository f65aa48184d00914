#pragma once
#include <oforge/multicat.hpp>

#include <functional>
#include <optional>

namespace oforge {

// ---------------------------------------------------------------------------
// Free multicategories on graphs.
//
// Arrows of the free multicategory on a graph G are well-founded terms:
//   id[s]            the identity at object s (domain = unit s)
//   ap[g,{cfg}]      a generator g applied to a configuration cfg in T(arrows)
//                    whose pointwise domains multiply to the domain of g's slot
// Nested grafting is flattened at construction, so structural term equality is
// arrow equality. Size = number of generator applications (identities cost 0).
// ---------------------------------------------------------------------------

inline Term fa_id(const Atom& s) { return Term::node("id", {Term::atom(s)}); }

inline Term fa_app(const Atom& g, const Term& config) {
  return Term::node("ap", {Term::atom(g), Term::atom(enc(config))});
}

inline bool fa_is_id(const Term& fa) { return !fa.leaf && fa.head == "id"; }

inline Term fa_config(const Term& fa) { return parse_term(fa.kids[1].head); }

inline int fa_size(const Term& fa) {
  if (fa_is_id(fa)) return 0;
  int n = 1;
  for (const Atom& a : leaf_atoms(fa_config(fa))) n += fa_size(parse_term(a));
  return n;
}

inline int fa_depth(const Term& fa) {
  if (fa_is_id(fa)) return 0;
  int d = 0;
  for (const Atom& a : leaf_atoms(fa_config(fa))) d = std::max(d, fa_depth(parse_term(a)));
  return d + 1;
}

inline Atom fa_cod(const MGraph& G, const Term& fa) {
  return fa_is_id(fa) ? fa.kids[0].head : G.cod(fa.kids[0].head);
}

inline Term fa_dom(const MGraph& G, const Term& fa) {
  if (fa_is_id(fa)) return G.T->unit(fa.kids[0].head);
  Term td = G.T->map_with(
      [&](const Atom& a) { return enc(fa_dom(G, parse_term(a))); }, fa_config(fa));
  return G.T->mult(td);
}

// The generator g seen as an arrow: g applied to identities at its domain.
inline Term fa_gen(const MGraph& G, const Atom& g) {
  Term cfg = G.T->map_with([&](const Atom& s) { return enc(fa_id(s)); }, G.dom(g));
  return fa_app(g, cfg);
}

// Grafting: plug a configuration kappa in T(arrows), whose codomains multiply
// to dom(f), into f. Total; the result may be larger than any ambient bound.
inline Term fa_graft(const MGraph& G, const Term& f, const Term& kappa) {
  if (fa_is_id(f)) {
    // dom(f) = unit, so kappa is unit-shaped over a single arrow
    auto leaves = leaf_atoms(kappa);
    if (leaves.size() != 1) throw std::runtime_error("fa_graft: identity expects one arrow");
    return parse_term(leaves[0]);
  }
  Term cfg = fa_config(f);
  std::vector<Atom> inner = leaf_atoms(cfg);
  Term outer = G.T->map_with(
      [&](const Atom& a) { return enc(fa_dom(G, parse_term(a))); }, cfg);
  std::vector<Term> shapes;
  shapes.reserve(inner.size());
  for (const Atom& a : inner) shapes.push_back(fa_dom(G, parse_term(a)));
  std::vector<Term> pieces = G.T->split(kappa, outer, shapes);
  size_t j = 0;
  Term cfg2 = G.T->map_with(
      [&](const Atom& a) { return enc(fa_graft(G, parse_term(a), pieces[j++])); }, cfg);
  return fa_app(f.kids[0].head, cfg2);
}

// n rounds of A_{k+1} = identities + generators-over-A_k, truncated to `bound`.
namespace detail {
// configurations over `shape` with components drawn from `fib` (keyed by
// codomain object) whose sizes sum to at most `budget`
inline void budget_configs(const Monad& T, const Term& shape,
                           const std::map<Atom, std::vector<Atom>>& fib,
                           const std::map<Atom, int>& size_of, int budget,
                           const std::function<void(const Term&)>& emit) {
  std::vector<Atom> labels = leaf_atoms(shape);
  std::vector<Atom> choice(labels.size());
  std::function<void(size_t, int)> go = [&](size_t i, int left) {
    if (i == labels.size()) {
      size_t j = 0;
      emit(T.map_with([&](const Atom&) { return choice[j++]; }, shape));
      return;
    }
    auto it = fib.find(labels[i]);
    if (it == fib.end()) return;
    for (const Atom& cand : it->second) {
      int s = size_of.at(cand);
      if (s > left) continue;
      choice[i] = cand;
      go(i + 1, left - s);
    }
  };
  if (budget >= 0) go(0, budget);
}
}  // namespace detail

inline std::vector<Term> free_arrows_stage(const MGraph& G, int bound, int stages) {
  std::vector<Term> cur;
  for (const Atom& s : G.C0.elements) cur.push_back(fa_id(s));
  sort_terms(cur);
  for (int n = 0; n < stages; ++n) {
    std::map<Atom, std::vector<Atom>> fib;
    std::map<Atom, int> size_of;
    for (const Term& fa : cur) {
      Atom a = enc(fa);
      fib[fa_cod(G, fa)].push_back(a);
      size_of[a] = fa_size(fa);
    }
    std::vector<Term> next = cur;
    for (const Atom& g : G.C1.elements)
      detail::budget_configs(*G.T, G.dom(g), fib, size_of, bound - 1,
                             [&](const Term& cfg) { next.push_back(fa_app(g, cfg)); });
    sort_terms(next);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

// All arrows of size <= bound: the stage iteration stabilizes by stage `bound`
// since each application layer uses at least one generator.
inline std::vector<Term> free_arrows(const MGraph& G, int bound) {
  return free_arrows_stage(G, bound, bound + 1);
}

// The bounded fragment as a Multicat: composition entries are recorded when
// the composite stays within the fragment; fa_graft gives the rest.
inline Multicat free_multicategory(const MGraph& G, int bound) {
  G.validate();
  Multicat M;
  M.g.T = G.T;
  M.g.C0 = G.C0;
  std::vector<Term> arrows = free_arrows(G, bound);
  for (const Term& fa : arrows) {
    Atom a = enc(fa);
    M.g.C1.elements.push_back(a);
    M.g.d[a] = fa_dom(G, fa);
    M.g.c[a] = fa_cod(G, fa);
  }
  std::sort(M.g.C1.elements.begin(), M.g.C1.elements.end());
  for (const Atom& s : G.C0.elements) M.ids[s] = enc(fa_id(s));
  std::map<Atom, std::vector<Atom>> fib;
  std::map<Atom, int> size_of;
  for (const Atom& a : M.g.C1.elements) {
    fib[M.g.c.at(a)].push_back(a);
    size_of[a] = fa_size(parse_term(a));
  }
  for (const Atom& a : M.g.C1.elements) {
    Term outer = parse_term(a);
    detail::budget_configs(*G.T, M.g.d.at(a), fib, size_of, bound - fa_size(outer),
                           [&](const Term& cfg) {
                             Term composite = fa_graft(G, outer, cfg);
                             M.comp[{a, enc(cfg)}] = enc(composite);
                           });
  }
  return M;
}

// The canonical extension of a graph map (f0, f1): G -> M along the unit; may
// be undefined when M's composition table lacks a needed entry.
inline std::optional<Atom> extend_graph_map(const MGraph& G, const Multicat& M,
                                            const FinMap& f0, const FinMap& f1,
                                            const Term& fa) {
  if (fa_is_id(fa)) {
    auto it = M.ids.find(f0(fa.kids[0].head));
    if (it == M.ids.end()) return std::nullopt;
    return it->second;
  }
  bool ok = true;
  Term cfg = M.T().map_with(
      [&](const Atom& a) -> Atom {
        auto r = extend_graph_map(G, M, f0, f1, parse_term(a));
        if (!r) {
          ok = false;
          return a;
        }
        return *r;
      },
      fa_config(fa));
  if (!ok) return std::nullopt;
  return M.compose(f1(fa.kids[0].head), cfg);
}

// ---------------------------------------------------------------------------
// Structured categories: a category object in the algebras of the ambient
// monad, held as a bounded fragment. Objects and arrows are finite sets; the
// algebra structure maps are partial functions on encoded T-elements over
// them (the unit case tensor(unit x) = x is always defined).
// ---------------------------------------------------------------------------

struct StructCat {
  const Monad* Tm = nullptr;
  FinSet obj, arr;
  std::map<Atom, Atom> dom_, cod_;
  std::map<Atom, Atom> id_;                        // object -> identity arrow
  std::map<std::pair<Atom, Atom>, Atom> comp_;     // (g, f), dom g = cod f
  std::function<std::optional<Atom>(const Term&)> obj_tensor_, arr_tensor_;
  AtomCost obj_cost = [](const Atom&) { return 1; };

  const Monad& T() const {
    if (!Tm) throw std::runtime_error("StructCat: no monad instance");
    return *Tm;
  }
  const Atom& dom(const Atom& f) const { return dom_.at(f); }
  const Atom& cod(const Atom& f) const { return cod_.at(f); }
  std::optional<Atom> compose(const Atom& g, const Atom& f) const {
    auto it = comp_.find({g, f});
    if (it == comp_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Atom> tensor_obj(const Term& w) const {
    if (w.leaf && obj.contains(w.head)) return w.head;  // unit law, always defined
    return obj_tensor_ ? obj_tensor_(w) : std::nullopt;
  }
  std::optional<Atom> tensor_arr(const Term& w) const {
    if (w.leaf && arr.contains(w.head)) return w.head;
    return arr_tensor_ ? arr_tensor_(w) : std::nullopt;
  }
};

// Category and algebra-coherence laws on the recorded fragment.
inline CheckReport check_structcat(const StructCat& D, int bound = 3) {
  CheckReport rep;
  const Monad& T = D.T();
  for (const auto& [s, i] : D.id_) {
    if (D.dom(i) != s || D.cod(i) != s) rep.fail("identity boundary at " + s);
    for (const Atom& f : D.arr.elements) {
      if (D.cod(f) == s) {
        auto r = D.compose(i, f);
        if (r && *r != f) rep.fail("left unit at " + f);
      }
      if (D.dom(f) == s) {
        auto r = D.compose(f, i);
        if (r && *r != f) rep.fail("right unit at " + f);
      }
    }
  }
  for (const auto& [gf, c1] : D.comp_) {
    if (D.dom(gf.first) != D.cod(gf.second)) rep.fail("ill-matched composite recorded");
    if (D.dom(c1) != D.dom(gf.second) || D.cod(c1) != D.cod(gf.first))
      rep.fail("composite boundary at (" + gf.first + "," + gf.second + ")");
    for (const Atom& e : D.arr.elements) {
      if (D.cod(e) != D.dom(gf.second)) continue;
      auto inner = D.compose(gf.second, e);
      if (!inner) continue;
      auto lhs = D.compose(c1, e), rhs = D.compose(gf.first, *inner);
      if (lhs && rhs && *lhs != *rhs)
        rep.fail("associativity at (" + gf.first + "," + gf.second + "," + e + ")");
    }
  }
  // tensors respect boundaries, identities, and (pointwise) composition
  for (const Term& w : T.enumerate(D.arr, bound,
                                   [&](const Atom& f) { return std::max(1, D.obj_cost(D.dom(f))); })) {
    auto tw = D.tensor_arr(w);
    if (!tw) continue;
    auto td = D.tensor_obj(T.map_with([&](const Atom& f) { return D.dom(f); }, w));
    auto tc = D.tensor_obj(T.map_with([&](const Atom& f) { return D.cod(f); }, w));
    if (td && D.dom(*tw) != *td) rep.fail("tensor domain at " + enc(w));
    if (tc && D.cod(*tw) != *tc) rep.fail("tensor codomain at " + enc(w));
  }
  for (const Term& w : T.enumerate(D.obj, bound, D.obj_cost)) {
    auto to = D.tensor_obj(w);
    if (!to) continue;
    bool have_ids = true;
    for (const Atom& s : leaf_atoms(w)) have_ids &= D.id_.count(s) > 0;
    if (!have_ids) continue;
    auto ti = D.tensor_arr(T.map_with([&](const Atom& s) { return D.id_.at(s); }, w));
    if (ti && D.id_.count(*to) && *ti != D.id_.at(*to))
      rep.fail("tensor of identities at " + enc(w));
  }
  return rep;
}

// Free structured category on a multicategory: objects are T-elements over
// C0, arrows are T-elements over C1 with pointwise boundaries, tensor = mult.
inline StructCat free_structured(const Multicat& C, int bound) {
  const Monad& T = C.T();
  StructCat D;
  D.Tm = C.g.T;
  const Monad* Tp = C.g.T;
  D.obj_cost = [Tp](const Atom& s) { return std::max(1, Tp->size(parse_term(s))); };
  for (const Term& w : T.enumerate(C.g.C0, bound)) D.obj.elements.push_back(enc(w));
  std::sort(D.obj.elements.begin(), D.obj.elements.end());

  std::vector<Term> kept;
  for (const Term& k : T.enumerate(C.g.C1, bound)) {
    Term td = T.map_with([&](const Atom& a) { return enc(C.g.dom(a)); }, k);
    Term dom = T.mult(td);
    Term cod = T.map(C.g.c_map(), k);
    Atom de = enc(dom), ce = enc(cod), ke = enc(k);
    if (!D.obj.contains(de)) continue;  // domain falls outside the object fragment
    D.arr.elements.push_back(ke);
    D.dom_[ke] = de;
    D.cod_[ke] = ce;
    kept.push_back(k);
  }
  std::sort(D.arr.elements.begin(), D.arr.elements.end());

  for (const Atom& oe : D.obj.elements) {
    Term w = parse_term(oe);
    Term idk = T.map_with([&](const Atom& s) { return C.ids.at(s); }, w);
    if (D.arr.contains(enc(idk))) D.id_[oe] = enc(idk);
  }

  // composite of k2 after k1: carve k1 along the domains of k2's cells and
  // compose pointwise in C
  for (const Term& k2 : kept) {
    Atom k2e = enc(k2);
    std::vector<Atom> cells = leaf_atoms(k2);
    Term outer = T.map_with([&](const Atom& a) { return enc(C.g.dom(a)); }, k2);
    std::vector<Term> shapes;
    for (const Atom& a : cells) shapes.push_back(C.g.dom(a));
    for (const Term& k1 : kept) {
      Atom k1e = enc(k1);
      if (D.cod_.at(k1e) != D.dom_.at(k2e)) continue;
      std::vector<Term> pieces = T.split(k1, outer, shapes);
      bool ok = true;
      size_t j = 0;
      Term comp = T.map_with(
          [&](const Atom& a) -> Atom {
            auto r = C.compose(a, pieces[j++]);
            if (!r) ok = false;
            return r ? *r : a;
          },
          k2);
      if (ok && D.arr.contains(enc(comp))) D.comp_[{k2e, k1e}] = enc(comp);
    }
  }

  FinSet objs = D.obj, arrs = D.arr;
  D.obj_tensor_ = [Tp, objs](const Term& w) -> std::optional<Atom> {
    Atom r = enc(Tp->mult(w));
    if (objs.contains(r)) return r;
    return std::nullopt;
  };
  D.arr_tensor_ = [Tp, arrs](const Term& w) -> std::optional<Atom> {
    Atom r = enc(Tp->mult(w));
    if (arrs.contains(r)) return r;
    return std::nullopt;
  };
  return D;
}

// Underlying multicategory of a structured category: a cell <s1..sn> -> s is
// an arrow tensor<s1..sn> -> s, carried as the pair (labelling, arrow).
inline Multicat forget_structured(const StructCat& D, int bound = 4) {
  const Monad& T = D.T();
  Multicat M;
  M.g.T = D.Tm;
  M.g.C0 = D.obj;
  std::vector<Term> labellings = T.enumerate(D.obj, bound, D.obj_cost);
  for (const Term& w : labellings) {
    auto tw = D.tensor_obj(w);
    if (!tw) continue;
    for (const Atom& f : D.arr.elements) {
      if (D.dom(f) != *tw) continue;
      Atom cell = pair_atom(enc(w), f);
      M.g.C1.elements.push_back(cell);
      M.g.d[cell] = w;
      M.g.c[cell] = D.cod(f);
    }
  }
  std::sort(M.g.C1.elements.begin(), M.g.C1.elements.end());
  for (const Atom& s : D.obj.elements) {
    auto it = D.id_.find(s);
    if (it == D.id_.end()) continue;
    Atom cell = pair_atom(enc(T.unit(s)), it->second);
    if (M.g.C1.contains(cell)) M.ids[s] = cell;
  }
  for (const Atom& outer : M.g.C1.elements) {
    auto [we, f] = split_pair(outer);
    for (const Term& cfg : configs_for(M, outer)) {
      // new labelling: substitute each cell's labelling for its object slot
      Term nested = T.map_with(
          [&](const Atom& cell) { return split_pair(cell).first; }, cfg);
      Term w2 = T.mult(nested);
      auto tw2 = D.tensor_obj(w2);
      if (!tw2) continue;
      // arrow part: tensor the constituent arrows, then compose with f
      Term arrs = T.map_with([&](const Atom& cell) { return split_pair(cell).second; }, cfg);
      auto phi = D.tensor_arr(arrs);
      if (!phi || D.dom(*phi) != *tw2) continue;
      auto comp = D.compose(f, *phi);
      if (!comp) continue;
      Atom cell = pair_atom(enc(w2), *comp);
      if (M.g.C1.contains(cell)) M.comp[{outer, enc(cfg)}] = cell;
    }
  }
  return M;
}

}  // namespace oforge

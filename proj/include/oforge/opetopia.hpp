#pragma once
#include <oforge/freealg.hpp>

namespace oforge {

// ---------------------------------------------------------------------------
// Planar trees over the grammar  T ::= * | <T1,...,Tk>  (k >= 0).
// Terms: atom "*" for a leaf, node "t" for a sequence. Size = constructor
// count, leaves = number of * occurrences.
// ---------------------------------------------------------------------------

inline Term pt_leaf() { return Term::atom("*"); }
inline Term pt_node(std::vector<Term> kids = {}) { return Term::node("t", std::move(kids)); }

inline int pt_size(const Term& t) {
  if (t.leaf) return 1;
  int n = 1;
  for (const Term& k : t.kids) n += pt_size(k);
  return n;
}

inline int pt_leaves(const Term& t) {
  if (t.leaf) return 1;
  int n = 0;
  for (const Term& k : t.kids) n += pt_leaves(k);
  return n;
}

inline int pt_nodes(const Term& t) {
  if (t.leaf) return 0;
  int n = 1;
  for (const Term& k : t.kids) n += pt_nodes(k);
  return n;
}

namespace detail {
inline void pt_gen_forests(int budget, std::vector<std::vector<Term>>& out);
inline void pt_gen(int budget, std::vector<Term>& out) {
  if (budget >= 1) out.push_back(pt_leaf());
  if (budget >= 1) {
    std::vector<std::vector<Term>> forests;
    pt_gen_forests(budget - 1, forests);
    for (auto& f : forests) out.push_back(pt_node(std::move(f)));
  }
}
inline void pt_gen_forests(int budget, std::vector<std::vector<Term>>& out) {
  out.push_back({});
  for (int first = 1; first <= budget; ++first) {
    std::vector<Term> heads;
    pt_gen(first, heads);
    for (const Term& h : heads) {
      if (pt_size(h) != first) continue;
      std::vector<std::vector<Term>> rest;
      pt_gen_forests(budget - first, rest);
      for (auto& r : rest) {
        r.insert(r.begin(), h);
        out.push_back(std::move(r));
      }
    }
  }
}
}  // namespace detail

inline std::vector<Term> ptrees(int max_size) {
  std::vector<Term> out;
  detail::pt_gen(max_size, out);
  sort_terms(out);
  return out;
}

// Grafting at leaves: substitute parts[i] for the i-th * (left to right).
inline Term pt_graft(const Term& base, const std::vector<Term>& parts, size_t* next = nullptr) {
  size_t local = 0;
  size_t& i = next ? *next : local;
  if (!next && static_cast<int>(parts.size()) != pt_leaves(base))
    throw std::runtime_error("pt_graft: need one part per leaf");
  if (base.leaf) return parts.at(i++);
  std::vector<Term> kids;
  kids.reserve(base.kids.size());
  for (const Term& k : base.kids) kids.push_back(pt_graft(k, parts, &i));
  return Term::node(base.head, std::move(kids));
}

namespace detail {
// plug the already-processed children of a substituted node into the leaves
// of its replacement, preserving the replacement's node heads
inline Term pt_plug(const Term& rep, const std::vector<Term>& kids, size_t& j) {
  if (rep.leaf) return kids.at(j++);
  std::vector<Term> out;
  out.reserve(rep.kids.size());
  for (const Term& k : rep.kids) out.push_back(pt_plug(k, kids, j));
  return Term::node(rep.head, std::move(out));
}
inline Term pt_subst_go(const Term& u, const std::vector<Term>& parts, size_t& next) {
  if (u.leaf) return u;
  const Term& rep = parts.at(next++);
  std::vector<Term> kids;
  kids.reserve(u.kids.size());
  for (const Term& k : u.kids) kids.push_back(pt_subst_go(k, parts, next));
  if (pt_leaves(rep) != static_cast<int>(kids.size()))
    throw std::runtime_error("pt_subst: part leaf count does not match node arity");
  size_t j = 0;
  return pt_plug(rep, kids, j);
}
}  // namespace detail

// Substitution at nodes: replace the i-th node (preorder) by parts[i], whose
// leaves receive the node's subtrees in order.
inline Term pt_subst(const Term& u, const std::vector<Term>& parts) {
  if (static_cast<int>(parts.size()) != pt_nodes(u))
    throw std::runtime_error("pt_subst: need one part per node");
  size_t next = 0;
  return detail::pt_subst_go(u, parts, next);
}

// ---------------------------------------------------------------------------
// Opetopes. An n-opetope is a token for n <= 1 and a pasting diagram of
// (n-1)-opetopes for n >= 2. Pasting terms:
//   u[x]        a unit on the (m-1)-opetope x
//   p[w,c...]   a node labelled by the m-opetope w, one child per input of w
// An opetope of dim >= 2 is represented by its pasting term; dims 0 and 1 by
// the tokens "*" and "I".
// ---------------------------------------------------------------------------

struct Opetope {
  int dim = 0;
  Term t = Term::atom("*");
  bool operator==(const Opetope& o) const { return dim == o.dim && t == o.t; }
  bool operator!=(const Opetope& o) const { return !(*this == o); }
};

inline Term pd_unit(const Term& x) { return Term::node("u", {x}); }
inline Term pd_node(const Term& w, std::vector<Term> kids) {
  std::vector<Term> all{w};
  for (Term& k : kids) all.push_back(std::move(k));
  return Term::node("p", std::move(all));
}
inline bool pd_is_unit(const Term& pd) { return !pd.leaf && pd.head == "u"; }

// node labels in preorder
inline void pd_nodes_into(const Term& pd, std::vector<Term>& out) {
  if (pd_is_unit(pd)) return;
  out.push_back(pd.kids[0]);
  for (size_t i = 1; i < pd.kids.size(); ++i) pd_nodes_into(pd.kids[i], out);
}
inline std::vector<Term> pd_nodes(const Term& pd) {
  std::vector<Term> out;
  pd_nodes_into(pd, out);
  return out;
}

inline int pd_size(const Term& pd) {
  if (pd_is_unit(pd)) return 1;
  int n = 1;
  for (size_t i = 1; i < pd.kids.size(); ++i) n += pd_size(pd.kids[i]);
  return n;
}

// inputs of an n-opetope: its constituent (n-1)-opetopes, one per node of the
// payload; the unique input of a 1-opetope is the point
inline std::vector<Term> op_inputs(int dim, const Term& t) {
  if (dim == 0) return {};
  if (dim == 1) return {Term::atom("*")};
  return pd_nodes(t);
}

inline Term pd_bd(int m, const Term& pd);

// the output face of an m-opetope (m >= 1): the composite boundary of its payload
inline Term op_out(int m, const Term& t) {
  if (m == 1) return Term::atom("*");
  return pd_bd(m - 1, t);
}

// the output face of a pasting of m-opetopes
inline Term pd_out(int m, const Term& pd) {
  if (pd_is_unit(pd)) return pd.kids[0];
  return op_out(m, pd.kids[0]);
}

namespace detail {
// substitution at pasting nodes, same discipline as pt_subst
inline Term pd_plug(const Term& rep, const std::vector<Term>& kids, size_t& j) {
  if (pd_is_unit(rep)) return kids.at(j++);
  std::vector<Term> out{rep.kids[0]};
  for (size_t i = 1; i < rep.kids.size(); ++i) out.push_back(pd_plug(rep.kids[i], kids, j));
  return Term::node("p", std::move(out));
}
inline Term pd_subst_go(const Term& u, const std::vector<Term>& parts, size_t& next) {
  if (pd_is_unit(u)) return u;
  const Term& rep = parts.at(next++);
  std::vector<Term> kids;
  for (size_t i = 1; i < u.kids.size(); ++i) kids.push_back(pd_subst_go(u.kids[i], parts, next));
  size_t j = 0;
  Term r = pd_plug(rep, kids, j);
  if (j != kids.size()) throw std::runtime_error("pd_subst: unit-leaf count mismatch");
  return r;
}
}  // namespace detail

inline Term pd_subst(const Term& u, const std::vector<Term>& parts) {
  size_t next = 0;
  Term r = detail::pd_subst_go(u, parts, next);
  if (next != parts.size()) throw std::runtime_error("pd_subst: part count mismatch");
  return r;
}

// Composite boundary of a pasting of m-opetopes, an m-opetope: units become
// singleton pastings, nodes are resolved by substituting the boundaries of
// the children into the label's own payload.
inline Term pd_bd(int m, const Term& pd) {
  if (m == 1) return Term::atom("I");  // every pasting of arrows composes to an arrow
  if (pd_is_unit(pd)) {
    const Term& x = pd.kids[0];
    std::vector<Term> kids;
    for (const Term& inp : op_inputs(m - 1, x)) kids.push_back(pd_unit(inp));
    return pd_node(x, std::move(kids));
  }
  const Term& w = pd.kids[0];  // payload of the m-opetope label
  std::vector<Term> reps;
  for (size_t i = 1; i < pd.kids.size(); ++i) reps.push_back(pd_bd(m, pd.kids[i]));
  return pd_subst(w, reps);
}

// structural validity: node labels are opetopes, child counts match inputs,
// and each child's output face equals the corresponding input
inline bool is_opetope(int dim, const Term& t);
inline bool is_pd(int m, const Term& pd) {
  if (pd_is_unit(pd)) return pd.kids.size() == 1 && is_opetope(m - 1, pd.kids[0]);
  if (pd.leaf || pd.head != "p" || pd.kids.empty()) return false;
  const Term& w = pd.kids[0];
  if (!is_opetope(m, w)) return false;
  std::vector<Term> inputs = op_inputs(m, w);
  if (inputs.size() + 1 != pd.kids.size()) return false;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const Term& c = pd.kids[i + 1];
    if (!is_pd(m, c)) return false;
    if (pd_out(m, c) != inputs[i]) return false;
  }
  return true;
}
inline bool is_opetope(int dim, const Term& t) {
  if (dim == 0) return t == Term::atom("*");
  if (dim == 1) return t == Term::atom("I");
  return is_pd(dim - 1, t);
}

// the 2-opetope of arity k as a chain of k arrow-nodes
inline Term op2(int k) {
  Term r = pd_unit(Term::atom("*"));
  for (int i = 0; i < k; ++i) r = pd_node(Term::atom("I"), {r});
  return r;
}
inline int op2_arity(const Term& t) { return static_cast<int>(pd_nodes(t).size()); }

// dim-3 payloads are pastings of 2-opetopes; they biject with planar trees
inline Term pt_to_pd3(const Term& t) {
  if (t.leaf) return pd_unit(Term::atom("I"));
  std::vector<Term> kids;
  for (const Term& k : t.kids) kids.push_back(pt_to_pd3(k));
  return pd_node(op2(static_cast<int>(t.kids.size())), std::move(kids));
}
inline Term pd3_to_pt(const Term& pd) {
  if (pd_is_unit(pd)) return pt_leaf();
  std::vector<Term> kids;
  for (size_t i = 1; i < pd.kids.size(); ++i) kids.push_back(pd3_to_pt(pd.kids[i]));
  return pt_node(std::move(kids));
}

inline int op_size(const Opetope& o) {
  if (o.dim <= 1) return 1;
  if (o.dim == 2) return op2_arity(o.t);
  return pd_size(o.t);
}

namespace detail {
// all pastings of m-opetopes with the given output face (null = free), size
// counted in pasting constructors; node labels drawn from `labels`
inline void gen_pds(int m, const std::vector<Term>& labels, const Term* required_out,
                    const std::vector<Term>& unit_opts, int budget, std::vector<Term>& out) {
  if (budget < 1) return;
  if (required_out) {
    out.push_back(pd_unit(*required_out));
  } else {
    for (const Term& x : unit_opts) out.push_back(pd_unit(x));
  }
  for (const Term& w : labels) {
    if (required_out && op_out(m, w) != *required_out) continue;
    std::vector<Term> inputs = op_inputs(m, w);
    // distribute the remaining budget over the children
    std::vector<std::vector<Term>> partial{{}};
    int used = 1;
    bool dead = false;
    for (const Term& inp : inputs) {
      std::vector<std::vector<Term>> next;
      for (auto& pre : partial) {
        int spent = 0;
        for (const Term& p : pre) spent += pd_size(p);
        std::vector<Term> opts;
        gen_pds(m, labels, &inp, unit_opts, budget - used - spent, opts);
        for (const Term& o : opts) {
          auto ext = pre;
          ext.push_back(o);
          next.push_back(std::move(ext));
        }
      }
      partial = std::move(next);
      if (partial.empty()) {
        dead = true;
        break;
      }
    }
    if (dead) continue;
    for (auto& kids : partial) out.push_back(pd_node(w, kids));
  }
}
}  // namespace detail

// Exhaustive enumeration of the n-opetopes of size <= bound. For n >= 3 the
// bound limits both the payload constructor count and, recursively, the size
// of every label.
inline std::vector<Opetope> opetopes(int n, int bound) {
  std::vector<Opetope> out;
  if (n == 0) {
    out.push_back({0, Term::atom("*")});
    return out;
  }
  if (n == 1) {
    out.push_back({1, Term::atom("I")});
    return out;
  }
  if (n == 2) {
    for (int k = 0; k <= bound; ++k) out.push_back({2, op2(k)});
    return out;
  }
  std::vector<Term> labels, units;
  for (const Opetope& o : opetopes(n - 1, bound)) labels.push_back(o.t);
  for (const Opetope& o : opetopes(n - 2, bound)) units.push_back(o.t);
  std::vector<Term> pds;
  detail::gen_pds(n - 1, labels, nullptr, units, bound, pds);
  sort_terms(pds);
  for (Term& pd : pds) out.push_back({n, std::move(pd)});
  return out;
}

inline Opetope boundary(const Opetope& o) {
  if (o.dim < 2) throw std::runtime_error("boundary: needs dim >= 2");
  if (o.dim == 2) return {1, Term::atom("I")};
  return {o.dim - 1, pd_bd(o.dim - 1, o.t)};
}

// ---------------------------------------------------------------------------
// The pasting-diagram categories pd_n for n <= 2. Objects are (n+1)-opetopes;
// a morphism dom -> cod assigns to each constituent of cod a sub-pasting of
// dom, reassembling to dom. For n = 1 these are the simplex-with-addition
// homs (compositions); for n = 2, tree morphisms by node substitution.
// ---------------------------------------------------------------------------

struct PdMorphism {
  int n = 1;
  Term dom, cod;               // payload terms of the (n+1)-opetopes
  std::vector<Term> parts;     // n=1: integer atoms; n=2: planar trees
  bool operator==(const PdMorphism& o) const {
    return n == o.n && dom == o.dom && cod == o.cod && parts == o.parts;
  }
};

namespace detail {
inline void compositions(int total, int slots, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
  if (slots == 0) {
    if (total == 0) out.push_back(cur);
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(total - k, slots - 1, cur, out);
    cur.pop_back();
  }
}
}  // namespace detail

// dom and cod are payload terms: 2-opetopes for n=1, planar trees for n=2
inline std::vector<PdMorphism> pd_hom(int n, const Term& dom, const Term& cod,
                                      bool contraction_only = false) {
  std::vector<PdMorphism> out;
  if (n == 0) {
    out.push_back({0, dom, cod, {}});
    return out;
  }
  if (n == 1) {
    int m = op2_arity(dom), k = op2_arity(cod);
    std::vector<std::vector<int>> cs;
    std::vector<int> cur;
    detail::compositions(m, k, cur, cs);
    for (const auto& c : cs) {
      std::vector<Term> parts;
      for (int x : c) parts.push_back(Term::atom(std::to_string(x)));
      out.push_back({1, dom, cod, std::move(parts)});
    }
    return out;
  }
  if (n != 2) throw std::runtime_error("pd_hom: only n <= 2 is supported");
  // collect the arities of cod's nodes in preorder
  std::vector<int> arities;
  std::function<void(const Term&)> walk = [&](const Term& u) {
    if (u.leaf) return;
    arities.push_back(static_cast<int>(u.kids.size()));
    for (const Term& k : u.kids) walk(k);
  };
  walk(cod);
  int budget = pt_nodes(dom);
  std::vector<std::vector<Term>> choices;
  for (int ar : arities) {
    std::vector<Term> opts;
    // a candidate part has <= budget nodes and exactly ar leaves
    for (const Term& t : ptrees(budget + std::max(ar, 1)))
      if (pt_leaves(t) == ar && pt_nodes(t) <= budget &&
          (!contraction_only || pt_nodes(t) >= 1))
        opts.push_back(t);
    choices.push_back(std::move(opts));
  }
  std::vector<std::vector<Term>> assignments{{}};
  for (const auto& opts : choices) {
    std::vector<std::vector<Term>> next;
    for (const auto& pre : assignments) {
      int spent = 0;
      for (const Term& p : pre) spent += pt_nodes(p);
      for (const Term& o : opts) {
        if (spent + pt_nodes(o) > budget) continue;
        auto ext = pre;
        ext.push_back(o);
        next.push_back(std::move(ext));
      }
    }
    assignments = std::move(next);
  }
  for (const auto& parts : assignments)
    if (pt_subst(cod, parts) == dom) out.push_back({2, dom, cod, parts});
  return out;
}

inline PdMorphism pd_id(int n, const Term& ob) {
  if (n == 0) return {0, ob, ob, {}};
  if (n == 1) {
    std::vector<Term> parts(op2_arity(ob), Term::atom("1"));
    return {1, ob, ob, std::move(parts)};
  }
  if (n != 2) throw std::runtime_error("pd_id: only n <= 2 is supported");
  std::vector<Term> parts;
  std::function<void(const Term&)> walk = [&](const Term& u) {
    if (u.leaf) return;
    std::vector<Term> ls(u.kids.size(), pt_leaf());
    parts.push_back(pt_node(std::move(ls)));
    for (const Term& k : u.kids) walk(k);
  };
  walk(ob);
  return {2, ob, ob, std::move(parts)};
}

namespace detail {
inline Term pt_strip(const Term& t) {
  if (t.leaf) return t;
  std::vector<Term> kids;
  for (const Term& k : t.kids) kids.push_back(pt_strip(k));
  return pt_node(std::move(kids));
}
inline void pt_tags_preorder(const Term& t, std::vector<std::string>& out) {
  if (t.leaf) return;
  out.push_back(t.head);
  for (const Term& k : t.kids) pt_tags_preorder(k, out);
}
inline Term pt_tag(const Term& t, const std::string& tag, int& local) {
  if (t.leaf) return t;
  std::string head = tag + ":" + std::to_string(local++);
  std::vector<Term> kids;
  for (const Term& k : t.kids) kids.push_back(pt_tag(k, tag, local));
  return Term::node(std::move(head), std::move(kids));
}
}  // namespace detail

inline PdMorphism pd_compose(int n, const PdMorphism& g, const PdMorphism& f) {
  if (g.n != n || f.n != n) throw std::runtime_error("pd_compose: dimension mismatch");
  if (f.cod != g.dom) throw std::runtime_error("pd_compose: boundary mismatch");
  if (n == 0) return {0, f.dom, g.cod, {}};
  if (n == 1) {
    // block sums: the j-th part of g tells how many parts of f to add up
    std::vector<Term> parts;
    size_t i = 0;
    for (const Term& bl : g.parts) {
      int len = std::stoi(bl.head), sum = 0;
      for (int r = 0; r < len; ++r) sum += std::stoi(f.parts.at(i++).head);
      parts.push_back(Term::atom(std::to_string(sum)));
    }
    if (i != f.parts.size()) throw std::runtime_error("pd_compose: part count mismatch");
    return {1, f.dom, g.cod, std::move(parts)};
  }
  if (n != 2) throw std::runtime_error("pd_compose: only n <= 2 is supported");
  // tag each part of g, substitute into g.cod, and read off where each node of
  // g.dom (= f.cod) came from; then substitute f's parts inside g's parts
  std::vector<Term> tagged;
  for (size_t k = 0; k < g.parts.size(); ++k) {
    int local = 0;
    tagged.push_back(detail::pt_tag(g.parts[k], std::to_string(k), local));
  }
  Term mid = pt_subst(g.cod, tagged);
  if (detail::pt_strip(mid) != g.dom) throw std::runtime_error("pd_compose: bad morphism");
  std::vector<std::string> order;
  detail::pt_tags_preorder(mid, order);  // tag of the i-th node of g.dom
  std::map<std::string, Term> at;       // tag -> f's part for that node
  for (size_t i = 0; i < order.size(); ++i) at[order[i]] = f.parts.at(i);
  std::vector<Term> parts;
  for (size_t k = 0; k < g.parts.size(); ++k) {
    std::vector<Term> sub;
    std::vector<std::string> tags;
    detail::pt_tags_preorder(tagged[k], tags);
    for (const auto& tg : tags) sub.push_back(at.at(tg));
    parts.push_back(pt_subst(g.parts[k], sub));
  }
  return {2, f.dom, g.cod, std::move(parts)};
}

// ---------------------------------------------------------------------------
// Slicing.
// ---------------------------------------------------------------------------

// Slicing a base multicategory by an algebra presented as a discrete
// opfibration f: E -> D recovers the total multicategory E.
inline Multicat slice_by_algebra(const Multicat& D, const Multicat& E, const MultiMap& f) {
  if (!is_discrete_opfibration(E, D, f))
    throw std::runtime_error("slice_by_algebra: not a discrete opfibration");
  return E;
}
inline Multicat slice_by_algebra(const Multicat& D, const Opfibration& o) {
  return slice_by_algebra(D, o.D, o.f);
}

// Evaluate a free-multicategory arrow over C's underlying graph inside C.
inline std::optional<Atom> eval_free_arrow(const Multicat& C, const Term& fa) {
  if (fa_is_id(fa)) {
    auto it = C.ids.find(fa.kids[0].head);
    if (it == C.ids.end()) return std::nullopt;
    return it->second;
  }
  bool ok = true;
  Term cfg = C.T().map_with(
      [&](const Atom& a) -> Atom {
        auto r = eval_free_arrow(C, parse_term(a));
        if (!r) ok = false;
        return r ? *r : a;
      },
      fa_config(fa));
  if (!ok) return std::nullopt;
  return C.compose(fa.kids[0].head, cfg);
}

namespace detail {
// domain encoding of a slice cell over a plain (free-monoid ambient) C: a
// planar tree over C1 with one leaf per generator application (bare
// applications collapse to the leaf itself, empty slots to childless nodes)
inline Term slice_flatten(const Multicat& C, const Term& fa) {
  if (fa_is_id(fa)) return Term::node("n");
  Term cfg = fa_config(fa);
  bool bare = true;
  for (const Atom& a : leaf_atoms(cfg)) bare &= fa_is_id(oforge::parse_term(a));
  if (bare) return Term::atom(fa.kids[0].head);
  std::vector<Term> kids{Term::atom(fa.kids[0].head)};
  for (const Atom& a : leaf_atoms(cfg)) kids.push_back(slice_flatten(C, oforge::parse_term(a)));
  return Term::node("n", std::move(kids));
}
// substitute a free arrow for each generator occurrence (preorder: the node
// itself, then its children), grafting the occurrence's arguments back in
inline Term fa_subst_nodes(const MGraph& G, const Term& fa, const std::vector<Term>& reps,
                           size_t& next) {
  if (fa_is_id(fa)) return fa;
  Term rep = reps.at(next++);
  Term cfg = fa_config(fa);
  Term cfg2 = G.T->map_with(
      [&](const Atom& a) { return enc(fa_subst_nodes(G, oforge::parse_term(a), reps, next)); }, cfg);
  return fa_graft(G, rep, cfg2);
}
// leaf order of slice_flatten: the occurrence itself precedes its children
inline void slice_occurrences(const Term& fa, std::vector<Term>& out) {
  if (fa_is_id(fa)) return;
  out.push_back(fa);
  for (const Atom& a : leaf_atoms(fa_config(fa))) slice_occurrences(oforge::parse_term(a), out);
}
}  // namespace detail

// The slice multicategory C+ on a multicategory C: objects are C's arrows and
// a cell is a configuration of C-arrows composing, in C, to its codomain.
// Identity-monad ambients give a plain fragment (configurations are paths);
// free-monoid ambients give a tree fragment (configurations are free-
// multicategory arrows over C's graph).
inline Multicat slice_plus(const Multicat& C, int bound) {
  static const FreeMonoidMonad SLICE_LIST;
  static const TreeMonad SLICE_TREE;
  Multicat P;
  P.g.C0 = C.g.C1;
  std::string ambient = C.T().name();
  if (ambient == "identity") {
    P.g.T = &SLICE_LIST;
    // cells: composable paths with their composite, plus empty paths per object
    for (const Atom& s : C.g.C0.elements) {
      auto it = C.ids.find(s);
      if (it == C.ids.end()) continue;
      Atom cell = pair_atom("s[]", it->second);
      P.g.C1.elements.push_back(cell);
      P.g.d[cell] = Term::node("s");
      P.g.c[cell] = it->second;
    }
    std::vector<std::pair<std::vector<Atom>, Atom>> paths;  // word, composite
    for (const Atom& a : C.g.C1.elements) paths.push_back({{a}, a});
    for (size_t i = 0; i < paths.size(); ++i) {
      auto [word, comp] = paths[i];
      std::vector<Term> ls;
      for (const Atom& a : word) ls.push_back(Term::atom(a));
      if (static_cast<int>(word.size()) <= bound) {
        Atom cell = pair_atom(enc(Term::node("s", ls)), comp);
        P.g.C1.elements.push_back(cell);
        P.g.d[cell] = Term::node("s", std::move(ls));
        P.g.c[cell] = comp;
      }
      if (static_cast<int>(word.size()) >= bound) continue;
      for (const Atom& b : C.g.C1.elements) {
        // extend on the inside: comp . b, defined when boundaries meet
        if (C.g.cod(b) != C.g.dom(comp).head) continue;
        auto r = C.compose(comp, Term::atom(b));
        if (!r) continue;
        auto w2 = word;
        w2.push_back(b);
        paths.push_back({std::move(w2), *r});
      }
    }
  } else if (ambient == "free-monoid") {
    P.g.T = &SLICE_TREE;
    MGraph G = C.g;
    for (const Term& fa : free_arrows(G, bound)) {
      auto ev = eval_free_arrow(C, fa);
      if (!ev) continue;
      Atom cell = enc(fa);
      P.g.C1.elements.push_back(cell);
      P.g.d[cell] = detail::slice_flatten(C, fa);
      P.g.c[cell] = *ev;
    }
  } else {
    throw std::runtime_error("slice_plus: unsupported ambient monad " + ambient);
  }
  std::sort(P.g.C1.elements.begin(), P.g.C1.elements.end());
  P.g.C1.elements.erase(std::unique(P.g.C1.elements.begin(), P.g.C1.elements.end()),
                        P.g.C1.elements.end());
  // identities: the singleton configuration on each object
  for (const Atom& f : P.g.C0.elements) {
    if (ambient == "identity") {
      Atom cell = pair_atom(enc(Term::node("s", {Term::atom(f)})), f);
      if (P.g.C1.contains(cell)) P.ids[f] = cell;
    } else {
      Atom cell = enc(fa_gen(C.g, f));
      if (P.g.C1.contains(cell)) P.ids[f] = cell;
    }
  }
  // composition: substitute configurations for constituents
  if (ambient == "identity") {
    for (const Atom& outer : P.g.C1.elements)
      for (const Term& cfg : configs_for(P, outer)) {
        std::vector<Term> ls;
        for (const Atom& cell : leaf_atoms(cfg))
          for (const Term& x : P.g.dom(cell).kids) ls.push_back(x);
        Atom composite = pair_atom(enc(Term::node("s", ls)), P.g.c.at(outer));
        if (P.g.C1.contains(composite)) P.comp[{outer, enc(cfg)}] = composite;
      }
  } else {
    // only configurations whose composite stays inside the fragment matter,
    // and the composite's size is the sum of the constituents' sizes --
    // enumerate with that budget instead of walking the whole fibre product
    std::map<Atom, std::vector<Atom>> fib;
    std::map<Atom, int> size_of;
    for (const Atom& cell : P.g.C1.elements) {
      fib[P.g.c.at(cell)].push_back(cell);
      size_of[cell] = fa_size(parse_term(cell));
    }
    for (const Atom& outer : P.g.C1.elements) {
      const Term& dom = P.g.d.at(outer);
      std::vector<Atom> labels = leaf_atoms(dom);
      std::vector<Atom> choice(labels.size());
      std::function<void(size_t, int)> go = [&](size_t i, int budget) {
        if (i == labels.size()) {
          size_t j = 0;
          Term cfg = P.T().map_with([&](const Atom&) { return choice[j++]; }, dom);
          std::vector<Term> reps;
          for (const Atom& cell : leaf_atoms(cfg)) reps.push_back(parse_term(cell));
          size_t next = 0;
          Term composite = detail::fa_subst_nodes(C.g, parse_term(outer), reps, next);
          Atom ce = enc(composite);
          if (P.g.C1.contains(ce)) P.comp[{outer, enc(cfg)}] = ce;
          return;
        }
        for (const Atom& cand : fib[labels[i]]) {
          if (size_of[cand] > budget) continue;
          choice[i] = cand;
          go(i + 1, budget - size_of[cand]);
        }
      };
      go(0, bound);
    }
  }
  return P;
}

}  // namespace oforge

#pragma once
#include <oforge/monadkit.hpp>

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oforge {

// ---------------------------------------------------------------------------
// Batanin trees. A 0-stage tree is the token; an (n+1)-stage tree is a finite
// sequence of n-stage trees. The stage is carried explicitly because the empty
// sequence exists at every positive stage. Size = total edge count.
// ---------------------------------------------------------------------------

struct BTree {
  int stage = 0;
  Term t = Term::atom("o");
  bool operator==(const BTree& o) const { return stage == o.stage && t == o.t; }
  bool operator!=(const BTree& o) const { return !(*this == o); }
  bool operator<(const BTree& o) const {
    if (stage != o.stage) return stage < o.stage;
    return term_less(t, o.t);
  }
};

inline BTree btoken() { return {0, Term::atom("o")}; }

inline BTree bt_seq(int stage, std::vector<Term> kids) {
  return {stage, Term::node("b", std::move(kids))};
}

inline int bt_size_term(const Term& t) {
  if (t.leaf) return 0;
  int n = static_cast<int>(t.kids.size());
  for (const Term& k : t.kids) n += bt_size_term(k);
  return n;
}
inline int bt_size(const BTree& x) { return bt_size_term(x.t); }

inline Atom bt_atom(const BTree& x) {
  return enc(Term::node("t", {Term::atom(std::to_string(x.stage)), x.t}));
}
inline BTree bt_from_atom(const Atom& a) {
  Term t = parse_term(a);
  return {std::stoi(t.kids[0].head), t.kids[1]};
}

// the straight tree: a single n-cell
inline BTree upsilon(int n) {
  BTree x = btoken();
  for (int i = 0; i < n; ++i) x = bt_seq(x.stage + 1, {x.t});
  return x;
}

inline BTree btree_boundary(const BTree& x) {
  if (x.stage == 0) throw std::runtime_error("btree_boundary: 0-stage tree");
  if (x.stage == 1) return btoken();
  std::vector<Term> kids;
  for (const Term& k : x.t.kids) kids.push_back(btree_boundary({x.stage - 1, k}).t);
  return bt_seq(x.stage - 1, std::move(kids));
}

// the identity cylinder: same picture, one stage higher
inline Term bt_promote_term(const Term& t) {
  if (t.leaf) return Term::node("b");
  std::vector<Term> kids;
  for (const Term& k : t.kids) kids.push_back(bt_promote_term(k));
  return Term::node("b", std::move(kids));
}
inline BTree bt_promote(const BTree& x) { return {x.stage + 1, bt_promote_term(x.t)}; }

// all stage-n trees of size <= max_size, in a fixed generation order
inline std::vector<BTree> btrees(int stage, int max_size) {
  if (stage == 0) return {btoken()};
  std::vector<BTree> subs = btrees(stage - 1, max_size - 1);
  std::vector<BTree> out;
  std::vector<Term> cur;
  std::function<void(int)> go = [&](int left) {
    out.push_back(bt_seq(stage, cur));
    for (const BTree& s : subs) {
      int c = 1 + bt_size(s);
      if (c > left) continue;
      cur.push_back(s.t);
      go(left - c);
      cur.pop_back();
    }
  };
  go(max_size);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Delta-diagram form: level sizes tau(n) -> ... -> tau(1) -> tau(0)=1 with
// monotone parent maps. parent[k][i] is the parent (at height k) of the i-th
// node at height k+1, nodes ordered left to right; k = 0..n-1.
// ---------------------------------------------------------------------------

struct DeltaDiagram {
  int n = 0;
  std::vector<std::vector<int>> parent;
};

namespace detail {
inline void delta_fill(const Term& t, int height, int self, DeltaDiagram& d) {
  if (t.leaf) return;
  for (const Term& k : t.kids) {
    d.parent[height].push_back(self);
    delta_fill(k, height + 1, static_cast<int>(d.parent[height].size()) - 1, d);
  }
}
}  // namespace detail

inline DeltaDiagram to_delta(const BTree& x) {
  DeltaDiagram d;
  d.n = x.stage;
  d.parent.assign(x.stage, {});
  detail::delta_fill(x.t, 0, 0, d);
  return d;
}

inline BTree from_delta(const DeltaDiagram& d) {
  std::function<Term(int, int)> build = [&](int height, int self) -> Term {
    if (height == d.n) return Term::atom("o");
    std::vector<Term> kids;
    for (size_t i = 0; i < d.parent[height].size(); ++i)
      if (d.parent[height][i] == self) kids.push_back(build(height + 1, static_cast<int>(i)));
    return Term::node("b", std::move(kids));
  };
  return {d.n, build(0, 0)};
}

// ---------------------------------------------------------------------------
// Truncated globular sets.
// ---------------------------------------------------------------------------

struct GlobSet {
  int N = 0;
  std::vector<FinSet> cells;               // size N+1
  std::vector<std::map<Atom, Atom>> src;   // src[k]: cells[k+1] -> cells[k]
  std::vector<std::map<Atom, Atom>> tgt;
};

inline CheckReport check_globular(const GlobSet& X) {
  CheckReport rep;
  for (int k = 0; k + 1 < X.N; ++k)
    for (const Atom& c : X.cells[k + 2].elements) {
      if (X.src[k].at(X.src[k + 1].at(c)) != X.src[k].at(X.tgt[k + 1].at(c)))
        rep.fail("ss != st at " + c);
      if (X.tgt[k].at(X.src[k + 1].at(c)) != X.tgt[k].at(X.tgt[k + 1].at(c)))
        rep.fail("ts != tt at " + c);
    }
  return rep;
}

// ---------------------------------------------------------------------------
// The glob of a tree: formal cells named positionally. 0-cells are v0..vk;
// a d-cell (d >= 1) in column i is "c<i>." prefixed onto a (d-1)-cell of the
// column's glob. Sources and targets are purely positional.
// ---------------------------------------------------------------------------

namespace detail {
inline void hat_collect(const BTree& x, const std::string& prefix, int dim,
                        std::vector<std::vector<Atom>>& by_dim) {
  if (static_cast<int>(by_dim.size()) <= dim) by_dim.resize(dim + 1);
  if (x.stage == 0) {
    by_dim[dim].push_back(prefix + "v0");
    return;
  }
  int k = static_cast<int>(x.t.kids.size());
  for (int i = 0; i <= k; ++i) by_dim[dim].push_back(prefix + "v" + std::to_string(i));
  for (int i = 0; i < k; ++i)
    hat_collect({x.stage - 1, x.t.kids[i]}, prefix + "c" + std::to_string(i) + ".", dim + 1,
                by_dim);
}
// split "c<i>.rest" -> (i, rest); (-1, name) for 0-cells
inline std::pair<int, Atom> hat_split(const Atom& name) {
  if (name[0] != 'c') return {-1, name};
  size_t dot = name.find('.');
  return {std::stoi(name.substr(1, dot - 1)), name.substr(dot + 1)};
}
}  // namespace detail

inline Atom hat_s(const Atom& name) {
  auto [i, rest] = detail::hat_split(name);
  if (rest[0] == 'v') return "v" + std::to_string(i);
  return "c" + std::to_string(i) + "." + hat_s(rest);
}
inline Atom hat_t(const Atom& name) {
  auto [i, rest] = detail::hat_split(name);
  if (rest[0] == 'v') return "v" + std::to_string(i + 1);
  return "c" + std::to_string(i) + "." + hat_t(rest);
}

inline std::vector<std::vector<Atom>> hat_cells(const BTree& x) {
  std::vector<std::vector<Atom>> by_dim(x.stage + 1);
  detail::hat_collect(x, "", 0, by_dim);
  return by_dim;
}

inline GlobSet tau_hat(const BTree& x) {
  GlobSet G;
  auto by_dim = hat_cells(x);
  G.N = static_cast<int>(by_dim.size()) - 1;
  for (auto& v : by_dim) {
    std::sort(v.begin(), v.end());
    G.cells.push_back(FinSet(v));
  }
  G.src.resize(G.N);
  G.tgt.resize(G.N);
  for (int k = 0; k < G.N; ++k)
    for (const Atom& c : G.cells[k + 1].elements) {
      G.src[k][c] = hat_s(c);
      G.tgt[k][c] = hat_t(c);
    }
  return G;
}

// the single top cell of the straight tree's glob
inline Atom hat_top(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += "c0.";
  return s + "v0";
}

// all globular-set maps tau_hat -> X
inline std::vector<std::map<Atom, Atom>> labellings(const GlobSet& X, const BTree& tau) {
  auto by_dim = hat_cells(tau);
  std::vector<std::pair<int, Atom>> order;  // (dim, name), low dims first
  for (size_t d = 0; d < by_dim.size(); ++d)
    for (const Atom& c : by_dim[d]) order.push_back({static_cast<int>(d), c});
  std::vector<std::map<Atom, Atom>> out;
  std::map<Atom, Atom> cur;
  std::function<void(size_t)> go = [&](size_t i) {
    if (i == order.size()) {
      out.push_back(cur);
      return;
    }
    auto [d, name] = order[i];
    if (d > X.N) return;
    for (const Atom& x : X.cells[d].elements) {
      if (d >= 1 &&
          (X.src[d - 1].at(x) != cur.at(hat_s(name)) || X.tgt[d - 1].at(x) != cur.at(hat_t(name))))
        continue;
      cur[name] = x;
      go(i + 1);
      cur.erase(name);
    }
  };
  go(0);
  return out;
}

// X*(n) restricted to trees of size <= tree_bound
inline std::vector<std::pair<BTree, std::map<Atom, Atom>>> omega_free(const GlobSet& X, int n,
                                                                      int tree_bound) {
  std::vector<std::pair<BTree, std::map<Atom, Atom>>> out;
  for (const BTree& tau : btrees(n, tree_bound))
    for (auto& L : labellings(X, tau)) out.push_back({tau, L});
  return out;
}

// ---------------------------------------------------------------------------
// Gluing and substitution. tensor(d, a, b) glues two trees along their shared
// d-dimensional boundary; btree_substitute composes a tree-of-trees. Both
// also report where each operand's glob lands in the result's glob, which is
// what lets operad composition be flattened.
// ---------------------------------------------------------------------------

using CellMap = std::map<Atom, Atom>;

namespace detail {
inline CellMap cm_compose(const CellMap& outer, const CellMap& inner) {
  CellMap r;
  for (const auto& [a, b] : inner) r[a] = outer.at(b);
  return r;
}
inline CellMap cm_identity(const BTree& x) {
  CellMap r;
  for (const auto& dim : hat_cells(x))
    for (const Atom& c : dim) r[c] = c;
  return r;
}
inline void cm_prefix(CellMap& into, int col, const CellMap& sub) {
  std::string pre = "c" + std::to_string(col) + ".";
  for (const auto& [a, b] : sub) into[pre + a] = pre + b;
}

struct Glued {
  BTree tree;
  CellMap ea, eb;
};

inline Glued tensor_embed(int d, const BTree& a, const BTree& b) {
  if (a.stage != b.stage) throw std::runtime_error("tensor: stage mismatch");
  Glued g;
  if (d == 0) {
    std::vector<Term> kids = a.t.kids;
    int p = static_cast<int>(kids.size());
    for (const Term& k : b.t.kids) kids.push_back(k);
    g.tree = bt_seq(a.stage, std::move(kids));
    for (int i = 0; i <= p; ++i) g.ea["v" + std::to_string(i)] = "v" + std::to_string(i);
    int q = static_cast<int>(b.t.kids.size());
    for (int i = 0; i <= q; ++i) g.eb["v" + std::to_string(i)] = "v" + std::to_string(p + i);
    for (int i = 0; i < p; ++i)
      cm_prefix(g.ea, i, cm_identity({a.stage - 1, a.t.kids[i]}));
    for (int i = 0; i < q; ++i) {
      CellMap sub = cm_identity({b.stage - 1, b.t.kids[i]});
      std::string from = "c" + std::to_string(i) + ".", to = "c" + std::to_string(p + i) + ".";
      for (const auto& [x, y] : sub) g.eb[from + x] = to + y;
    }
    return g;
  }
  if (a.t.kids.size() != b.t.kids.size()) throw std::runtime_error("tensor: boundary mismatch");
  int k = static_cast<int>(a.t.kids.size());
  std::vector<Term> kids;
  for (int i = 0; i <= k; ++i) {
    g.ea["v" + std::to_string(i)] = "v" + std::to_string(i);
    g.eb["v" + std::to_string(i)] = "v" + std::to_string(i);
  }
  for (int i = 0; i < k; ++i) {
    Glued sub = tensor_embed(d - 1, {a.stage - 1, a.t.kids[i]}, {b.stage - 1, b.t.kids[i]});
    kids.push_back(sub.tree.t);
    cm_prefix(g.ea, i, sub.ea);
    cm_prefix(g.eb, i, sub.eb);
  }
  g.tree = bt_seq(a.stage, std::move(kids));
  return g;
}

// inclusion of the d-fold boundary's glob, along the source or target side
inline CellMap boundary_inclusion(const BTree& x, bool src_side) {
  CellMap m;
  int k = static_cast<int>(x.t.kids.size());
  if (x.stage == 1) {
    m["v0"] = src_side ? "v0" : "v" + std::to_string(k);
    return m;
  }
  for (int i = 0; i <= k; ++i) m["v" + std::to_string(i)] = "v" + std::to_string(i);
  for (int i = 0; i < k; ++i)
    cm_prefix(m, i, boundary_inclusion({x.stage - 1, x.t.kids[i]}, src_side));
  return m;
}

inline CellMap iterated_inclusion(const BTree& x, int times, bool src_side) {
  if (times == 0) return cm_identity(x);
  CellMap outer = boundary_inclusion(x, src_side);
  return cm_compose(outer, iterated_inclusion(btree_boundary(x), times - 1, src_side));
}
}  // namespace detail

struct SubstResult {
  BTree tree;
  std::map<Atom, CellMap> emb;  // per glob cell of the shape: label-glob -> result-glob
};

namespace detail {
// M labels every d-cell of sigma's glob with a tree of stage d + k
inline SubstResult subst_embed(int k, const BTree& sigma, const std::map<Atom, BTree>& M) {
  SubstResult R;
  if (sigma.stage == 0) {
    R.tree = M.at("v0");
    R.emb["v0"] = cm_identity(R.tree);
    return R;
  }
  int j = static_cast<int>(sigma.t.kids.size());
  if (j == 0) {
    BTree P = M.at("v0");
    R.emb["v0"] = cm_identity(P);
    for (int i = 0; i < sigma.stage; ++i) P = bt_promote(P);
    R.tree = P;
    return R;
  }
  std::vector<SubstResult> cols;
  for (int i = 0; i < j; ++i) {
    std::map<Atom, BTree> Mi;
    std::string pre = "c" + std::to_string(i) + ".";
    for (const auto& [name, t] : M)
      if (name.compare(0, pre.size(), pre) == 0) Mi[name.substr(pre.size())] = t;
    cols.push_back(subst_embed(k + 1, {sigma.stage - 1, sigma.t.kids[i]}, Mi));
  }
  std::vector<CellMap> into(j);
  BTree acc = cols[0].tree;
  into[0] = cm_identity(acc);
  for (int i = 1; i < j; ++i) {
    Glued g = tensor_embed(k, acc, cols[i].tree);
    for (int r = 0; r < i; ++r) into[r] = cm_compose(g.ea, into[r]);
    into[i] = g.eb;
    acc = g.tree;
  }
  R.tree = acc;
  for (int i = 0; i < j; ++i) {
    std::string pre = "c" + std::to_string(i) + ".";
    for (const auto& [y, em] : cols[i].emb) R.emb[pre + y] = cm_compose(into[i], em);
  }
  for (int r = 0; r <= j; ++r) {
    int col = (r < j) ? r : j - 1;
    bool side = (r < j);  // source route into the right column, target route at the end
    CellMap route = iterated_inclusion(cols[col].tree, sigma.stage, side);
    R.emb["v" + std::to_string(r)] = cm_compose(into[col], route);
  }
  return R;
}
}  // namespace detail

inline SubstResult subst_with_embedding(const BTree& tau, const std::map<Atom, BTree>& M) {
  // validate the labelling before gluing
  auto by_dim = hat_cells(tau);
  for (size_t d = 0; d < by_dim.size(); ++d)
    for (const Atom& c : by_dim[d]) {
      auto it = M.find(c);
      if (it == M.end()) throw std::runtime_error("substitute: missing label at " + c);
      if (it->second.stage != static_cast<int>(d))
        throw std::runtime_error("substitute: stage mismatch at " + c);
      if (d >= 1) {
        BTree b = btree_boundary(it->second);
        if (b != M.at(hat_s(c)) || b != M.at(hat_t(c)))
          throw std::runtime_error("substitute: boundary mismatch at " + c);
      }
    }
  return detail::subst_embed(0, tau, M);
}

inline BTree btree_substitute(const BTree& tau, const std::map<Atom, BTree>& M) {
  return subst_with_embedding(tau, M).tree;
}

inline BTree tensor(int d, const BTree& a, const BTree& b) {
  return detail::tensor_embed(d, a, b).tree;
}

// ---------------------------------------------------------------------------
// Collections and operads.
// ---------------------------------------------------------------------------

struct Collection {
  int N = 0;  // dimension bound
  FinSet cells;
  std::map<Atom, BTree> shape;
  std::map<Atom, Atom> src, tgt;  // defined for cells of stage >= 1

  int stage(const Atom& c) const { return shape.at(c).stage; }
  std::vector<Atom> cells_over(const BTree& tau) const {
    std::vector<Atom> out;
    for (const Atom& c : cells.elements)
      if (shape.at(c) == tau) out.push_back(c);
    return out;
  }
  CheckReport validate() const {
    CheckReport rep;
    for (const Atom& c : cells.elements) {
      if (stage(c) == 0) continue;
      BTree b = btree_boundary(shape.at(c));
      if (shape.at(src.at(c)) != b) rep.fail("source shape mismatch at " + c);
      if (shape.at(tgt.at(c)) != b) rep.fail("target shape mismatch at " + c);
      if (stage(c) >= 2) {
        if (src.at(src.at(c)) != src.at(tgt.at(c))) rep.fail("ss != st at " + c);
        if (tgt.at(src.at(c)) != tgt.at(tgt.at(c))) rep.fail("ts != tt at " + c);
      }
    }
    return rep;
  }
};

// a labelling of shape(outer)'s glob by cells, encoded canonically
inline std::string lab_key(const std::map<Atom, Atom>& M) {
  std::vector<Term> kids;
  for (const auto& [name, cell] : M) {
    kids.push_back(Term::atom(name));
    kids.push_back(Term::atom(cell));
  }
  return enc(Term::node("m", std::move(kids)));
}
inline std::map<Atom, Atom> lab_unkey(const std::string& s) {
  Term t = parse_term(s);
  std::map<Atom, Atom> M;
  for (size_t i = 0; i + 1 < t.kids.size(); i += 2) M[t.kids[i].head] = t.kids[i + 1].head;
  return M;
}

struct BOperad : Collection {
  std::map<int, Atom> ids;  // n -> cell over upsilon_n
  std::map<std::pair<Atom, std::string>, Atom> comp;

  std::optional<Atom> compose(const Atom& outer, const std::map<Atom, Atom>& M) const {
    auto it = comp.find({outer, lab_key(M)});
    if (it == comp.end()) return std::nullopt;
    return it->second;
  }
};

// does M assign to each cell of shape(outer)'s glob a C-cell, compatibly?
inline bool labelling_ok(const Collection& C, const BTree& tau, const std::map<Atom, Atom>& M) {
  auto by_dim = hat_cells(tau);
  for (size_t d = 0; d < by_dim.size(); ++d)
    for (const Atom& c : by_dim[d]) {
      auto it = M.find(c);
      if (it == M.end() || !C.cells.contains(it->second)) return false;
      if (C.stage(it->second) != static_cast<int>(d)) return false;
      if (d >= 1 &&
          (C.src.at(it->second) != M.at(hat_s(c)) || C.tgt.at(it->second) != M.at(hat_t(c))))
        return false;
    }
  return true;
}

// every compatible labelling of tau's glob by C-cells
inline std::vector<std::map<Atom, Atom>> cell_labellings(const Collection& C, const BTree& tau) {
  auto by_dim = hat_cells(tau);
  std::vector<std::pair<int, Atom>> order;
  for (size_t d = 0; d < by_dim.size(); ++d)
    for (const Atom& c : by_dim[d]) order.push_back({static_cast<int>(d), c});
  std::vector<std::map<Atom, Atom>> out;
  std::map<Atom, Atom> cur;
  std::function<void(size_t)> go = [&](size_t i) {
    if (i == order.size()) {
      out.push_back(cur);
      return;
    }
    auto [d, name] = order[i];
    for (const Atom& x : C.cells.elements) {
      if (C.stage(x) != d) continue;
      if (d >= 1 && (C.src.at(x) != cur.at(hat_s(name)) || C.tgt.at(x) != cur.at(hat_t(name))))
        continue;
      cur[name] = x;
      go(i + 1);
      cur.erase(name);
    }
  };
  go(0);
  return out;
}

// shape of the composite of a labelling
inline BTree composite_shape(const Collection& C, const BTree& tau,
                             const std::map<Atom, Atom>& M) {
  std::map<Atom, BTree> shapes;
  for (const auto& [name, cell] : M) shapes[name] = C.shape.at(cell);
  return btree_substitute(tau, shapes);
}

// composition through the recorded table; throws on missing entries
inline Atom operad_compose(const BOperad& C, const Atom& outer, const std::map<Atom, Atom>& M) {
  if (!labelling_ok(C, C.shape.at(outer), M))
    throw std::runtime_error("operad_compose: invalid labelling for " + outer);
  auto r = C.compose(outer, M);
  if (!r) throw std::runtime_error("operad_compose: no entry for " + outer);
  return *r;
}

// ---------------------------------------------------------------------------
// Matching pairs and contractions.
// ---------------------------------------------------------------------------

inline std::vector<std::pair<Atom, Atom>> matching_pairs(const Collection& C, const BTree& sigma) {
  std::vector<std::pair<Atom, Atom>> out;
  for (const Atom& f : C.cells_over(sigma))
    for (const Atom& g : C.cells_over(sigma)) {
      if (sigma.stage >= 1 && (C.src.at(f) != C.src.at(g) || C.tgt.at(f) != C.tgt.at(g)))
        continue;
      out.push_back({f, g});
    }
  return out;
}

struct ContractionSearch {
  long long count = 1;  // number of contractions within the bounds (capped)
  std::map<std::string, Atom> witness;  // (tau,f,f') key -> chosen filler, when count >= 1
};

inline std::string contraction_key(const BTree& tau, const Atom& f, const Atom& g) {
  return enc(Term::node("p", {Term::atom(bt_atom(tau)), Term::atom(f), Term::atom(g)}));
}

inline ContractionSearch find_contractions(const Collection& C, int stage_bound, int size_bound) {
  ContractionSearch r;
  const long long CAP = 1000000;
  for (int n = 1; n <= std::min(stage_bound, C.N); ++n)
    for (const BTree& tau : btrees(n, size_bound))
      for (const auto& [f, g] : matching_pairs(C, btree_boundary(tau))) {
        std::vector<Atom> fillers;
        for (const Atom& c : C.cells_over(tau))
          if (C.src.at(c) == f && C.tgt.at(c) == g) fillers.push_back(c);
        r.count = std::min(CAP, r.count * static_cast<long long>(fillers.size()));
        if (fillers.empty()) {
          r.witness.clear();
          return r;  // count is 0
        }
        r.witness[contraction_key(tau, f, g)] = fillers.front();
      }
  return r;
}

// ---------------------------------------------------------------------------
// The terminal operad: one cell per tree, composition = tree substitution.
// ---------------------------------------------------------------------------

inline BOperad terminal_boperad(int N, int size_bound, bool with_comp = true) {
  BOperad T;
  T.N = N;
  for (int n = 0; n <= N; ++n)
    for (const BTree& tau : btrees(n, size_bound)) {
      Atom c = bt_atom(tau);
      T.cells.elements.push_back(c);
      T.shape[c] = tau;
      if (n >= 1) {
        Atom b = bt_atom(btree_boundary(tau));
        T.src[c] = b;
        T.tgt[c] = b;
      }
      if (tau == upsilon(n)) T.ids[n] = c;
    }
  std::sort(T.cells.elements.begin(), T.cells.elements.end());
  if (!with_comp) return T;
  for (const Atom& outer : T.cells.elements)
    for (const auto& M : cell_labellings(T, T.shape.at(outer))) {
      BTree z = composite_shape(T, T.shape.at(outer), M);
      if (bt_size(z) > size_bound) continue;
      T.comp[{outer, lab_key(M)}] = bt_atom(z);
    }
  return T;
}

// ---------------------------------------------------------------------------
// Operad law checking over the recorded composition table.
// ---------------------------------------------------------------------------

inline CheckReport check_boperad(const BOperad& C) {
  CheckReport rep = C.validate();
  // identity shapes
  for (const auto& [n, c] : C.ids)
    if (C.shape.at(c) != upsilon(n)) rep.fail("identity shape at dim " + std::to_string(n));
  // unit laws
  for (const Atom& f : C.cells.elements) {
    std::map<Atom, Atom> idlab;
    bool ok = true;
    for (const auto& dim : hat_cells(C.shape.at(f))) {
      for (const Atom& x : dim) {
        int d = static_cast<int>(std::count(x.begin(), x.end(), '.'));
        auto it = C.ids.find(d);
        if (it == C.ids.end()) ok = false;
        else idlab[x] = it->second;
      }
    }
    if (ok) {
      auto r = C.compose(f, idlab);
      if (r && *r != f) rep.fail("right unit law fails at " + f);
    }
    int n = C.stage(f);
    auto idn = C.ids.find(n);
    if (idn != C.ids.end()) {
      // the straight-tree labelling picking out f and its boundary tower
      std::map<Atom, Atom> M;
      M[hat_top(n)] = f;
      Atom s = f, t = f;
      for (int d = n - 1; d >= 0; --d) {
        s = C.src.at(s);
        t = C.tgt.at(t);
        std::string p;
        for (int i = 0; i < d; ++i) p += "c0.";
        M[p + "v0"] = s;
        M[p + "v1"] = t;
      }
      if (labelling_ok(C, upsilon(n), M)) {
        auto r = C.compose(idn->second, M);
        if (r && *r != f) rep.fail("left unit law fails at " + f);
      }
    }
  }
  // recorded composites live over the substituted tree
  for (const auto& [key, z] : C.comp) {
    BTree want = composite_shape(C, C.shape.at(key.first), lab_unkey(key.second));
    if (C.shape.at(z) != want) rep.fail("composite shape mismatch at " + key.first);
  }
  if (!rep.ok()) return rep;
  // associativity on recorded double composites
  for (const auto& [key, z] : C.comp) {
    const auto& [outer, mkey] = key;
    std::map<Atom, Atom> M = lab_unkey(mkey);
    const BTree& tau = C.shape.at(outer);
    for (const auto& [key2, w] : C.comp) {
      if (key2.first != z) continue;
      std::map<Atom, Atom> Nl = lab_unkey(key2.second);
      // flatten: relabel tau's glob with composites of the labels
      std::map<Atom, BTree> shapes;
      for (const auto& [name, cell] : M) shapes[name] = C.shape.at(cell);
      SubstResult se = subst_with_embedding(tau, shapes);
      std::map<Atom, Atom> MN;
      bool ok = true;
      for (const auto& [name, cell] : M) {
        std::map<Atom, Atom> sub;
        for (const auto& [a, b] : se.emb.at(name)) sub[a] = Nl.at(b);
        auto r = C.compose(cell, sub);
        if (!r) {
          ok = false;
          break;
        }
        MN[name] = *r;
      }
      if (!ok) continue;
      auto lhs = C.compose(outer, MN);
      if (lhs && *lhs != w) rep.fail("associativity fails at " + outer);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// K, the initial operad-with-contraction, generated within bounds. Cells are
// self-describing normal-form terms:
//   i[n]                      identity at dimension n
//   k[stage,tree,f,f']        contraction generator over `tree`
//   c[gen, name1,cell1, ...]  a generator applied to a non-identity labelling
//   q[stage,tree,f,f']        top-dimension cell of the truncated variant,
//                             where matching pairs are identified
// ---------------------------------------------------------------------------

inline Atom kc_id(int n) { return enc(Term::node("i", {Term::atom(std::to_string(n))})); }
inline Atom kc_gen(const BTree& tau, const Atom& f, const Atom& g) {
  return enc(Term::node("k", {Term::atom(std::to_string(tau.stage)), Term::atom(enc(tau.t)),
                              Term::atom(f), Term::atom(g)}));
}
inline Atom kc_q(const BTree& tau, const Atom& f, const Atom& g) {
  return enc(Term::node("q", {Term::atom(std::to_string(tau.stage)), Term::atom(enc(tau.t)),
                              Term::atom(f), Term::atom(g)}));
}

inline BTree kc_shape(const Atom& cell);
inline Atom kc_src(const Atom& cell);
inline Atom kc_tgt(const Atom& cell);
inline Atom kc_compose(const Atom& outer, const std::map<Atom, Atom>& M);

namespace detail {
inline std::map<Atom, Atom> kc_complab(const Term& t) {
  std::map<Atom, Atom> M;
  for (size_t i = 1; i + 1 < t.kids.size(); i += 2) M[t.kids[i].head] = t.kids[i + 1].head;
  return M;
}
inline Atom kc_boundary(const Atom& cell, bool src_side) {
  Term t = oforge::parse_term(cell);
  if (t.head == "i") return kc_id(std::stoi(t.kids[0].head) - 1);
  if (t.head == "k" || t.head == "q") return src_side ? t.kids[2].head : t.kids[3].head;
  // composite: compose the outer generator's boundary with the boundary labels
  Atom g = t.kids[0].head;
  std::map<Atom, Atom> M = kc_complab(t);
  BTree tau = kc_shape(g);
  CellMap inc = boundary_inclusion(tau, src_side);
  std::map<Atom, Atom> Mb;
  for (const auto& [a, b] : inc) Mb[a] = M.at(b);
  return kc_compose(kc_boundary(g, src_side), Mb);
}
}  // namespace detail

inline BTree kc_shape(const Atom& cell) {
  Term t = parse_term(cell);
  if (t.head == "i") return upsilon(std::stoi(t.kids[0].head));
  if (t.head == "k" || t.head == "q") return {std::stoi(t.kids[0].head), parse_term(t.kids[1].head)};
  Atom g = t.kids[0].head;
  std::map<Atom, Atom> M = detail::kc_complab(t);
  std::map<Atom, BTree> shapes;
  for (const auto& [name, c] : M) shapes[name] = kc_shape(c);
  return btree_substitute(kc_shape(g), shapes);
}
inline Atom kc_src(const Atom& cell) { return detail::kc_boundary(cell, true); }
inline Atom kc_tgt(const Atom& cell) { return detail::kc_boundary(cell, false); }

inline int kc_gens(const Atom& cell) {
  Term t = parse_term(cell);
  if (t.head == "i") return 0;
  if (t.head == "k" || t.head == "q") return 1 + kc_gens(t.kids[2].head) + kc_gens(t.kids[3].head);
  int n = kc_gens(t.kids[0].head);
  for (size_t i = 2; i < t.kids.size(); i += 2) n += kc_gens(t.kids[i].head);
  return n;
}

// composition with unit/associativity normalization
inline Atom kc_compose(const Atom& outer, const std::map<Atom, Atom>& M) {
  Term t = parse_term(outer);
  if (t.head == "i") return M.at(hat_top(std::stoi(t.kids[0].head)));
  if (t.head == "q") {
    // top-dimension truncated cells are determined by shape and boundary
    BTree tau = kc_shape(outer);
    std::map<Atom, BTree> shapes;
    for (const auto& [name, c] : M) shapes[name] = kc_shape(c);
    SubstResult se = subst_with_embedding(tau, shapes);
    CellMap is = detail::boundary_inclusion(tau, true), it = detail::boundary_inclusion(tau, false);
    std::map<Atom, Atom> Ms, Mt;
    for (const auto& [a, b] : is) Ms[a] = M.at(b);
    for (const auto& [a, b] : it) Mt[a] = M.at(b);
    return kc_q(se.tree, kc_compose(kc_src(outer), Ms), kc_compose(kc_tgt(outer), Mt));
  }
  if (t.head == "k") {
    bool all_id = true;
    for (const auto& [name, c] : M) {
      Term lt = parse_term(c);
      all_id &= (lt.head == "i");
    }
    if (all_id) return outer;
    std::vector<Term> kids{Term::atom(outer)};
    for (const auto& [name, c] : M) {
      kids.push_back(Term::atom(name));
      kids.push_back(Term::atom(c));
    }
    return enc(Term::node("c", std::move(kids)));
  }
  // flatten c[g, L] against M
  Atom g = t.kids[0].head;
  std::map<Atom, Atom> L = detail::kc_complab(t);
  std::map<Atom, BTree> shapes;
  for (const auto& [name, c] : L) shapes[name] = kc_shape(c);
  SubstResult se = subst_with_embedding(kc_shape(g), shapes);
  std::map<Atom, Atom> L2;
  for (const auto& [name, c] : L) {
    std::map<Atom, Atom> sub;
    for (const auto& [a, b] : se.emb.at(name)) sub[a] = M.at(b);
    L2[name] = kc_compose(c, sub);
  }
  return kc_compose(g, L2);
}

struct KFragment {
  BOperad op;
  std::map<std::string, Atom> contraction;  // contraction_key -> psi cell
};

struct KOptions {
  int dim_bound = 2;
  int size_bound = 3;
  int gen_bound = 3;
  std::function<bool(const BTree&)> contract_trees;  // generator trees filter; default all
  std::function<bool(const BTree&)> shape_filter;    // admissible cell shapes; default all
  int truncate_at = -1;                              // n of generate_K_n; -1 = none
};

inline KFragment generate_K(const KOptions& opt) {
  KFragment K;
  K.op.N = opt.dim_bound;
  auto add_cell = [&](const Atom& c) -> bool {
    auto& es = K.op.cells.elements;
    auto it = std::lower_bound(es.begin(), es.end(), c);
    if (it != es.end() && *it == c) return false;
    BTree sh = kc_shape(c);
    es.insert(it, c);
    K.op.shape[c] = sh;
    if (sh.stage >= 1) {
      K.op.src[c] = kc_src(c);
      K.op.tgt[c] = kc_tgt(c);
    }
    return true;
  };
  auto mk_top = [&](const BTree& tau, const Atom& f, const Atom& g) {
    return (opt.truncate_at == tau.stage) ? kc_q(tau, f, g) : kc_gen(tau, f, g);
  };
  auto shape_ok = [&](const BTree& s) { return !opt.shape_filter || opt.shape_filter(s); };
  for (int n = 0; n <= opt.dim_bound; ++n)
    if (n <= opt.size_bound) {
      // at the truncation dimension the identity is itself a quotient cell
      Atom idc = (opt.truncate_at == n && n >= 1) ? kc_q(upsilon(n), kc_id(n - 1), kc_id(n - 1))
                                                  : kc_id(n);
      add_cell(idc);
      K.op.ids[n] = idc;
    }
  bool grew = true;
  while (grew) {
    grew = false;
    // contraction step
    for (int n = 1; n <= opt.dim_bound; ++n)
      for (const BTree& tau : btrees(n, opt.size_bound)) {
        if (!shape_ok(tau)) continue;
        if (opt.contract_trees && !opt.contract_trees(tau)) continue;
        for (const auto& [f, g] : matching_pairs(K.op, btree_boundary(tau))) {
          Atom psi = mk_top(tau, f, g);
          if (kc_gens(psi) > opt.gen_bound) continue;
          grew |= add_cell(psi);
          K.contraction[contraction_key(tau, f, g)] = psi;
        }
      }
    // composition step
    std::vector<Atom> outers = K.op.cells.elements;
    for (const Atom& outer : outers)
      for (const auto& M : cell_labellings(K.op, K.op.shape.at(outer))) {
        if (K.op.comp.count({outer, lab_key(M)})) continue;
        BTree z = composite_shape(K.op, K.op.shape.at(outer), M);
        if (bt_size(z) > opt.size_bound || !shape_ok(z)) continue;
        Atom c = kc_compose(outer, M);
        if (kc_gens(c) > opt.gen_bound) continue;
        add_cell(c);
        K.op.comp[{outer, lab_key(M)}] = c;
        grew = true;  // new table entry
      }
  }
  return K;
}

inline KFragment generate_K_n(int n, KOptions opt) {
  opt.dim_bound = std::min(opt.dim_bound, n);
  opt.truncate_at = n;
  return generate_K(opt);
}

// ---------------------------------------------------------------------------
// Algebras: an action table (cell, labelling of its glob in X) -> X cell.
// ---------------------------------------------------------------------------

struct BAlgebra {
  GlobSet X;
  std::map<std::pair<Atom, std::string>, Atom> act;
};

inline Atom algebra_eval(const BOperad& C, const BAlgebra& A, const Atom& f,
                         const std::map<Atom, Atom>& lab) {
  auto it = A.act.find({f, lab_key(lab)});
  if (it == A.act.end()) throw std::runtime_error("algebra_eval: missing entry for " + f);
  return it->second;
}

inline CheckReport check_balgebra(const BOperad& C, const BAlgebra& A) {
  CheckReport rep;
  // identities act as projections
  for (const auto& [n, idc] : C.ids)
    for (const auto& lab : labellings(A.X, upsilon(n))) {
      auto it = A.act.find({idc, lab_key(lab)});
      if (it != A.act.end() && it->second != lab.at(hat_top(n)))
        rep.fail("identity action fails at dim " + std::to_string(n));
    }
  // recorded composites evaluate to nested evaluation
  for (const auto& [key, z] : C.comp) {
    const auto& [outer, mkey] = key;
    std::map<Atom, Atom> M = lab_unkey(mkey);
    const BTree& tau = C.shape.at(outer);
    std::map<Atom, BTree> shapes;
    for (const auto& [name, cell] : M) shapes[name] = C.shape.at(cell);
    SubstResult se = subst_with_embedding(tau, shapes);
    for (const auto& lab : labellings(A.X, se.tree)) {
      auto zit = A.act.find({z, lab_key(lab)});
      if (zit == A.act.end()) continue;
      std::map<Atom, Atom> inner;
      bool ok = true;
      for (const auto& [name, cell] : M) {
        std::map<Atom, Atom> sub;
        for (const auto& [a, b] : se.emb.at(name)) sub[a] = lab.at(b);
        auto it = A.act.find({cell, lab_key(sub)});
        if (it == A.act.end()) {
          ok = false;
          break;
        }
        inner[name] = it->second;
      }
      if (!ok) continue;
      auto fit = A.act.find({outer, lab_key(inner)});
      if (fit != A.act.end() && fit->second != zit->second)
        rep.fail("composite action mismatch at " + outer);
    }
  }
  return rep;
}

}  // namespace oforge

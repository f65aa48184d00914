// Cartesian-monad instances on finite sets with size-bounded enumeration and
// law / cartesianness checking. Elements of T X are Terms whose leaves are
// atoms of X; elements of T T X are Terms whose leaves are *encodings* of
// elements of T X, and so on up.
#pragma once
#include "finbase.hpp"
#include "term.hpp"

#include <functional>
#include <memory>
#include <sstream>

namespace oforge {

using AtomCost = std::function<int(const Atom&)>;

inline AtomCost unit_cost() {
  return [](const Atom&) { return 1; };
}

struct CheckReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
  void fail(std::string why) { failures.push_back(std::move(why)); }
};

class Monad {
 public:
  virtual ~Monad() = default;
  virtual std::string name() const = 0;

  // Size of an element when every leaf costs `cost(leaf)`; plain size uses cost 1.
  virtual int wsize(const Term& e, const AtomCost& cost) const = 0;
  int size(const Term& e) const { return wsize(e, unit_cost()); }

  // All elements of T X with wsize <= bound, canonically ordered.
  virtual std::vector<Term> enumerate(const FinSet& X, int bound,
                                      const AtomCost& cost) const = 0;
  std::vector<Term> enumerate(const FinSet& X, int bound) const {
    return enumerate(X, bound, unit_cost());
  }

  virtual Term unit(const Atom& x) const = 0;

  // mult: leaves of e are encodings of T-elements one level down.
  virtual Term mult(const Term& e) const = 0;

  // Instance-specific canonical form (identity except for multisets).
  virtual Term canon(Term e) const { return e; }

  // T f: relabel leaves.
  Term map_with(const std::function<Atom(const Atom&)>& f, const Term& e) const {
    Term r = e;
    relabel(r, f);
    return canon(std::move(r));
  }
  Term map(const FinMap& f, const Term& e) const {
    return map_with([&](const Atom& a) { return f(a); }, e);
  }

  // Carve `whole` in T A into pieces matching the leaves of `outer` in T B,
  // where `whole` = mult(outer with leaf i replaced by piece i) and piece i has
  // the shape of piece_shapes[i]. Inverse of one mult step; well defined for
  // the cartesian instances.
  virtual std::vector<Term> split(const Term& whole, const Term& outer,
                                  const std::vector<Term>& piece_shapes) const = 0;

 protected:
  static void relabel(Term& t, const std::function<Atom(const Atom&)>& f) {
    if (t.leaf) {
      t.head = f(t.head);
      return;
    }
    for (Term& k : t.kids) relabel(k, f);
  }
};

// --- helpers ----------------------------------------------------------------

inline void collect_leaves(const Term& t, std::vector<const Term*>& out) {
  if (t.leaf) {
    out.push_back(&t);
    return;
  }
  for (const Term& k : t.kids) collect_leaves(k, out);
}

inline std::vector<Atom> leaf_atoms(const Term& t) {
  std::vector<const Term*> ls;
  collect_leaves(t, ls);
  std::vector<Atom> r;
  r.reserve(ls.size());
  for (auto* p : ls) r.push_back(p->head);
  return r;
}

// --- instances --------------------------------------------------------------

class IdentityMonad final : public Monad {
 public:
  using Monad::enumerate;
  std::string name() const override { return "identity"; }
  int wsize(const Term& e, const AtomCost& c) const override { return c(e.head); }
  std::vector<Term> enumerate(const FinSet& X, int bound, const AtomCost& c) const override {
    std::vector<Term> r;
    for (const Atom& x : X.elements)
      if (c(x) <= bound) r.push_back(Term::atom(x));
    sort_terms(r);
    return r;
  }
  Term unit(const Atom& x) const override { return Term::atom(x); }
  Term mult(const Term& e) const override {
    if (!e.leaf) throw std::runtime_error("identity mult: malformed element");
    return parse_term(e.head);
  }
  std::vector<Term> split(const Term& whole, const Term&, const std::vector<Term>&) const override {
    return {whole};
  }
};

class MaybePointMonad final : public Monad {
 public:
  using Monad::enumerate;
  std::string name() const override { return "maybe-point"; }
  int wsize(const Term& e, const AtomCost& c) const override {
    return e.leaf ? c(e.head) : 1;
  }
  std::vector<Term> enumerate(const FinSet& X, int bound, const AtomCost& c) const override {
    std::vector<Term> r;
    if (bound >= 1) r.push_back(Term::node("inr"));
    for (const Atom& x : X.elements)
      if (c(x) <= bound) r.push_back(Term::atom(x));
    sort_terms(r);
    return r;
  }
  Term unit(const Atom& x) const override { return Term::atom(x); }
  Term mult(const Term& e) const override {
    if (!e.leaf) return e;  // inr stays inr
    return parse_term(e.head);
  }
  std::vector<Term> split(const Term& whole, const Term& outer, const std::vector<Term>&) const override {
    if (!outer.leaf) return {};  // outer = inr has no leaf slots
    return {whole};
  }
};

class FreeMonoidMonad final : public Monad {
 public:
  using Monad::enumerate;
  std::string name() const override { return "free-monoid"; }
  int wsize(const Term& e, const AtomCost& c) const override {
    check_word(e);
    int s = 0;
    for (const Term& k : e.kids) s += c(k.head);
    return s;
  }
  std::vector<Term> enumerate(const FinSet& X, int bound, const AtomCost& c) const override {
    std::vector<Term> r;
    std::vector<Term> cur;
    gen(X, bound, c, cur, r);
    sort_terms(r);
    return r;
  }
  Term unit(const Atom& x) const override { return Term::node("s", {Term::atom(x)}); }
  Term mult(const Term& e) const override {
    check_word(e);
    std::vector<Term> out;
    for (const Term& k : e.kids) {
      Term w = parse_term(k.head);
      check_word(w);
      for (Term& kk : w.kids) out.push_back(std::move(kk));
    }
    return Term::node("s", std::move(out));
  }
  std::vector<Term> split(const Term& whole, const Term& outer,
                          const std::vector<Term>& piece_shapes) const override {
    check_word(whole);
    check_word(outer);
    if (outer.kids.size() != piece_shapes.size())
      throw std::runtime_error("free-monoid split: arity mismatch");
    std::vector<Term> pieces;
    size_t pos = 0;
    for (const Term& sh : piece_shapes) {
      size_t len = sh.kids.size();
      if (pos + len > whole.kids.size())
        throw std::runtime_error("free-monoid split: word too short");
      std::vector<Term> blk(whole.kids.begin() + pos, whole.kids.begin() + pos + len);
      pieces.push_back(Term::node("s", std::move(blk)));
      pos += len;
    }
    if (pos != whole.kids.size()) throw std::runtime_error("free-monoid split: leftover letters");
    return pieces;
  }

 private:
  static void check_word(const Term& e) {
    if (e.leaf || e.head != "s") throw std::runtime_error("malformed word: " + enc(e));
    for (const Term& k : e.kids)
      if (!k.leaf) throw std::runtime_error("malformed word letter: " + enc(e));
  }
  static void gen(const FinSet& X, int budget, const AtomCost& c, std::vector<Term>& cur,
                  std::vector<Term>& out) {
    out.push_back(Term::node("s", cur));
    for (const Atom& x : X.elements) {
      int w = c(x);
      if (w <= budget) {
        cur.push_back(Term::atom(x));
        gen(X, budget - w, c, cur, out);
        cur.pop_back();
      }
    }
  }
};

// Negative control: multisets, canonicalized by sorting. Not cartesian.
class FreeCommMonoidMonad final : public Monad {
 public:
  using Monad::enumerate;
  std::string name() const override { return "free-comm-monoid"; }
  int wsize(const Term& e, const AtomCost& c) const override {
    check_bag(e);
    int s = 0;
    for (const Term& k : e.kids) s += c(k.head);
    return s;
  }
  std::vector<Term> enumerate(const FinSet& X, int bound, const AtomCost& c) const override {
    std::vector<Term> r;
    std::vector<Term> cur;
    gen(X, 0, bound, c, cur, r);
    sort_terms(r);
    return r;
  }
  Term unit(const Atom& x) const override { return Term::node("m", {Term::atom(x)}); }
  Term mult(const Term& e) const override {
    check_bag(e);
    std::vector<Term> out;
    for (const Term& k : e.kids) {
      Term w = parse_term(k.head);
      check_bag(w);
      for (Term& kk : w.kids) out.push_back(std::move(kk));
    }
    return canon(Term::node("m", std::move(out)));
  }
  Term canon(Term e) const override {
    if (!e.leaf && e.head == "m")
      std::sort(e.kids.begin(), e.kids.end(),
                [](const Term& a, const Term& b) { return a.head < b.head; });
    return e;
  }
  std::vector<Term> split(const Term&, const Term&, const std::vector<Term>&) const override {
    throw std::runtime_error("free-comm-monoid: split unsupported (non-cartesian control)");
  }

 private:
  static void check_bag(const Term& e) {
    if (e.leaf || e.head != "m") throw std::runtime_error("malformed bag: " + enc(e));
  }
  static void gen(const FinSet& X, size_t from, int budget, const AtomCost& c,
                  std::vector<Term>& cur, std::vector<Term>& out) {
    out.push_back(Term::node("m", cur));
    for (size_t i = from; i < X.elements.size(); ++i) {
      int w = c(X.elements[i]);
      if (w <= budget) {
        cur.push_back(Term::atom(X.elements[i]));
        gen(X, i, budget - w, c, cur, out);  // non-decreasing: canonical
        cur.pop_back();
      }
    }
  }
};

// Tree monad: one n-ary operation for every n, no equations. Elements are
// planar trees with X-labelled leaves; size counts nodes and leaves.
class TreeMonad final : public Monad {
 public:
  using Monad::enumerate;
  std::string name() const override { return "tree"; }
  int wsize(const Term& e, const AtomCost& c) const override {
    if (e.leaf) return c(e.head);
    int s = 1;
    for (const Term& k : e.kids) s += wsize(k, c);
    return s;
  }
  std::vector<Term> enumerate(const FinSet& X, int bound, const AtomCost& c) const override {
    std::vector<Term> r = gen(X, bound, c);
    sort_terms(r);
    return r;
  }
  Term unit(const Atom& x) const override { return Term::atom(x); }
  Term mult(const Term& e) const override {
    if (e.leaf) return parse_term(e.head);
    std::vector<Term> kids;
    kids.reserve(e.kids.size());
    for (const Term& k : e.kids) kids.push_back(mult(k));
    return Term::node("n", std::move(kids));
  }
  std::vector<Term> split(const Term& whole, const Term& outer,
                          const std::vector<Term>& piece_shapes) const override {
    std::vector<Term> pieces;
    walk(whole, outer, pieces);
    if (pieces.size() != piece_shapes.size())
      throw std::runtime_error("tree split: arity mismatch");
    return pieces;
  }

 private:
  static void walk(const Term& whole, const Term& outer, std::vector<Term>& out) {
    if (outer.leaf) {
      out.push_back(whole);
      return;
    }
    if (whole.leaf || whole.kids.size() != outer.kids.size())
      throw std::runtime_error("tree split: shape mismatch");
    for (size_t i = 0; i < outer.kids.size(); ++i) walk(whole.kids[i], outer.kids[i], out);
  }
  static std::vector<Term> gen(const FinSet& X, int budget, const AtomCost& c) {
    std::vector<Term> out;
    if (budget <= 0) return out;
    for (const Atom& x : X.elements)
      if (c(x) <= budget) out.push_back(Term::atom(x));
    // node with k children, total child budget = budget - 1
    std::vector<std::vector<Term>> lists = child_lists(X, budget - 1, c);
    for (auto& l : lists) out.push_back(Term::node("n", std::move(l)));
    return out;
  }
  static std::vector<std::vector<Term>> child_lists(const FinSet& X, int budget, const AtomCost& c) {
    std::vector<std::vector<Term>> out;
    out.push_back({});
    TreeMonad tm;
    for (int first = 1; first <= budget; ++first) {
      std::vector<Term> heads = gen(X, first, c);
      for (const Term& h : heads) {
        if (tm.wsize(h, c) != first) continue;  // partition by exact size
        for (auto& rest : child_lists(X, budget - first, c)) {
          std::vector<Term> l;
          l.reserve(rest.size() + 1);
          l.push_back(h);
          for (auto& r : rest) l.push_back(std::move(r));
          out.push_back(std::move(l));
        }
      }
    }
    return out;
  }
};

// --- nested enumeration -----------------------------------------------------

// Elements of T (T X) with total size <= bound: outer structure over the
// encodings of elements of T X, each leaf costing max(1, inner size).
inline std::vector<Term> enumerate_nested(const Monad& M, const FinSet& X, int bound) {
  std::vector<Term> inner = M.enumerate(X, bound);
  std::vector<Atom> atoms;
  std::map<Atom, int> cost;
  for (const Term& t : inner) {
    Atom a = enc(t);
    atoms.push_back(a);
    cost[a] = std::max(1, M.size(t));
  }
  FinSet TX(std::move(atoms));
  return M.enumerate(TX, bound, [cost](const Atom& a) { return cost.at(a); });
}

// Same one level further up: T (T (T X)).
inline std::vector<Term> enumerate_nested2(const Monad& M, const FinSet& X, int bound) {
  std::vector<Term> mid = enumerate_nested(M, X, bound);
  std::vector<Atom> atoms;
  std::map<Atom, int> cost;
  auto total = [&](const Term& t) {
    return M.wsize(t, [&](const Atom& a) { return std::max(1, M.size(parse_term(a))); });
  };
  for (const Term& t : mid) {
    Atom a = enc(t);
    atoms.push_back(a);
    cost[a] = std::max(1, total(t));
  }
  FinSet TTX(std::move(atoms));
  return M.enumerate(TTX, bound, [cost](const Atom& a) { return cost.at(a); });
}

// --- law checking -----------------------------------------------------------

inline CheckReport check_monad_laws(const Monad& M, const FinSet& X, int bound) {
  CheckReport rep;
  for (const Term& e : M.enumerate(X, bound)) {
    // mu . eta_{TX} = id
    Term lifted = M.unit(enc(e));
    if (M.mult(lifted) != e)
      rep.fail("left unit law fails at " + enc(e));
    // mu . T eta = id
    Term mapped = M.map_with([&](const Atom& x) { return enc(M.unit(x)); }, e);
    if (M.mult(mapped) != e)
      rep.fail("right unit law fails at " + enc(e));
  }
  for (const Term& v : enumerate_nested2(M, X, bound)) {
    Term lhs = M.mult(M.mult(v));  // mu . mu_T
    Term tmu = M.map_with([&](const Atom& a) { return enc(M.mult(parse_term(a))); }, v);
    Term rhs = M.mult(tmu);  // mu . T mu
    if (lhs != rhs)
      rep.fail("associativity fails at " + enc(v) + ": " + enc(lhs) + " vs " + enc(rhs));
  }
  return rep;
}

// All t in T(dom f) with T f (t) = u, found by filling each leaf position of u
// from the corresponding fibre of f.
inline std::vector<Term> tf_fiber(const Monad& M, const FinMap& f, const Term& u) {
  std::vector<const Term*> positions;
  collect_leaves(u, positions);
  std::map<Atom, std::vector<Atom>> fib;
  for (const Atom& a : f.dom.elements) fib[f(a)].push_back(a);
  std::vector<Term> out;
  std::vector<Atom> choice(positions.size());
  std::function<void(size_t)> go = [&](size_t i) {
    if (i == positions.size()) {
      size_t j = 0;
      Term t = M.map_with([&](const Atom&) { return choice[j++]; }, u);
      out.push_back(t);
      return;
    }
    auto it = fib.find(positions[i]->head);
    if (it == fib.end()) return;
    for (const Atom& a : it->second) {
      choice[i] = a;
      go(i + 1);
    }
  };
  go(0);
  sort_terms(out);
  return out;
}

namespace detail {
// Bijectivity of v |-> (first(v), second(v)) from `dom` onto `pairs`.
inline void check_bijection(CheckReport& rep, const std::string& what,
                            const std::vector<std::pair<std::string, std::string>>& images,
                            const std::set<std::pair<std::string, std::string>>& pairs) {
  std::map<std::pair<std::string, std::string>, int> hits;
  for (const auto& im : images) {
    if (!pairs.count(im)) continue;  // lands outside the bounded fibre product
    if (++hits[im] > 1)
      rep.fail(what + ": comparison not injective at (" + im.first + ", " + im.second + ")");
  }
  for (const auto& p : pairs)
    if (!hits.count(p))
      rep.fail(what + ": comparison not surjective at (" + p.first + ", " + p.second + ")");
}
}  // namespace detail

// Bounded check that eta- and mu-naturality squares at f are pullbacks and that
// T preserves a sample chosen pullback. Pass is evidence, fail is proof.
inline CheckReport check_cartesian(const Monad& M, const FinMap& f, int bound) {
  CheckReport rep;
  const FinSet& X = f.dom;
  const FinSet& Y = f.cod;

  {  // eta-naturality at f
    std::vector<std::pair<std::string, std::string>> images;
    for (const Atom& x : X.elements)
      images.push_back({f(x), enc(M.unit(x))});
    std::set<std::pair<std::string, std::string>> pairs;
    for (const Atom& y : Y.elements) {
      Term ey = M.unit(y);
      for (const Term& t : tf_fiber(M, f, ey))
        pairs.insert({y, enc(t)});
      // elements of T X of other shapes cannot hit eta(y); fibre covers all
    }
    // also scan bounded T X for stray matches (non-leaf-shaped eta images)
    for (const Term& t : M.enumerate(X, bound)) {
      Term im = M.map(f, t);
      for (const Atom& y : Y.elements)
        if (im == M.unit(y)) pairs.insert({y, enc(t)});
    }
    detail::check_bijection(rep, "eta-naturality", images, pairs);
  }

  {  // mu-naturality at f
    std::vector<std::pair<std::string, std::string>> images;
    for (const Term& v : enumerate_nested(M, X, bound)) {
      Term mu_v = M.mult(v);
      Term ttf_v = M.map_with([&](const Atom& a) { return enc(M.map(f, parse_term(a))); }, v);
      images.push_back({enc(mu_v), enc(ttf_v)});
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const Term& w : enumerate_nested(M, Y, bound)) {
      Term mu_w = M.mult(w);
      for (const Term& t : tf_fiber(M, f, mu_w))
        pairs.insert({enc(t), enc(w)});
    }
    detail::check_bijection(rep, "mu-naturality", images, pairs);
  }

  {  // T preserves the chosen kernel-pair square of f
    Pullback pb = pullback(f, f);
    std::vector<std::pair<std::string, std::string>> images;
    for (const Term& v : M.enumerate(pb.apex, bound))
      images.push_back({enc(M.map(pb.pA, v)), enc(M.map(pb.pB, v))});
    std::set<std::pair<std::string, std::string>> pairs;
    std::vector<Term> tx = M.enumerate(X, bound);
    for (const Term& u : tx) {
      Term fu = M.map(f, u);
      for (const Term& v : tx)
        if (M.map(f, v) == fu) pairs.insert({enc(u), enc(v)});
    }
    detail::check_bijection(rep, "pullback-preservation", images, pairs);
  }
  return rep;
}

}  // namespace oforge

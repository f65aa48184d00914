#include <catch2/catch_amalgamated.hpp>
#include <oforge/opetopia.hpp>

using namespace oforge;

// ---------------------------------------------------------------------------
// Independent oracle: planar trees as parenthesis strings. "*" is a leaf and
// "(t1...tk)" a node; size = leaves + nodes. All manipulation is done by
// string scanning, sharing no code with the library.
// ---------------------------------------------------------------------------
static void oracle_gen(int budget, std::vector<std::string>& out);
static void oracle_forests(int budget, std::vector<std::vector<std::string>>& out) {
  out.push_back({});
  for (int first = 1; first <= budget; ++first) {
    std::vector<std::string> heads;
    oracle_gen(first, heads);
    for (const std::string& h : heads) {
      int sz = 0;
      for (char c : h) sz += (c == '(' || c == '*');
      if (sz != first) continue;
      std::vector<std::vector<std::string>> rest;
      oracle_forests(budget - first, rest);
      for (auto& r : rest) {
        r.insert(r.begin(), h);
        out.push_back(std::move(r));
      }
    }
  }
}
static void oracle_gen(int budget, std::vector<std::string>& out) {
  if (budget >= 1) out.push_back("*");
  if (budget >= 1) {
    std::vector<std::vector<std::string>> fs;
    oracle_forests(budget - 1, fs);
    for (const auto& f : fs) {
      std::string s = "(";
      for (const auto& t : f) s += t;
      s += ")";
      out.push_back(s);
    }
  }
}
static std::vector<std::string> oracle_children(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  size_t start = 1;
  for (size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth == 0) {
      out.push_back(s.substr(start, i - start + 1));
      start = i + 1;
    }
  }
  return out;
}
static int oracle_leaves(const std::string& s) {
  int n = 0;
  for (char c : s) n += (c == '*');
  return n;
}
static int oracle_nodes(const std::string& s) {
  int n = 0;
  for (char c : s) n += (c == '(');
  return n;
}
// substitution at nodes (preorder): replace each node by its part, plugging
// the processed children into the part's leaves left to right
static std::string oracle_subst(const std::string& u, const std::vector<std::string>& parts,
                                size_t& next) {
  if (u == "*") return "*";
  std::string part = parts.at(next++);
  std::vector<std::string> kids;
  for (const std::string& c : oracle_children(u)) kids.push_back(oracle_subst(c, parts, next));
  std::string out;
  size_t j = 0;
  for (char c : part) {
    if (c == '*')
      out += kids.at(j++);
    else
      out += c;
  }
  return out;
}
static std::string to_string_tree(const Term& t) {
  if (t.leaf) return "*";
  std::string s = "(";
  for (const Term& k : t.kids) s += to_string_tree(k);
  return s + ")";
}

TEST_CASE("3-opetopes match the planar tree grammar with counts 2,2,6") {
  for (int b = 1; b <= 6; ++b) {
    std::vector<std::string> oracle;
    oracle_gen(b, oracle);
    std::sort(oracle.begin(), oracle.end());
    oracle.erase(std::unique(oracle.begin(), oracle.end()), oracle.end());
    auto ops = opetopes(3, b);
    REQUIRE(ops.size() == oracle.size());
    std::vector<std::string> got;
    for (const Opetope& o : ops) {
      CHECK(is_opetope(3, o.t));
      got.push_back(to_string_tree(pd3_to_pt(o.t)));
    }
    std::sort(got.begin(), got.end());
    CHECK(got == oracle);
  }
  auto count_size = [&](int s) {
    int n = 0;
    for (const Opetope& o : opetopes(3, s)) n += (op_size(o) == s);
    return n;
  };
  CHECK(count_size(1) == 2);
  CHECK(count_size(2) == 2);
  CHECK(count_size(3) == 6);
}

TEST_CASE("low dimensions: single opetopes and one 2-opetope per arity") {
  CHECK(opetopes(0, 1).size() == 1);
  CHECK(opetopes(0, 7).size() == 1);
  CHECK(opetopes(1, 3).size() == 1);
  auto dim2 = opetopes(2, 8);
  CHECK(dim2.size() == 9);
  for (int k = 0; k <= 8; ++k) CHECK(op2_arity(dim2[k].t) == k);
}

static Term pt(const std::string& s) {
  size_t i = 0;
  std::function<Term()> go = [&]() -> Term {
    if (s[i] == '*') {
      ++i;
      return pt_leaf();
    }
    ++i;  // '('
    std::vector<Term> kids;
    while (s[i] != ')') kids.push_back(go());
    ++i;
    return pt_node(std::move(kids));
  };
  return go();
}

TEST_CASE("boundary of a 3-opetope is the 2-opetope of its leaf count") {
  CHECK(op2_arity(boundary({3, pt_to_pd3(pt("((**)*)"))}).t) == 3);
  CHECK(op2_arity(boundary({3, pt_to_pd3(pt("()"))}).t) == 0);
  CHECK(boundary({2, op2(5)}) == Opetope{1, Term::atom("I")});
  for (const Term& t : ptrees(5))
    CHECK(op2_arity(boundary({3, pt_to_pd3(t)}).t) == pt_leaves(t));
}

TEST_CASE("grafting substitutes parts for leaves") {
  CHECK(pt_graft(pt("*"), {pt("((**)*)")}) == pt("((**)*)"));
  CHECK(pt_graft(pt("(**)"), {pt("*"), pt("*")}) == pt("(**)"));
  CHECK(pt_graft(pt("(**)"), {pt("(**)"), pt("*")}) == pt("((**)*)"));
  CHECK_THROWS(pt_graft(pt("(**)"), {pt("*")}));
  // leaf counts add up across all small pairs
  for (const Term& base : ptrees(5)) {
    std::vector<Term> parts;
    int expect = 0;
    for (int i = 0; i < pt_leaves(base); ++i) {
      const Term& p = i % 2 ? pt("(**)") : pt("()");
      parts.push_back(p);
      expect += pt_leaves(p);
    }
    CHECK(pt_leaves(pt_graft(base, parts)) == expect);
  }
}

TEST_CASE("planar trees round-trip through dim-3 pasting terms") {
  for (const Term& t : ptrees(6)) {
    Term pd = pt_to_pd3(t);
    CHECK(is_pd(2, pd));
    CHECK(pd3_to_pt(pd) == t);
    CHECK(pd_size(pd) == pt_size(t));
  }
}

TEST_CASE("4-opetopes are valid and have valid boundaries") {
  auto ops = opetopes(4, 3);
  CHECK(ops.size() > 2);
  for (const Opetope& o : ops) {
    CHECK(is_opetope(4, o.t));
    Opetope b = boundary(o);
    CHECK(b.dim == 3);
    CHECK(is_opetope(3, b.t));
  }
  // enumeration is deterministic and monotone in the bound
  auto again = opetopes(4, 3);
  REQUIRE(again.size() == ops.size());
  for (size_t i = 0; i < ops.size(); ++i) CHECK(again[i] == ops[i]);
  CHECK(opetopes(4, 4).size() > ops.size());
}

static long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TEST_CASE("pd_1 hom-sets are compositions, counted by stars and bars") {
  CHECK(pd_hom(1, op2(2), op2(2)).size() == 3);
  for (int m = 0; m <= 5; ++m)
    for (int n = 0; n <= 5; ++n) {
      long long expect = (n == 0) ? (m == 0 ? 1 : 0) : binom(m + n - 1, n - 1);
      INFO("Hom(" << m << "," << n << ")");
      CHECK(pd_hom(1, op2(m), op2(n)).size() == static_cast<size_t>(expect));
    }
}

// independent decomposition search over the string grammar
static int oracle_hom2(const std::string& t, const std::string& u) {
  std::vector<int> arities;
  std::function<void(const std::string&)> walk = [&](const std::string& s) {
    if (s == "*") return;
    auto cs = oracle_children(s);
    arities.push_back(static_cast<int>(cs.size()));
    for (const auto& c : cs) walk(c);
  };
  walk(u);
  int budget = oracle_nodes(t);
  int maxar = 0;
  for (int a : arities) maxar = std::max(maxar, a);
  std::vector<std::string> all;
  oracle_gen(budget + std::max(maxar, 1), all);
  int count = 0;
  std::function<void(size_t, int, std::vector<std::string>&)> assign =
      [&](size_t i, int spent, std::vector<std::string>& cur) {
        if (i == arities.size()) {
          size_t next = 0;
          if (oracle_subst(u, cur, next) == t) ++count;
          return;
        }
        for (const std::string& cand : all) {
          if (oracle_leaves(cand) != arities[i] || spent + oracle_nodes(cand) > budget) continue;
          cur.push_back(cand);
          assign(i + 1, spent + oracle_nodes(cand), cur);
          cur.pop_back();
        }
      };
  std::vector<std::string> cur;
  assign(0, 0, cur);
  return count;
}

TEST_CASE("pd_2 hom-sets match an independent decomposition search") {
  CHECK(pd_hom(2, pt("*"), pt("(*)")).size() == 1);       // the nullary case
  CHECK(pd_hom(2, pt("((**)*)"), pt("(***)")).size() == 1);  // total collapse
  for (const Term& t : ptrees(4))
    for (const Term& u : ptrees(4)) {
      INFO(to_string_tree(t) << " -> " << to_string_tree(u));
      CHECK(pd_hom(2, t, u).size() ==
            static_cast<size_t>(oracle_hom2(to_string_tree(t), to_string_tree(u))));
    }
}

TEST_CASE("contraction-only morphisms exclude unit parts") {
  CHECK(pd_hom(2, pt("*"), pt("(*)"), true).empty());
  auto full = pd_hom(2, pt("((*)*)"), pt("(**)"));
  auto restricted = pd_hom(2, pt("((*)*)"), pt("(**)"), true);
  CHECK(restricted.size() <= full.size());
  for (const PdMorphism& m : restricted)
    for (const Term& p : m.parts) CHECK(pt_nodes(p) >= 1);
}

TEST_CASE("pd_1 and pd_2 are categories on small objects") {
  SECTION("pd_1") {
    for (int m = 0; m <= 4; ++m) {
      PdMorphism id = pd_id(1, op2(m));
      for (int n = 0; n <= 4; ++n)
        for (const PdMorphism& f : pd_hom(1, op2(m), op2(n))) {
          CHECK(pd_compose(1, f, id) == f);
          CHECK(pd_compose(1, pd_id(1, op2(n)), f) == f);
        }
    }
    // associativity, and agreement with the simplex-category oracle
    for (const PdMorphism& f : pd_hom(1, op2(3), op2(2)))
      for (const PdMorphism& g : pd_hom(1, op2(2), op2(2)))
        for (const PdMorphism& h : pd_hom(1, op2(2), op2(1))) {
          PdMorphism lhs = pd_compose(1, h, pd_compose(1, g, f));
          PdMorphism rhs = pd_compose(1, pd_compose(1, h, g), f);
          CHECK(lhs == rhs);
          // oracle: a composition of compositions adds up blockwise
          int total = 0;
          for (const Term& p : lhs.parts) total += std::stoi(p.head);
          CHECK(total == 3);
        }
  }
  SECTION("pd_2") {
    auto objs = ptrees(3);
    std::map<std::pair<size_t, size_t>, std::vector<PdMorphism>> homs;
    for (size_t i = 0; i < objs.size(); ++i)
      for (size_t j = 0; j < objs.size(); ++j) homs[{i, j}] = pd_hom(2, objs[i], objs[j]);
    for (size_t i = 0; i < objs.size(); ++i) {
      PdMorphism id = pd_id(2, objs[i]);
      CHECK(pt_subst(objs[i], id.parts) == objs[i]);
      for (size_t j = 0; j < objs.size(); ++j)
        for (const PdMorphism& f : homs[{i, j}]) {
          CHECK(pd_compose(2, f, pd_id(2, objs[i])) == f);
          CHECK(pd_compose(2, pd_id(2, objs[j]), f) == f);
        }
    }
    for (size_t i = 0; i < objs.size(); ++i)
      for (size_t j = 0; j < objs.size(); ++j)
        for (size_t k = 0; k < objs.size(); ++k)
          for (const PdMorphism& f : homs[{i, j}])
            for (const PdMorphism& g : homs[{j, k}]) {
              PdMorphism gf = pd_compose(2, g, f);
              CHECK(pt_subst(objs[k], gf.parts) == objs[i]);
              for (size_t l = 0; l < objs.size(); ++l)
                for (const PdMorphism& h : homs[{k, l}])
                  CHECK(pd_compose(2, h, gf) ==
                        pd_compose(2, pd_compose(2, h, g), f));
            }
  }
}

TEST_CASE("composing collapses yields the total collapse") {
  // partial collapse ((())) -> (()), then total collapse (()) -> ()
  Term a = pt("((()))"), b = pt("(())"), c = pt("()");
  auto fs = pd_hom(2, a, b);
  auto gs = pd_hom(2, b, c);
  REQUIRE_FALSE(fs.empty());
  REQUIRE_FALSE(gs.empty());
  bool found = false;
  for (const PdMorphism& f : fs)
    for (const PdMorphism& g : gs) {
      PdMorphism gf = pd_compose(2, g, f);
      CHECK(pt_subst(c, gf.parts) == a);
      // total collapse: the single part is the whole domain
      if (gf.parts.size() == 1 && gf.parts[0] == a) found = true;
    }
  CHECK(found);
}

// ---------------------------------------------------------------------------
// Slicing.
// ---------------------------------------------------------------------------

static const IdentityMonad ID;
static const FreeMonoidMonad LIST;
static const TreeMonad TREE;

static Multicat cyclic_category(int n) {
  Multicat M;
  M.g.T = &ID;
  M.g.C0 = FinSet({"o"});
  for (int i = 0; i < n; ++i) {
    Atom g = "g" + std::to_string(i);
    M.g.C1.elements.push_back(g);
    M.g.d[g] = Term::atom("o");
    M.g.c[g] = "o";
  }
  M.ids["o"] = "g0";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M.comp[{"g" + std::to_string(i), "g" + std::to_string(j)}] =
          "g" + std::to_string((i + j) % n);
  return M;
}

TEST_CASE("the slice of Z/2 is the parity multicategory") {
  Multicat P = slice_plus(cyclic_category(2), 3);
  CHECK(P.g.C0.size() == 2);
  CHECK(check_multicategory(P).ok());
  // oracle: brute-force product check over all words of length <= 3
  std::vector<std::vector<int>> words{{}};
  for (size_t i = 0; i < words.size(); ++i) {
    if (words[i].size() >= 3) continue;
    for (int x : {0, 1}) {
      auto w = words[i];
      w.push_back(x);
      words.push_back(w);
    }
  }
  CHECK(P.g.C1.size() == words.size());
  for (const auto& w : words) {
    int sum = 0;
    std::vector<Term> ls;
    for (int x : w) {
      sum = (sum + x) % 2;
      ls.push_back(Term::atom("g" + std::to_string(x)));
    }
    Term d = Term::node("s", std::move(ls));
    int hits = 0;
    for (const Atom& cell : P.g.C1.elements)
      if (P.g.dom(cell) == d) {
        ++hits;
        CHECK(P.g.cod(cell) == "g" + std::to_string(sum));
      }
    CHECK(hits == 1);  // Hom(<m_1...m_k>; m) is a singleton exactly at the sum
  }
}

TEST_CASE("slicing the base by the parity opfibration returns the parity multicategory") {
  Multicat P = slice_plus(cyclic_category(2), 2);
  Multicat D = terminal_multicategory(LIST, 2);
  std::map<Atom, Atom> g0, g1;
  for (const Atom& o : P.g.C0.elements) g0[o] = "*";
  for (const Atom& cell : P.g.C1.elements) {
    std::vector<Term> stars(P.g.dom(cell).kids.size(), Term::atom("*"));
    g1[cell] = enc(Term::node("s", std::move(stars)));
  }
  MultiMap f{FinMap(P.g.C0, D.g.C0, g0), FinMap(P.g.C1, D.g.C1, g1)};
  Multicat E = slice_by_algebra(D, P, f);
  CHECK(E.g.C1 == P.g.C1);
  // identity slice: E = D via the identity is returned unchanged
  MultiMap idm{identity_map(D.g.C0), identity_map(D.g.C1)};
  CHECK(slice_by_algebra(D, D, idm).g.C1 == D.g.C1);
}

TEST_CASE("the slice of the terminal plain operad embeds the tree multicategory") {
  Multicat C = terminal_multicategory(LIST, 3);
  Multicat P = slice_plus(C, 3);
  CHECK(P.T().name() == "tree");
  Multicat TreeM = terminal_multicategory(TREE, 3);
  // each unlabelled tree becomes the configuration with one generator per node
  std::function<Term(const Term&)> to_fa = [&](const Term& t) -> Term {
    if (t.leaf) return fa_id("*");
    std::vector<Term> args;
    for (const Term& k : t.kids) args.push_back(Term::atom(enc(to_fa(k))));
    Atom gen;
    {
      std::vector<Term> stars(t.kids.size(), Term::atom("*"));
      gen = enc(Term::node("s", std::move(stars)));
    }
    return fa_app(gen, Term::node("s", std::move(args)));
  };
  std::set<Atom> image;
  for (const Atom& tc : TreeM.g.C1.elements) {
    Term t = parse_term(tc);
    Term fa = to_fa(t);
    INFO("tree " << tc);
    if (fa_size(fa) > 3) continue;
    REQUIRE(P.g.C1.contains(enc(fa)));
    image.insert(enc(fa));
    // the codomain is the arity cell of the tree's leaf count
    Atom cod = P.g.cod(enc(fa));
    CHECK(static_cast<int>(leaf_atoms(C.g.dom(cod)).size()) == pt_leaves(t));
  }
  CHECK(image.size() == TreeM.g.C1.size());  // faithful on every bounded tree
  // the substitution composition preserves codomains and has the singleton
  // generators as units on both sides
  REQUIRE_FALSE(P.comp.empty());
  for (const auto& [key, z] : P.comp) CHECK(P.g.c.at(z) == P.g.c.at(key.first));
  for (const Atom& cell : P.g.C1.elements) {
    Term cfg = P.T().map_with([&](const Atom& g) { return P.ids.at(g); }, P.g.d.at(cell));
    auto right = P.compose(cell, cfg);
    REQUIRE(right);
    CHECK(*right == cell);
    auto left = P.compose(P.ids.at(P.g.c.at(cell)), Term::atom(cell));
    REQUIRE(left);
    CHECK(*left == cell);
  }
}

TEST_CASE("slicing a discrete category yields identity-shaped configurations only") {
  Multicat C;
  C.g.T = &ID;
  C.g.C0 = FinSet({"A", "B"});
  C.g.C1 = FinSet({"iA", "iB"});
  C.g.d["iA"] = Term::atom("A");
  C.g.c["iA"] = "A";
  C.g.d["iB"] = Term::atom("B");
  C.g.c["iB"] = "B";
  C.ids["A"] = "iA";
  C.ids["B"] = "iB";
  C.comp[{"iA", "iA"}] = "iA";
  C.comp[{"iB", "iB"}] = "iB";
  Multicat P = slice_plus(C, 3);
  CHECK(check_multicategory(P).ok());
  // per object: the empty word and the constant words of length 1..3
  CHECK(P.g.C1.size() == 2 * 4);
  for (const Atom& cell : P.g.C1.elements) {
    std::set<Atom> letters;
    for (const Atom& a : leaf_atoms(P.g.dom(cell))) letters.insert(a);
    CHECK(letters.size() <= 1);
  }
}

TEST_CASE("bounded algebras of the parity slice are monoids over Z/2") {
  Multicat P = slice_plus(cyclic_category(2), 3);
  FinSet X({"x0", "x1"});
  int algebra_count = 0, monoid_count = 0;
  // candidates: a projection, a unit, and a binary table; the action folds
  for (int pbits = 0; pbits < 4; ++pbits)
    for (int e = 0; e < 2; ++e)
      for (int tbl = 0; tbl < 16; ++tbl) {
        auto proj = [&](int i) { return (pbits >> i) & 1; };
        auto mul = [&](int a, int b) { return (tbl >> (2 * a + b)) & 1; };
        // construct the fold algebra; skip if values land in the wrong fibre
        std::map<Atom, Atom> pg;
        for (int i = 0; i < 2; ++i) pg["x" + std::to_string(i)] = "g" + std::to_string(proj(i));
        SliceObj carrier(X, FinMap(X, P.g.C0, pg), P.g.C0);
        SliceObj B = blob_apply(P, carrier);
        std::map<Atom, Atom> hg;
        bool fits = true;
        for (const Atom& y : B.total.elements) {
          auto [xi_enc, cell] = split_pair(y);
          int acc = e;
          for (const Atom& x : leaf_atoms(parse_term(xi_enc))) acc = mul(acc, x.back() - '0');
          Atom val = "x" + std::to_string(acc);
          if (carrier.proj(val) != P.g.c_map()(cell)) {
            fits = false;
            break;
          }
          hg[y] = val;
        }
        if (!fits) continue;
        AlgebraStr alg{carrier, FinMap(B.total, X, std::move(hg))};
        bool is_alg = check_algebra(P, alg).ok();
        algebra_count += is_alg;
        // oracle: (X, e, mul) is a monoid and proj a homomorphism to Z/2
        bool monoid = true;
        for (int a = 0; a < 2; ++a) {
          monoid &= (mul(e, a) == a) && (mul(a, e) == a);
          for (int b = 0; b < 2; ++b) {
            monoid &= (proj(mul(a, b)) == (proj(a) + proj(b)) % 2);
            for (int c = 0; c < 2; ++c) monoid &= (mul(mul(a, b), c) == mul(a, mul(b, c)));
          }
        }
        monoid_count += monoid;
        CHECK(is_alg == monoid);
      }
  CHECK(algebra_count == monoid_count);
  CHECK(algebra_count > 0);
}

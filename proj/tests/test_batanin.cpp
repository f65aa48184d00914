#include <catch2/catch_amalgamated.hpp>
#include <oforge/batanin.hpp>

#include <numeric>

using namespace oforge;

namespace {

// tiny bracket parser: "o" token, "[a,b,...]" sequence; stage passed explicitly
Term bp_term(const std::string& s, size_t& i) {
  if (s[i] == 'o') {
    ++i;
    return Term::atom("o");
  }
  REQUIRE(s[i] == '[');
  ++i;
  std::vector<Term> kids;
  while (s[i] != ']') {
    kids.push_back(bp_term(s, i));
    if (s[i] == ',') ++i;
  }
  ++i;
  return Term::node("b", std::move(kids));
}
BTree bp(int stage, const std::string& s) {
  size_t i = 0;
  Term t = bp_term(s, i);
  return {stage, t};
}

long long binom(int n, int k) {
  if (k == 0) return 1;  // in particular the empty monotone map
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// independent count of stage-n trees of size <= s: towers of monotone maps
// between chains, i.e. level sizes m_1..m_n with sum <= s and a monotone map
// from each level into the one below (m_0 = 1)
long long delta_count(int n, int s) {
  std::vector<int> m(n + 1, 0);
  m[0] = 1;
  std::function<long long(int, int)> go = [&](int level, int left) -> long long {
    if (level > n) return 1;
    long long total = 0;
    for (int mk = 0; mk <= left; ++mk) {
      m[level] = mk;
      long long maps = binom(mk + m[level - 1] - 1, mk);
      if (maps) total += maps * go(level + 1, left - mk);
    }
    return total;
  };
  return go(1, s);
}

// identity labelling of a tree's glob: every d-cell gets the straight d-tree
std::map<Atom, BTree> straight_labels(const BTree& tau) {
  std::map<Atom, BTree> M;
  auto by_dim = hat_cells(tau);
  for (size_t d = 0; d < by_dim.size(); ++d)
    for (const Atom& c : by_dim[d]) M[c] = upsilon(static_cast<int>(d));
  return M;
}

long long catalan(int n) {
  std::vector<long long> c(n + 1, 0);
  c[0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = 0; j < i; ++j) c[i] += c[j] * c[i - 1 - j];
  return c[n];
}

}  // namespace

TEST_CASE("tree sizes, straight trees, boundaries and promotions") {
  CHECK(bt_size(btoken()) == 0);
  CHECK(bt_size(upsilon(3)) == 3);
  CHECK(bt_size(bp(2, "[[o,o,o],[],[o,o]]")) == 8);
  CHECK(upsilon(1) == bp(1, "[o]"));
  CHECK(upsilon(2) == bp(2, "[[o]]"));

  CHECK(btree_boundary(bp(1, "[o,o,o]")) == btoken());
  CHECK(btree_boundary(bp(2, "[[o,o,o],[],[o]]")) == bp(1, "[o,o,o]"));
  CHECK(btree_boundary(upsilon(3)) == upsilon(2));

  // the identity cylinder on the 3-edge path: three empty columns
  CHECK(bt_promote(bp(1, "[o,o,o]")) == bp(2, "[[],[],[]]"));
  CHECK(bt_promote(btoken()) == bp(1, "[]"));
  CHECK(btree_boundary(bt_promote(bp(1, "[o,o]"))) == bp(1, "[o,o]"));
}

TEST_CASE("tree enumeration matches direct chain-diagram counting") {
  for (int n = 0; n <= 3; ++n)
    for (int s = 0; s <= 5; ++s) {
      auto ts = btrees(n, s);
      std::set<BTree> distinct(ts.begin(), ts.end());
      CHECK(distinct.size() == ts.size());
      CHECK(static_cast<long long>(ts.size()) == delta_count(n, s));
      for (const BTree& t : ts) CHECK(bt_size(t) <= s);
    }
  CHECK(btrees(1, 3).size() == 4);  // paths with at most 3 edges
}

TEST_CASE("chain-diagram form round-trips and is monotone") {
  for (int n = 0; n <= 3; ++n)
    for (const BTree& t : btrees(n, 6)) {
      DeltaDiagram d = to_delta(t);
      REQUIRE(d.n == n);
      for (int k = 0; k < n; ++k)
        for (size_t i = 1; i < d.parent[k].size(); ++i)
          CHECK(d.parent[k][i - 1] <= d.parent[k][i]);
      CHECK(from_delta(d) == t);
    }
  // truncation of the diagram is the tree boundary
  for (const BTree& t : btrees(2, 5)) {
    DeltaDiagram d = to_delta(t);
    DeltaDiagram b{1, {d.parent[0]}};
    CHECK(from_delta(b) == btree_boundary(t));
  }
}

TEST_CASE("the glob of a tree has the advertised cells") {
  auto count = [](const BTree& t) {
    std::vector<size_t> c;
    for (const auto& dim : hat_cells(t)) c.push_back(dim.size());
    return c;
  };
  CHECK(count(bp(1, "[o,o,o]")) == std::vector<size_t>{4, 3});
  CHECK(count(upsilon(2)) == std::vector<size_t>{2, 2, 1});
  CHECK(count(bp(2, "[[o,o,o],[],[o,o]]")) == std::vector<size_t>{4, 8, 5});
  CHECK(count(btoken()) == std::vector<size_t>{1});

  CHECK(hat_s("c0.v0") == "v0");
  CHECK(hat_t("c0.v0") == "v1");
  CHECK(hat_s("c2.v1") == "v2");
  CHECK(hat_s("c0.c1.v0") == "c0.v1");
  CHECK(hat_t("c0.c1.v0") == "c0.v2");
  CHECK(hat_top(2) == "c0.c0.v0");

  for (int n = 1; n <= 3; ++n)
    for (const BTree& t : btrees(n, 5)) {
      GlobSet G = tau_hat(t);
      CHECK(check_globular(G).ok());
      REQUIRE(G.N == n);
      CHECK(G.cells[n].size() >= 0u);
    }
}

TEST_CASE("gluing trees along a shared boundary") {
  // dimension 0: concatenation
  CHECK(tensor(0, bp(1, "[o,o]"), bp(1, "[o]")) == bp(1, "[o,o,o]"));
  CHECK(tensor(0, bp(2, "[[o],[o,o]]"), bp(2, "[[o]]")) == bp(2, "[[o],[o,o],[o]]"));
  // dimension 1: column-wise concatenation
  CHECK(tensor(1, bp(2, "[[o],[o]]"), bp(2, "[[o,o],[]]")) == bp(2, "[[o,o,o],[o]]"));
  // oracle: independent column-zip over all compatible stage-2 pairs
  for (const BTree& a : btrees(2, 4))
    for (const BTree& b : btrees(2, 4)) {
      if (btree_boundary(a) != btree_boundary(b)) continue;
      std::vector<Term> kids;
      for (size_t i = 0; i < a.t.kids.size(); ++i) {
        std::vector<Term> col = a.t.kids[i].kids;
        for (const Term& k : b.t.kids[i].kids) col.push_back(k);
        kids.push_back(Term::node("b", std::move(col)));
      }
      CHECK(tensor(1, a, b) == bt_seq(2, std::move(kids)));
    }
  CHECK_THROWS(tensor(1, bp(2, "[[o],[o]]"), bp(2, "[[o]]")));
}

TEST_CASE("substituting trees into a tree") {
  // paths compose by adding lengths
  auto path = [](int k) {
    std::vector<Term> kids(k, Term::atom("o"));
    return bt_seq(1, std::move(kids));
  };
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b) {
      std::map<Atom, BTree> M{{"v0", btoken()}, {"v1", btoken()}, {"v2", btoken()},
                              {"c0.v0", path(a)}, {"c1.v0", path(b)}};
      CHECK(btree_substitute(bp(1, "[o,o]"), M) == path(a + b));
    }

  // straight labels are a unit
  for (int n = 0; n <= 3; ++n)
    for (const BTree& t : btrees(n, 4)) CHECK(btree_substitute(t, straight_labels(t)) == t);

  // substituting into the straight tree returns the label
  for (const BTree& s : btrees(2, 4)) {
    BTree b1 = btree_boundary(s);
    std::map<Atom, BTree> M{{"v0", btoken()}, {"v1", btoken()},
                            {"c0.v0", b1},    {"c0.v1", b1},
                            {"c0.c0.v0", s}};
    CHECK(btree_substitute(upsilon(2), M) == s);
  }

  // composing no 2-cells along a path promotes the path
  CHECK(btree_substitute(bp(2, "[[]]"),
                         {{"v0", btoken()}, {"v1", btoken()}, {"c0.v0", bp(1, "[o,o,o]")}}) ==
        bp(2, "[[],[],[]]"));

  // two stacked columns: glue the 2-dimensional labels vertically
  std::map<Atom, BTree> M{{"v0", btoken()},          {"v1", btoken()},
                          {"c0.v0", bp(1, "[o,o]")}, {"c0.v1", bp(1, "[o,o]")},
                          {"c0.v2", bp(1, "[o,o]")}, {"c0.c0.v0", bp(2, "[[o],[o]]")},
                          {"c0.c1.v0", bp(2, "[[o,o],[]]")}};
  CHECK(btree_substitute(bp(2, "[[o,o]]"), M) == bp(2, "[[o,o,o],[o]]"));

  // reassociation at the level of trees: nesting the first argument agrees
  // with flattening and padding with a straight edge
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int c = 1; c <= 2; ++c)
        for (int d = 1; d <= 2; ++d) {
          auto lab2 = [&](const BTree& x, const BTree& y) {
            return std::map<Atom, BTree>{{"v0", btoken()}, {"v1", btoken()}, {"v2", btoken()},
                                         {"c0.v0", x},     {"c1.v0", y}};
          };
          std::map<Atom, BTree> inner{{"v0", btoken()},  {"v1", btoken()},    {"v2", btoken()},
                                      {"v3", btoken()},  {"c0.v0", path(a)},  {"c1.v0", path(b)},
                                      {"c2.v0", path(c)}};
          BTree lhs = btree_substitute(bp(1, "[o,o]"),
                                       lab2(btree_substitute(bp(1, "[o,o,o]"), inner), path(d)));
          std::map<Atom, BTree> flat{{"v0", btoken()}, {"v1", btoken()}, {"v2", btoken()},
                                     {"v3", btoken()}, {"v4", btoken()}, {"c0.v0", path(a)},
                                     {"c1.v0", path(b)}, {"c2.v0", path(c)}, {"c3.v0", path(d)}};
          BTree rhs = btree_substitute(bp(1, "[o,o,o,o]"), flat);
          CHECK(lhs == rhs);
          CHECK(bt_size(lhs) == a + b + c + d);
        }

  CHECK_THROWS(btree_substitute(bp(1, "[o]"), {{"v0", btoken()}}));  // missing label
}

TEST_CASE("substitution commutes with the boundary") {
  for (const BTree& tau : btrees(2, 4)) {
    if (tau.t.kids.empty()) continue;
    // label 2-cells with stacks over their column boundary, 1-cells with paths
    std::map<Atom, BTree> M;
    auto by_dim = hat_cells(tau);
    for (const Atom& c : by_dim[0]) M[c] = btoken();
    for (const Atom& c : by_dim[1]) M[c] = bp(1, "[o,o]");
    for (const Atom& c : by_dim[2]) M[c] = bp(2, "[[o],[o]]");
    BTree z = btree_substitute(tau, M);
    for (bool side : {true, false}) {
      CellMap inc = detail::boundary_inclusion(tau, side);
      std::map<Atom, BTree> Mb;
      for (const auto& [a, b] : inc) Mb[a] = M.at(b);
      CHECK(btree_substitute(btree_boundary(tau), Mb) == btree_boundary(z));
    }
  }
}

TEST_CASE("labellings of a tree glob in a globular set") {
  // a two-object loop: walks of a fixed length
  GlobSet X;
  X.N = 1;
  X.cells = {FinSet({"a", "b"}), FinSet({"f", "g"})};
  X.src = {{{"f", "a"}, {"g", "b"}}};
  X.tgt = {{{"f", "b"}, {"g", "a"}}};
  REQUIRE(check_globular(X).ok());
  for (int k = 1; k <= 4; ++k) {
    std::vector<Term> kids(k, Term::atom("o"));
    auto L = labellings(X, bt_seq(1, kids));
    CHECK(L.size() == 2u);  // one walk from each starting object
  }
  CHECK(labellings(X, upsilon(2)).empty());  // no 2-cells to label with

  // in the terminal globular set the free cells are exactly the trees
  GlobSet One;
  One.N = 2;
  One.cells = {FinSet({"*"}), FinSet({"e"}), FinSet({"s"})};
  One.src = {{{"e", "*"}}, {{"s", "e"}}};
  One.tgt = {{{"e", "*"}}, {{"s", "e"}}};
  for (int n = 0; n <= 2; ++n) {
    auto free_cells = omega_free(One, n, 4);
    CHECK(free_cells.size() == btrees(n, 4).size());
  }
}

TEST_CASE("the one-cell-per-tree operad satisfies the operad laws") {
  BOperad T = terminal_boperad(2, 3);
  REQUIRE(T.validate().ok());
  CheckReport rep = check_boperad(T);
  CAPTURE(rep.failures);
  CHECK(rep.ok());
  // composition is tree substitution
  std::map<Atom, Atom> M{{"v0", bt_atom(btoken())},
                         {"v1", bt_atom(btoken())},
                         {"v2", bt_atom(btoken())},
                         {"c0.v0", bt_atom(bp(1, "[o,o]"))},
                         {"c1.v0", bt_atom(bp(1, "[o]"))}};
  CHECK(operad_compose(T, bt_atom(bp(1, "[o,o]")), M) == bt_atom(bp(1, "[o,o,o]")));

  // a corrupted table is caught
  BOperad bad = T;
  bad.comp[{bt_atom(bp(1, "[o,o]")), lab_key(M)}] = bt_atom(bp(1, "[o]"));
  CHECK_FALSE(check_boperad(bad).ok());
}

TEST_CASE("contraction search") {
  // the one-cell-per-tree operad admits exactly one contraction
  BOperad T = terminal_boperad(3, 4, /*with_comp=*/false);
  ContractionSearch r = find_contractions(T, 3, 4);
  CHECK(r.count == 1);
  CHECK_FALSE(r.witness.empty());

  // a matching pair with no filler kills the count
  Collection C;
  C.N = 1;
  C.cells = FinSet({"x"});
  C.shape["x"] = btoken();
  CHECK(find_contractions(C, 1, 2).count == 0);

  // two fillers for a single matching pair double it; the empty tree needs
  // its own filler
  Collection D;
  D.N = 1;
  D.cells = FinSet({"x", "u", "v", "n"});
  D.shape["x"] = btoken();
  D.shape["u"] = upsilon(1);
  D.shape["v"] = upsilon(1);
  D.shape["n"] = bp(1, "[]");
  D.src = {{"u", "x"}, {"v", "x"}, {"n", "x"}};
  D.tgt = {{"u", "x"}, {"v", "x"}, {"n", "x"}};
  CHECK(find_contractions(D, 1, 1).count == 2);
}

TEST_CASE("free contraction cells over paths with a binary generator count like bracketings") {
  KOptions opt;
  opt.dim_bound = 1;
  opt.size_bound = 4;
  opt.gen_bound = 3;
  opt.contract_trees = [](const BTree& t) { return t == bp(1, "[o,o]"); };
  KFragment K = generate_K(opt);
  for (int k = 1; k <= 4; ++k) {
    std::vector<Term> kids(k, Term::atom("o"));
    BTree path = bt_seq(1, kids);
    CHECK(static_cast<long long>(K.op.cells_over(path).size()) == catalan(k - 1));
  }
  REQUIRE(K.op.validate().ok());
  CheckReport rep = check_boperad(K.op);
  CAPTURE(rep.failures);
  CHECK(rep.ok());
}

TEST_CASE("small unrestricted fragments satisfy the operad laws") {
  KOptions opt;
  opt.dim_bound = 2;
  opt.size_bound = 2;
  opt.gen_bound = 2;
  KFragment K = generate_K(opt);
  REQUIRE(K.op.validate().ok());
  CheckReport rep = check_boperad(K.op);
  CAPTURE(rep.failures);
  CHECK(rep.ok());
  // contraction cells fill their matching pair
  for (const auto& [key, psi] : K.contraction) {
    Term k = parse_term(key);
    CHECK(K.op.src.at(psi) == k.kids[1].head);
    CHECK(K.op.tgt.at(psi) == k.kids[2].head);
  }
  REQUIRE_FALSE(K.contraction.empty());
}

TEST_CASE("the two interchange composites differ and a 3-cell joins them") {
  BTree two = bp(1, "[o,o]");
  BTree vert = bp(2, "[[o,o]]");
  BTree horiz = bp(2, "[[o],[o]]");
  BTree inter = bp(2, "[[o,o],[o,o]]");
  BTree cyl = bt_promote(inter);
  std::set<BTree> shapes{btoken(), upsilon(1), two, upsilon(2), vert, horiz, inter, cyl};
  KOptions opt;
  opt.dim_bound = 3;
  opt.size_bound = 6;
  opt.gen_bound = 16;
  opt.contract_trees = [=](const BTree& t) {
    return t == two || t == vert || t == horiz || t == cyl;
  };
  opt.shape_filter = [=](const BTree& t) { return shapes.count(t) > 0; };
  KFragment K = generate_K(opt);

  auto over = K.op.cells_over(inter);
  REQUIRE(over.size() == 2u);
  const Atom& g1 = over[0];
  const Atom& g2 = over[1];
  CHECK(g1 != g2);
  CHECK(K.op.src.at(g1) == K.op.src.at(g2));
  CHECK(K.op.tgt.at(g1) == K.op.tgt.at(g2));
  // one arises with the horizontal pairing outermost, the other vertical
  CHECK(parse_term(g1).head == "c");
  CHECK(parse_term(g2).head == "c");

  // the contraction supplies a cell between them one dimension up
  bool joined = false;
  for (const Atom& c : K.op.cells_over(cyl))
    joined |= (K.op.src.at(c) == g1 && K.op.tgt.at(c) == g2);
  CHECK(joined);

  // in the 2-truncated variant the two composites are identified
  KOptions opt2 = opt;
  opt2.gen_bound = 6;
  KFragment K2 = generate_K_n(2, opt2);
  CHECK(K2.op.cells_over(inter).size() == 1u);
  // below the top dimension the truncated fragment agrees
  for (const Atom& c : K2.op.cells.elements)
    if (K2.op.stage(c) <= 1) CHECK(K.op.cells.contains(c));
}

TEST_CASE("the 1-truncated fragment has one cell per path") {
  KOptions opt;
  opt.dim_bound = 1;
  opt.size_bound = 3;
  opt.gen_bound = 4;
  KFragment K1 = generate_K_n(1, opt);
  for (int k = 1; k <= 3; ++k) {
    std::vector<Term> kids(k, Term::atom("o"));
    CHECK(K1.op.cells_over(bt_seq(1, kids)).size() == 1u);
  }
}

TEST_CASE("the generated fragment maps uniquely into operads with contraction") {
  KOptions opt;
  opt.dim_bound = 1;
  opt.size_bound = 2;
  opt.gen_bound = 2;
  KFragment K = generate_K(opt);
  REQUIRE(K.op.cells.size() >= 8u);

  // target: unit and an idempotent over the single edge, one binary cell,
  // one nullary cell; composites collapse onto the marked cell of their shape
  BOperad B;
  B.N = 1;
  B.cells = FinSet({"i0", "u", "e", "m", "z"});
  B.shape = {{"i0", btoken()},
             {"u", upsilon(1)},
             {"e", upsilon(1)},
             {"m", bp(1, "[o,o]")},
             {"z", bp(1, "[]")}};
  B.src = {{"u", "i0"}, {"e", "i0"}, {"m", "i0"}, {"z", "i0"}};
  B.tgt = {{"u", "i0"}, {"e", "i0"}, {"m", "i0"}, {"z", "i0"}};
  B.ids = {{0, "i0"}, {1, "u"}};
  auto l1 = [](const Atom& x) {
    return std::map<Atom, Atom>{{"v0", "i0"}, {"v1", "i0"}, {"c0.v0", x}};
  };
  auto l2 = [](const Atom& x, const Atom& y) {
    return std::map<Atom, Atom>{{"v0", "i0"}, {"v1", "i0"}, {"v2", "i0"},
                                {"c0.v0", x}, {"c1.v0", y}};
  };
  auto marked = [](const Atom& x, const Atom& y) {  // collapse rule for m
    int len = (x != "z") + (y != "z");
    return len == 0 ? "z" : (len == 1 ? "e" : "m");
  };
  B.comp[{"i0", lab_key({{"v0", "i0"}})}] = "i0";
  B.comp[{"z", lab_key({{"v0", "i0"}})}] = "z";
  for (const Atom& x : std::vector<Atom>{"u", "e", "z"}) {
    B.comp[{"u", lab_key(l1(x))}] = x;
    B.comp[{"e", lab_key(l1(x))}] = (x == "z") ? "z" : "e";
    for (const Atom& y : std::vector<Atom>{"u", "e", "z"})
      B.comp[{"m", lab_key(l2(x, y))}] = marked(x, y);
  }
  {
    CheckReport rep = check_boperad(B);
    CAPTURE(rep.failures);
    REQUIRE(rep.ok());
  }
  // chosen contraction on the target
  std::map<std::string, Atom> psiB{{contraction_key(bp(1, "[]"), "i0", "i0"), "z"},
                                   {contraction_key(upsilon(1), "i0", "i0"), "e"},
                                   {contraction_key(bp(1, "[o,o]"), "i0", "i0"), "m"}};

  auto count_maps = [&](const BOperad& T, const std::map<std::string, Atom>& psiT) {
    std::vector<Atom> kcells = K.op.cells.elements;
    std::map<Atom, Atom> phi;
    int found = 0;
    std::function<void(size_t)> go = [&](size_t i) {
      if (i == kcells.size()) {
        // identities
        for (const auto& [n, idc] : K.op.ids)
          if (phi.at(idc) != T.ids.at(n)) return;
        // sources and targets
        for (const Atom& c : kcells)
          if (K.op.stage(c) >= 1 &&
              (T.src.at(phi.at(c)) != phi.at(K.op.src.at(c)) ||
               T.tgt.at(phi.at(c)) != phi.at(K.op.tgt.at(c))))
            return;
        // composition, where both sides are defined
        for (const auto& [key, z] : K.op.comp) {
          std::map<Atom, Atom> M = lab_unkey(key.second), Mt;
          for (const auto& [a, b] : M) Mt[a] = phi.at(b);
          auto r = T.compose(phi.at(key.first), Mt);
          if (r && *r != phi.at(z)) return;
        }
        // contraction
        for (const auto& [key, psi] : K.contraction) {
          Term k = parse_term(key);
          BTree tau = bt_from_atom(k.kids[0].head);
          auto it = psiT.find(contraction_key(tau, phi.at(k.kids[1].head), phi.at(k.kids[2].head)));
          if (it == psiT.end() || it->second != phi.at(psi)) return;
        }
        ++found;
        return;
      }
      const Atom& c = kcells[i];
      for (const Atom& x : T.cells.elements) {
        if (T.shape.at(x) != K.op.shape.at(c)) continue;
        phi[c] = x;
        go(i + 1);
        phi.erase(c);
      }
    };
    go(0);
    return found;
  };

  CHECK(count_maps(B, psiB) == 1);

  BOperad T1 = terminal_boperad(1, 2);
  ContractionSearch ct = find_contractions(T1, 1, 2);
  REQUIRE(ct.count == 1);
  CHECK(count_maps(T1, ct.witness) == 1);
}

TEST_CASE("algebras: parity evaluation of 2-dimensional diagrams") {
  // size 4 so that a flipped table entry is exposed inside a larger diagram
  BOperad T = terminal_boperad(2, 4);
  // one object, one edge, parity 2-cells: a strict 2-category
  BAlgebra A;
  A.X.N = 2;
  A.X.cells = {FinSet({"p"}), FinSet({"l"}), FinSet({"z0", "z1"})};
  A.X.src = {{{"l", "p"}}, {{"z0", "l"}, {"z1", "l"}}};
  A.X.tgt = {{{"l", "p"}}, {{"z0", "l"}, {"z1", "l"}}};
  REQUIRE(check_globular(A.X).ok());
  for (const Atom& f : T.cells.elements) {
    const BTree& tau = T.shape.at(f);
    for (const auto& lab : labellings(A.X, tau)) {
      if (tau.stage == 0) A.act[{f, lab_key(lab)}] = "p";
      else if (tau.stage == 1) A.act[{f, lab_key(lab)}] = "l";
      else {
        int parity = 0;
        auto hc = hat_cells(tau);
        for (const Atom& c : hc[2])
          if (lab.at(c) == "z1") parity ^= 1;
        A.act[{f, lab_key(lab)}] = parity ? "z1" : "z0";
      }
    }
  }
  CheckReport rep = check_balgebra(T, A);
  CAPTURE(rep.failures);
  CHECK(rep.ok());

  // an explicit nested evaluation: two odd cells stacked give an even one
  Atom stack = bt_atom(bp(2, "[[o,o]]"));
  std::map<Atom, Atom> lab{{"v0", "p"},      {"v1", "p"},      {"c0.v0", "l"},
                           {"c0.v1", "l"},   {"c0.v2", "l"},   {"c0.c0.v0", "z1"},
                           {"c0.c1.v0", "z1"}};
  CHECK(algebra_eval(T, A, stack, lab) == "z0");
  CHECK_THROWS(algebra_eval(T, A, "nope", lab));

  // flipping one table entry breaks compatibility
  BAlgebra bad = A;
  bad.act[{stack, lab_key(lab)}] = "z1";
  CHECK_FALSE(check_balgebra(T, bad).ok());
}

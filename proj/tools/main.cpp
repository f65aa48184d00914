// opetope-forge: enumeration, composition, law checking, K generation and
// rendering over the shape calculi in include/oforge, with JSON on stdin/stdout.
// Exit codes: 0 success, 1 law-check failure, 2 usage or input error.
#include <CLI11.hpp>
#include <json.hpp>

#include <oforge/batanin.hpp>
#include <oforge/finbase.hpp>
#include <oforge/freealg.hpp>
#include <oforge/monadkit.hpp>
#include <oforge/multicat.hpp>
#include <oforge/opetopia.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using json = nlohmann::ordered_json;
using namespace oforge;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- io ---------------------------------------------------------------------

std::string g_out_path;

void emit_text(const std::string& text) {
  if (g_out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(g_out_path);
  if (!f) throw InputError("cannot open output file: " + g_out_path);
  f << text << "\n";
}

void emit(const json& j) { emit_text(j.dump()); }

std::string g_inline_json;

json read_input() {
  std::string text = g_inline_json;
  if (text.empty()) {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad JSON input: ") + e.what());
  }
}

// --- planar trees -----------------------------------------------------------

json pt_to_json(const Term& t) {
  if (t.leaf) return "*";
  json arr = json::array();
  for (const Term& k : t.kids) arr.push_back(pt_to_json(k));
  return arr;
}

Term json_to_pt(const json& j) {
  if (j.is_string() && j.get<std::string>() == "*") return pt_leaf();
  if (j.is_array()) {
    std::vector<Term> kids;
    for (const auto& k : j) kids.push_back(json_to_pt(k));
    return pt_node(std::move(kids));
  }
  throw InputError("planar tree JSON must be \"*\" or an array: " + j.dump());
}

// --- bounded (stage-n) trees ------------------------------------------------

json bt_to_json(const Term& t) {
  if (t.leaf) return 0;
  json arr = json::array();
  for (const Term& k : t.kids) arr.push_back(bt_to_json(k));
  return arr;
}

json bt_to_json(const BTree& x) { return bt_to_json(x.t); }

int bt_json_depth(const json& j) {
  if (j.is_number()) return 0;
  if (!j.is_array()) throw InputError("tree JSON must be 0 or an array: " + j.dump());
  int d = 1;
  for (const auto& k : j) d = std::max(d, 1 + bt_json_depth(k));
  return d;
}

Term json_to_bt_term(const json& j, int stage) {
  if (stage == 0) {
    if (!j.is_number()) throw InputError("stage-0 tree must be the token 0: " + j.dump());
    return Term::atom("o");
  }
  if (!j.is_array()) throw InputError("stage-" + std::to_string(stage) +
                                      " tree must be an array: " + j.dump());
  std::vector<Term> kids;
  for (const auto& k : j) kids.push_back(json_to_bt_term(k, stage - 1));
  return Term::node("b", std::move(kids));
}

BTree json_to_bt(const json& j, int stage = -1) {
  if (stage < 0) stage = bt_json_depth(j);
  return {stage, json_to_bt_term(j, stage)};
}

// --- opetopes ---------------------------------------------------------------

json opetope_to_json(const Opetope& o) {
  json payload;
  switch (o.dim) {
    case 0: payload = "*"; break;
    case 1: payload = "I"; break;
    case 2: payload = op2_arity(o.t); break;
    case 3: payload = pt_to_json(pd3_to_pt(o.t)); break;
    default: payload = enc(o.t); break;
  }
  return json{{"dim", o.dim}, {"payload", payload}};
}

Opetope json_to_opetope(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("payload"))
    throw InputError("opetope JSON must be {\"dim\":n,\"payload\":...}");
  int dim = j.at("dim").get<int>();
  const json& p = j.at("payload");
  switch (dim) {
    case 0: return {0, Term::atom("*")};
    case 1: return {1, Term::atom("I")};
    case 2: return {2, op2(p.get<int>())};
    case 3: return {3, pt_to_pd3(json_to_pt(p))};
    default: return {dim, parse_term(p.get<std::string>())};
  }
}

// n = 1: payloads are 2-opetopes, written as their arity; n = 2: planar trees
Term json_to_payload(int n, const json& j) {
  if (n == 1) return op2(j.get<int>());
  return json_to_pt(j);
}

json payload_to_json(int n, const Term& t) {
  if (n == 1) return op2_arity(t);
  return pt_to_json(t);
}

json pdm_to_json(const PdMorphism& m) {
  json parts = json::array();
  for (const Term& p : m.parts) {
    if (m.n == 1) parts.push_back(std::stoi(p.head));
    else parts.push_back(pt_to_json(p));
  }
  return json{{"dom", payload_to_json(m.n, m.dom)},
              {"cod", payload_to_json(m.n, m.cod)},
              {"parts", parts}};
}

int infer_hom_dim(const json& j) { return j.is_number() ? 1 : 2; }

PdMorphism json_to_pdm(const json& j, int n = -1) {
  if (!j.is_object() || !j.contains("dom") || !j.contains("cod") || !j.contains("parts"))
    throw InputError("morphism JSON must be {\"dom\":...,\"cod\":...,\"parts\":[...]}");
  if (n < 0) n = infer_hom_dim(j.at("dom"));
  PdMorphism m;
  m.n = n;
  m.dom = json_to_payload(n, j.at("dom"));
  m.cod = json_to_payload(n, j.at("cod"));
  for (const auto& p : j.at("parts")) {
    if (n == 1) m.parts.push_back(Term::atom(std::to_string(p.get<int>())));
    else m.parts.push_back(json_to_pt(p));
  }
  return m;
}

// --- monad elements ---------------------------------------------------------

const Monad& monad_by_name(const std::string& name) {
  static const IdentityMonad id;
  static const MaybePointMonad mp;
  static const FreeMonoidMonad fm;
  static const FreeCommMonoidMonad fcm;
  static const TreeMonad tr;
  if (name == "identity") return id;
  if (name == "maybe-point") return mp;
  if (name == "free-monoid") return fm;
  if (name == "free-comm-monoid") return fcm;
  if (name == "tree") return tr;
  throw InputError("unknown monad instance: " + name +
                   " (expected identity|maybe-point|free-monoid|free-comm-monoid|tree)");
}

json telem_to_json(const Monad& M, const Term& e) {
  const std::string n = M.name();
  if (n == "identity") return e.head;
  if (n == "maybe-point") {
    if (e.leaf) return json{{"inl", e.head}};
    return json{{"inr", nullptr}};
  }
  if (n == "free-monoid" || n == "free-comm-monoid") {
    json arr = json::array();
    for (const Term& k : e.kids) arr.push_back(k.head);
    return arr;
  }
  if (n == "tree") {
    if (e.leaf) return e.head;
    json arr = json::array();
    for (const Term& k : e.kids) arr.push_back(telem_to_json(M, k));
    return arr;
  }
  throw InputError("no element encoding for monad " + n);
}

Term json_to_telem(const Monad& M, const json& j) {
  const std::string n = M.name();
  if (n == "identity") return Term::atom(j.get<std::string>());
  if (n == "maybe-point") {
    if (j.is_object() && j.contains("inl")) return Term::atom(j.at("inl").get<std::string>());
    if (j.is_object() && j.contains("inr")) return Term::node("inr");
    throw InputError("maybe-point element must be {\"inl\":x} or {\"inr\":null}");
  }
  if (n == "free-monoid" || n == "free-comm-monoid") {
    if (!j.is_array()) throw InputError("word element must be an array of strings");
    std::vector<Term> kids;
    for (const auto& k : j) kids.push_back(Term::atom(k.get<std::string>()));
    return M.canon(Term::node(n == "free-monoid" ? "s" : "m", std::move(kids)));
  }
  if (n == "tree") {
    if (j.is_string()) return Term::atom(j.get<std::string>());
    if (!j.is_array()) throw InputError("tree element must be a string or an array");
    std::vector<Term> kids;
    for (const auto& k : j) kids.push_back(json_to_telem(M, k));
    return Term::node("n", std::move(kids));
  }
  throw InputError("no element encoding for monad " + n);
}

// --- finite sets and maps ---------------------------------------------------

json finset_to_json(const FinSet& X) {
  json arr = json::array();
  for (const Atom& a : X.elements) arr.push_back(a);
  return arr;
}

FinSet json_to_finset(const json& j) {
  if (!j.is_array()) throw InputError("set JSON must be an array of strings");
  std::vector<Atom> es;
  for (const auto& a : j) es.push_back(a.get<std::string>());
  return FinSet(std::move(es));
}

json finmap_to_json(const FinMap& f) {
  json graph = json::object();
  for (const auto& [a, b] : f.graph) graph[a] = b;
  return json{{"dom", finset_to_json(f.dom)}, {"cod", finset_to_json(f.cod)}, {"graph", graph}};
}

FinMap json_to_finmap(const json& j) {
  if (!j.is_object() || !j.contains("dom") || !j.contains("cod") || !j.contains("graph"))
    throw InputError("map JSON must be {\"dom\":[...],\"cod\":[...],\"graph\":{...}}");
  std::map<Atom, Atom> graph;
  for (const auto& [a, b] : j.at("graph").items()) graph[a] = b.get<std::string>();
  return FinMap(json_to_finset(j.at("dom")), json_to_finset(j.at("cod")), std::move(graph));
}

// --- multicategories --------------------------------------------------------

json multicat_to_json(const Multicat& M) {
  const Monad& T = M.T();
  json arrows = json::array();
  for (const Atom& a : M.g.C1.elements)
    arrows.push_back(json{{"id", a},
                          {"dom", telem_to_json(T, M.g.dom(a))},
                          {"cod", M.g.cod(a)}});
  json ids = json::object();
  for (const auto& [ob, ar] : M.ids) ids[ob] = ar;
  json comp = json::array();
  for (const auto& [key, result] : M.comp)
    comp.push_back(json{{"outer", key.first},
                        {"inner", telem_to_json(T, parse_term(key.second))},
                        {"result", result}});
  return json{{"monad", T.name()},
              {"objects", finset_to_json(M.g.C0)},
              {"arrows", arrows},
              {"ids", ids},
              {"comp", comp}};
}

Multicat json_to_multicat(const json& j) {
  if (!j.is_object() || !j.contains("monad") || !j.contains("objects") || !j.contains("arrows"))
    throw InputError("multicategory JSON must have monad, objects, arrows, ids, comp");
  const Monad& T = monad_by_name(j.at("monad").get<std::string>());
  Multicat M;
  M.g.T = &T;
  M.g.C0 = json_to_finset(j.at("objects"));
  std::vector<Atom> arrow_ids;
  for (const auto& a : j.at("arrows")) {
    Atom id = a.at("id").get<std::string>();
    arrow_ids.push_back(id);
    M.g.d[id] = json_to_telem(T, a.at("dom"));
    M.g.c[id] = a.at("cod").get<std::string>();
  }
  M.g.C1 = FinSet(std::move(arrow_ids));
  if (j.contains("ids"))
    for (const auto& [ob, ar] : j.at("ids").items()) M.ids[ob] = ar.get<std::string>();
  if (j.contains("comp"))
    for (const auto& c : j.at("comp")) {
      Term cfg = json_to_telem(T, c.at("inner"));
      M.comp[{c.at("outer").get<std::string>(), enc(cfg)}] = c.at("result").get<std::string>();
    }
  return M;
}

// --- globular sets ----------------------------------------------------------

json globset_to_json(const GlobSet& X) {
  json cells = json::array();
  for (const FinSet& level : X.cells) cells.push_back(finset_to_json(level));
  json s = json::array(), t = json::array();
  for (int k = 0; k < X.N; ++k) {
    json sk = json::object(), tk = json::object();
    for (const auto& [a, b] : X.src[k]) sk[a] = b;
    for (const auto& [a, b] : X.tgt[k]) tk[a] = b;
    s.push_back(sk);
    t.push_back(tk);
  }
  return json{{"N", X.N}, {"cells", cells}, {"s", s}, {"t", t}};
}

GlobSet json_to_globset(const json& j) {
  if (!j.is_object() || !j.contains("N") || !j.contains("cells"))
    throw InputError("globular set JSON must be {\"N\":...,\"cells\":[...],\"s\":[...],\"t\":[...]}");
  GlobSet X;
  X.N = j.at("N").get<int>();
  for (const auto& level : j.at("cells")) X.cells.push_back(json_to_finset(level));
  X.src.resize(X.N);
  X.tgt.resize(X.N);
  for (int k = 0; k < X.N; ++k) {
    if (j.contains("s"))
      for (const auto& [a, b] : j.at("s").at(k).items()) X.src[k][a] = b.get<std::string>();
    if (j.contains("t"))
      for (const auto& [a, b] : j.at("t").at(k).items()) X.tgt[k][a] = b.get<std::string>();
  }
  return X;
}

// --- tree-indexed operads ---------------------------------------------------

json boperad_to_json(const BOperad& C) {
  json cells = json::array();
  for (const Atom& c : C.cells.elements) {
    const BTree& sh = C.shape.at(c);
    json cell{{"id", c}, {"stage", sh.stage}, {"shape", bt_to_json(sh)}};
    if (sh.stage >= 1) {
      cell["src"] = C.src.at(c);
      cell["tgt"] = C.tgt.at(c);
    }
    cells.push_back(cell);
  }
  json ids = json::object();
  for (const auto& [n, c] : C.ids) ids[std::to_string(n)] = c;
  json comp = json::array();
  for (const auto& [key, result] : C.comp) {
    json labels = json::object();
    for (const auto& [pos, c] : lab_unkey(key.second)) labels[pos] = c;
    comp.push_back(json{{"outer", key.first}, {"labels", labels}, {"result", result}});
  }
  return json{{"N", C.N}, {"cells", cells}, {"ids", ids}, {"comp", comp}};
}

BOperad json_to_boperad(const json& j) {
  if (!j.is_object() || !j.contains("N") || !j.contains("cells"))
    throw InputError("operad JSON must have N, cells, ids, comp");
  BOperad C;
  C.N = j.at("N").get<int>();
  std::vector<Atom> ids;
  for (const auto& cell : j.at("cells")) {
    Atom id = cell.at("id").get<std::string>();
    ids.push_back(id);
    int stage = cell.at("stage").get<int>();
    C.shape[id] = json_to_bt(cell.at("shape"), stage);
    if (stage >= 1) {
      C.src[id] = cell.at("src").get<std::string>();
      C.tgt[id] = cell.at("tgt").get<std::string>();
    }
  }
  C.cells = FinSet(std::move(ids));
  if (j.contains("ids"))
    for (const auto& [n, c] : j.at("ids").items()) C.ids[std::stoi(n)] = c.get<std::string>();
  if (j.contains("comp"))
    for (const auto& e : j.at("comp")) {
      std::map<Atom, Atom> labels;
      for (const auto& [pos, c] : e.at("labels").items()) labels[pos] = c.get<std::string>();
      C.comp[{e.at("outer").get<std::string>(), lab_key(labels)}] =
          e.at("result").get<std::string>();
    }
  return C;
}

json kfragment_to_json(const KFragment& K) {
  json j = boperad_to_json(K.op);
  json contractions = json::array();
  for (const auto& [key, cell] : K.contraction) {
    Term k = parse_term(key);  // p[tree,f,f']
    BTree sigma = bt_from_atom(k.kids[0].head);
    contractions.push_back(json{{"stage", sigma.stage},
                                {"tree", bt_to_json(sigma)},
                                {"src", k.kids[1].head},
                                {"tgt", k.kids[2].head},
                                {"cell", cell}});
  }
  j["contractions"] = contractions;
  return j;
}

// --- rendering --------------------------------------------------------------

// generic rooted tree for drawing: a node with ordered children
struct DrawTree {
  std::vector<DrawTree> kids;
};

DrawTree draw_of_term(const Term& t) {
  DrawTree d;
  if (t.leaf) return d;
  for (const Term& k : t.kids) d.kids.push_back(draw_of_term(k));
  return d;
}

struct Block {
  std::vector<std::string> lines;  // top to bottom, equal width
  int width = 0;
  int root_col = 0;
};

Block draw_block(const DrawTree& t) {
  if (t.kids.empty()) return {{"*"}, 1, 0};
  std::vector<Block> kids;
  for (const DrawTree& k : t.kids) kids.push_back(draw_block(k));
  int width = -1;
  for (const Block& b : kids) width += b.width + 1;
  int height = 0;
  for (const Block& b : kids) height = std::max(height, static_cast<int>(b.lines.size()));
  std::vector<std::string> lines(height + 2, std::string(width, ' '));
  int x = 0;
  std::vector<int> roots;
  for (const Block& b : kids) {
    int pad = height - static_cast<int>(b.lines.size());  // bottom-align children
    for (size_t r = 0; r < b.lines.size(); ++r)
      lines[pad + r].replace(x, b.width, b.lines[r]);
    roots.push_back(x + b.root_col);
    x += b.width + 1;
  }
  int rc = (roots.front() + roots.back()) / 2;
  for (int c : roots)
    lines[height][c] = (c < rc) ? '\\' : (c > rc) ? '/' : '|';
  lines[height + 1][rc] = '*';
  return {std::move(lines), width, rc};
}

std::string draw_ascii(const DrawTree& t) {
  Block b = draw_block(t);
  std::string out;
  for (size_t i = 0; i < b.lines.size(); ++i) {
    std::string line = b.lines[i];
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    if (i + 1 < b.lines.size()) out += "\n";
  }
  return out;
}

std::string draw_dot(const DrawTree& t) {
  std::ostringstream out;
  out << "digraph {\n";
  int next = 0;
  std::function<int(const DrawTree&)> walk = [&](const DrawTree& u) {
    int self = next++;
    out << "  n" << self << ";\n";
    std::vector<int> kid_ids;
    for (const DrawTree& k : u.kids) kid_ids.push_back(walk(k));
    for (int k : kid_ids) out << "  n" << k << " -> n" << self << ";\n";
    return self;
  };
  walk(t);
  out << "}";
  return out.str();
}

std::string render_globset_ascii(const GlobSet& X) {
  std::ostringstream out;
  for (int k = 0; k <= X.N; ++k) {
    out << k << ":";
    for (const Atom& c : X.cells[k].elements) {
      out << " " << c;
      if (k >= 1) out << "(" << X.src[k - 1].at(c) << "=>" << X.tgt[k - 1].at(c) << ")";
    }
    if (k < X.N) out << "\n";
  }
  return out.str();
}

std::string render_globset_dot(const GlobSet& X) {
  std::ostringstream out;
  out << "digraph {\n";
  for (int k = 0; k <= X.N; ++k)
    for (const Atom& c : X.cells[k].elements)
      out << "  \"" << c << "\" [label=\"" << c << " (" << k << ")\"];\n";
  for (int k = 0; k < X.N; ++k)
    for (const Atom& c : X.cells[k + 1].elements) {
      out << "  \"" << c << "\" -> \"" << X.src[k].at(c) << "\" [label=\"s\"];\n";
      out << "  \"" << c << "\" -> \"" << X.tgt[k].at(c) << "\" [label=\"t\"];\n";
    }
  out << "}";
  return out.str();
}

// --- check result reporting -------------------------------------------------

int report(const CheckReport& rep) {
  if (rep.ok()) {
    emit_text("PASS");
    return 0;
  }
  std::string first = rep.failures.front();
  size_t colon = first.find(':');
  emit_text("FAIL: " + (colon == std::string::npos ? first : first.substr(0, colon)));
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opetope-forge: opetopes, bounded trees, multicategories and law checks.\n"
               "JSON on stdin/stdout; OPETOPE_FORGE_SEED is reserved (enumeration is "
               "deterministic)."};
  app.require_subcommand(1);
  app.add_option("--out", g_out_path, "write output to FILE instead of stdout");
  app.add_option("--json", g_inline_json, "inline JSON input (instead of stdin)");

  int rc = 0;
  int dim = -1, max_size = 4, bound = 4, set_size = 2, gen_bound = 3, truncate = -1;
  std::string instance = "free-monoid", map_spec = "2to1", format = "ascii", type = "ptree";
  bool terminal = false;

  // opetopes
  auto* c_op = app.add_subcommand("opetopes", "enumerate opetopes of a dimension");
  c_op->add_option("--dim", dim, "dimension")->required();
  c_op->add_option("--max-size", max_size, "size bound (default 4)");
  c_op->callback([&] {
    json out = json::array();
    for (const Opetope& o : opetopes(dim, max_size)) out.push_back(opetope_to_json(o));
    emit(out);
  });

  // trees
  auto* c_trees = app.add_subcommand("trees", "planar trees and pasting-diagram morphisms");
  c_trees->require_subcommand(1);
  c_trees->add_subcommand("enumerate", "all planar trees up to a size")
      ->callback([&] {
        json out = json::array();
        for (const Term& t : ptrees(max_size)) out.push_back(pt_to_json(t));
        emit(out);
      });
  c_trees->get_subcommand("enumerate")->add_option("--max-size", max_size, "size bound (default 4)");
  c_trees->add_subcommand("graft", "graft parts onto the leaves of a base tree; "
                                   "input {\"base\":tree,\"parts\":[tree...]}")
      ->callback([&] {
        json in = read_input();
        Term base = json_to_pt(in.at("base"));
        std::vector<Term> parts;
        for (const auto& p : in.at("parts")) parts.push_back(json_to_pt(p));
        emit(pt_to_json(pt_graft(base, parts)));
      });
  auto* c_hom = c_trees->add_subcommand("hom", "pasting-diagram morphisms dom -> cod; "
                                               "input {\"dom\":...,\"cod\":...}");
  c_hom->add_option("--dim", dim, "cell dimension (1 or 2; inferred if omitted)");
  c_hom->callback([&] {
    json in = read_input();
    int n = dim >= 0 ? dim : infer_hom_dim(in.at("dom"));
    Term d = json_to_payload(n, in.at("dom"));
    Term c = json_to_payload(n, in.at("cod"));
    json out = json::array();
    for (const PdMorphism& m : pd_hom(n, d, c)) out.push_back(pdm_to_json(m));
    emit(out);
  });
  c_trees->add_subcommand("compose", "compose morphisms; input {\"g\":m,\"f\":m}")
      ->callback([&] {
        json in = read_input();
        PdMorphism f = json_to_pdm(in.at("f"));
        PdMorphism g = json_to_pdm(in.at("g"), f.n);
        emit(pdm_to_json(pd_compose(f.n, g, f)));
      });

  // btrees
  auto* c_bt = app.add_subcommand("btrees", "bounded (stage-n) trees");
  c_bt->require_subcommand(1);
  auto* c_bte = c_bt->add_subcommand("enumerate", "all stage-n trees up to a size");
  c_bte->add_option("--dim", dim, "stage")->required();
  c_bte->add_option("--max-size", max_size, "size bound (default 4)");
  c_bte->callback([&] {
    json out = json::array();
    for (const BTree& x : btrees(dim, max_size)) out.push_back(bt_to_json(x));
    emit(out);
  });
  auto* c_btb = c_bt->add_subcommand("boundary", "boundary of a tree; input a tree");
  c_btb->add_option("--dim", dim, "stage (inferred from nesting if omitted)");
  c_btb->callback([&] {
    BTree x = json_to_bt(read_input(), dim);
    emit(bt_to_json(btree_boundary(x)));
  });
  auto* c_bts = c_bt->add_subcommand(
      "subst", "substitute trees into the cells of a tree; input "
               "{\"outer\":tree,\"labels\":{\"c0.v0\":tree,...}} (labels keyed by "
               "boundary-glob cell names; 0-cells default to the token)");
  c_bts->add_option("--dim", dim, "stage of the outer tree (inferred if omitted)");
  c_bts->callback([&] {
    json in = read_input();
    BTree tau = json_to_bt(in.at("outer"), dim);
    std::map<Atom, BTree> labels;
    if (in.contains("labels"))
      for (const auto& [name, tj] : in.at("labels").items()) {
        int d = 0;  // cell dimension = number of column segments in the name
        for (size_t i = 0; i + 1 < name.size(); ++i)
          if (name[i] == 'c' && (i == 0 || name[i - 1] == '.')) ++d;
        labels[name] = json_to_bt(tj, d);
      }
    auto hc = hat_cells(tau);
    for (const Atom& v : hc[0])
      if (!labels.count(v)) labels[v] = btoken();
    emit(bt_to_json(btree_substitute(tau, labels)));
  });

  // check
  auto* c_check = app.add_subcommand("check", "law checks (PASS exit 0, FAIL exit 1)");
  c_check->require_subcommand(1);
  auto* c_cm = c_check->add_subcommand("monad", "monad laws for a shipped instance");
  c_cm->add_option("--instance", instance, "monad instance (default free-monoid)");
  c_cm->add_option("--set-size", set_size, "carrier size (default 2)");
  c_cm->add_option("--bound", bound, "element size bound (default 4)");
  c_cm->callback([&] {
    rc = report(check_monad_laws(monad_by_name(instance), std_finset(set_size), bound));
  });
  auto* c_cc = c_check->add_subcommand("cartesian", "cartesianness of a monad at a map");
  c_cc->add_option("--instance", instance, "monad instance (default free-monoid)");
  c_cc->add_option("--map", map_spec, "map MtoN: x_i -> y_{i mod N} (default 2to1)");
  c_cc->add_option("--bound", bound, "element size bound (default 4)");
  c_cc->callback([&] {
    size_t to = map_spec.find("to");
    if (to == std::string::npos) throw InputError("--map must look like 2to1");
    int m = std::stoi(map_spec.substr(0, to));
    int n = std::stoi(map_spec.substr(to + 2));
    if (n < 1) throw InputError("--map codomain must be nonempty");
    std::map<Atom, Atom> graph;
    for (int i = 0; i < m; ++i)
      graph["x" + std::to_string(i)] = "y" + std::to_string(i % n);
    FinMap f(std_finset(m), std_finset(n, "y"), std::move(graph));
    rc = report(check_cartesian(monad_by_name(instance), f, bound));
  });
  c_check->add_subcommand("multicat", "multicategory laws; input a multicategory")
      ->callback([&] {
        Multicat M = json_to_multicat(read_input());
        rc = report(check_multicategory(M));
      });
  auto* c_co = c_check->add_subcommand("operad", "tree-indexed operad laws; input an operad");
  c_co->add_flag("--terminal", terminal, "check the generated terminal operad instead of stdin");
  c_co->add_option("--dim", dim, "terminal operad dimension (with --terminal, default 2)");
  c_co->add_option("--max-size", max_size, "terminal operad tree-size bound (default 4)");
  c_co->callback([&] {
    BOperad C = terminal ? terminal_boperad(dim >= 0 ? dim : 2, max_size)
                         : json_to_boperad(read_input());
    rc = report(check_boperad(C));
  });
  c_check->add_subcommand(
             "algebra", "multicategory algebra laws; input "
                        "{\"multicat\":M,\"total\":[...],\"proj\":map,\"h\":map}")
      ->callback([&] {
        json in = read_input();
        Multicat M = json_to_multicat(in.at("multicat"));
        FinMap proj = json_to_finmap(in.at("proj"));
        FinSet total = in.contains("total") ? json_to_finset(in.at("total")) : proj.dom;
        AlgebraStr alg{SliceObj(total, proj, proj.cod), json_to_finmap(in.at("h"))};
        rc = report(check_algebra(M, alg));
      });

  // k
  auto* c_k = app.add_subcommand("k", "generated fragments of the initial operad-with-contraction");
  c_k->require_subcommand(1);
  auto add_k_opts = [&](CLI::App* cmd) {
    cmd->add_option("--dim", dim, "cell dimension bound (default 2)");
    cmd->add_option("--max-size", max_size, "tree size bound (default 4)");
    cmd->add_option("--max-gens", gen_bound, "generator occurrence bound (default 3)");
    cmd->add_option("--truncate", truncate, "identify matching pairs at this dimension");
  };
  auto run_k = [&] {
    KOptions opt;
    opt.dim_bound = dim >= 0 ? dim : 2;
    opt.size_bound = max_size;
    opt.gen_bound = gen_bound;
    return truncate >= 1 ? generate_K_n(truncate, opt) : generate_K(opt);
  };
  auto* c_kg = c_k->add_subcommand("generate", "generate a K fragment");
  add_k_opts(c_kg);
  c_kg->callback([&] { emit(kfragment_to_json(run_k())); });
  auto* c_kc = c_k->add_subcommand("count", "count cells of a K fragment");
  add_k_opts(c_kc);
  c_kc->callback([&] {
    KFragment K = run_k();
    std::map<int, int> by_stage;
    for (const Atom& c : K.op.cells.elements) ++by_stage[K.op.stage(c)];
    json bs = json::object();
    for (const auto& [s, n] : by_stage) bs[std::to_string(s)] = n;
    emit(json{{"cells", K.op.cells.elements.size()},
              {"contractions", K.contraction.size()},
              {"by_stage", bs}});
  });

  // slice
  auto* c_slice = app.add_subcommand("slice", "slice multicategory constructions");
  c_slice->require_subcommand(1);
  auto* c_sp = c_slice->add_subcommand("plus", "the slice C+ of a multicategory; input C");
  c_sp->add_option("--bound", bound, "free-arrow size bound (default 4)");
  c_sp->callback([&] {
    Multicat C = json_to_multicat(read_input());
    emit(multicat_to_json(slice_plus(C, bound)));
  });
  c_slice->add_subcommand("by-algebra", "slice of D by an opfibration f: D -> E; input "
                                        "{\"D\":...,\"E\":...,\"f0\":map,\"f1\":map}")
      ->callback([&] {
        json in = read_input();
        Multicat D = json_to_multicat(in.at("D"));
        Multicat E = json_to_multicat(in.at("E"));
        MultiMap f{json_to_finmap(in.at("f0")), json_to_finmap(in.at("f1"))};
        emit(multicat_to_json(slice_by_algebra(D, E, f)));
      });

  // render
  auto* c_r = app.add_subcommand("render", "draw an object as ascii or DOT; input the object");
  c_r->add_option("--format", format, "ascii | dot (default ascii)")
      ->check(CLI::IsMember({"ascii", "dot"}));
  c_r->add_option("--type", type, "ptree | btree | opetope | globset (default ptree)")
      ->check(CLI::IsMember({"ptree", "btree", "opetope", "globset"}));
  c_r->add_option("--dim", dim, "stage of a btree (inferred if omitted)");
  c_r->callback([&] {
    json in = read_input();
    if (type == "globset") {
      GlobSet X = json_to_globset(in);
      emit_text(format == "dot" ? render_globset_dot(X) : render_globset_ascii(X));
      return;
    }
    DrawTree d;
    if (type == "ptree") {
      d = draw_of_term(json_to_pt(in));
    } else if (type == "btree") {
      d = draw_of_term(json_to_bt(in, dim).t);
    } else {  // opetope
      Opetope o = json_to_opetope(in);
      if (o.dim == 0) d = DrawTree{};
      else if (o.dim == 1) d = DrawTree{{DrawTree{}}};
      else if (o.dim == 2) d = draw_of_term(op2(op2_arity(o.t)).kids.empty()
                                                ? pt_leaf()
                                                : pt_node(std::vector<Term>(op2_arity(o.t),
                                                                            pt_leaf())));
      else if (o.dim == 3) d = draw_of_term(pd3_to_pt(o.t));
      else throw InputError("render: opetopes of dimension > 3 are not drawable");
    }
    emit_text(format == "dot" ? draw_dot(d) : draw_ascii(d));
  });

  // global --out/--json may appear after the subcommand
  std::function<void(CLI::App*)> allow_fallthrough = [&](CLI::App* a) {
    for (CLI::App* sub : a->get_subcommands({})) {
      sub->fallthrough();
      allow_fallthrough(sub);
    }
  };
  allow_fallthrough(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}

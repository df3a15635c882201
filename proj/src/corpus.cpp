#include "lazyf/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "lazyf/parser.hpp"

namespace lazyf {

HostTreePtr hleaf(int v) {
  auto t = std::make_shared<HostTree>();
  t->is_leaf = true;
  t->value = v;
  return t;
}

HostTreePtr hbin(HostTreePtr l, HostTreePtr r) {
  auto t = std::make_shared<HostTree>();
  t->is_leaf = false;
  t->left = std::move(l);
  t->right = std::move(r);
  return t;
}

static int host_min(const HostTreePtr& t) {
  if (t->is_leaf) return t->value;
  return std::min(host_min(t->left), host_min(t->right));
}

static HostTreePtr host_replace(const HostTreePtr& t, int m) {
  if (t->is_leaf) return hleaf(m);
  return hbin(host_replace(t->left, m), host_replace(t->right, m));
}

HostTreePtr oracle_repmin(const HostTreePtr& t) { return host_replace(t, host_min(t)); }

void host_leaves(const HostTreePtr& t, std::vector<int>& out) {
  if (t->is_leaf) {
    out.push_back(t->value);
    return;
  }
  host_leaves(t->left, out);
  host_leaves(t->right, out);
}

static HostTreePtr refill(const HostTreePtr& t, const std::vector<int>& vals,
                          size_t& i) {
  if (t->is_leaf) return hleaf(vals[i++]);
  HostTreePtr l = refill(t->left, vals, i);
  HostTreePtr r = refill(t->right, vals, i);
  return hbin(l, r);
}

HostTreePtr oracle_sort(const HostTreePtr& t) {
  std::vector<int> vals;
  host_leaves(t, vals);
  std::sort(vals.begin(), vals.end());
  size_t i = 0;
  return refill(t, vals, i);
}

bool host_shape_equal(const HostTreePtr& a, const HostTreePtr& b) {
  if (a->is_leaf != b->is_leaf) return false;
  if (a->is_leaf) return true;
  return host_shape_equal(a->left, b->left) && host_shape_equal(a->right, b->right);
}

static void render_walk(const HostTreePtr& t, bool atom, std::string& out) {
  if (t->is_leaf) {
    if (atom) out += "(";
    out += "Leaf " + std::to_string(t->value);
    if (atom) out += ")";
    return;
  }
  if (atom) out += "(";
  out += "Bin ";
  render_walk(t->left, true, out);
  out += " ";
  render_walk(t->right, true, out);
  if (atom) out += ")";
}

std::string host_render(const HostTreePtr& t) {
  std::string s;
  render_walk(t, false, s);
  return s;
}

static HostTreePtr gen_walk(std::mt19937_64& rng, int depth, int max_depth) {
  std::uniform_int_distribution<int> pick(0, 99);
  if (depth >= max_depth || pick(rng) >= 55) return hleaf(pick(rng));
  HostTreePtr l = gen_walk(rng, depth + 1, max_depth);
  HostTreePtr r = gen_walk(rng, depth + 1, max_depth);
  return hbin(l, r);
}

static TermPtr tree_term(const HostTreePtr& t, const SourceSpan& sp) {
  if (t->is_leaf)
    return econ("Leaf", {elit(lit_int(t->value), sp)}, sp);
  return econ("Bin", {tree_term(t->left, sp), tree_term(t->right, sp)}, sp);
}

static void literal_walk(const HostTreePtr& t, bool atom, std::string& out) {
  render_walk(t, atom, out);  // literals and rendering coincide for trees
}

GeneratedTree gen_tree(unsigned long long seed, int max_depth) {
  std::mt19937_64 rng(seed);
  GeneratedTree g;
  g.tree = gen_walk(rng, 1, max_depth);
  std::string lit;
  literal_walk(g.tree, true, lit);
  g.literal = lit;
  SourceSpan sp;
  sp.file = "<generated>";
  sp.line = 1;
  sp.col = 1;
  g.term = tree_term(g.tree, sp);
  return g;
}

Program with_generated_main(const Program& base, const std::string& fn,
                            const GeneratedTree& g) {
  Program p = base;
  bool found = false;
  SourceSpan sp;
  sp.file = "<generated>";
  for (auto& b : p.binds) {
    if (b.name == "main") {
      b.body = eapp(evar(fn, sp), g.term);
      found = true;
    }
  }
  if (!found) {
    TopBinding b;
    b.name = "main";
    b.sig = tcon("Tree", {});
    b.body = eapp(evar(fn, sp), g.term);
    b.span = sp;
    p.binds.push_back(std::move(b));
  }
  return p;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& corpus_required_files() {
  static const std::vector<std::string> files = {
      "prelude.lzf",        "repmin_strict.lzf", "repmin.lzf",
      "repmin2.lzf",        "idtree_bad.lzf",    "idtree_twophase.lzf",
      "idtree.lzf",         "idtree_annot.lzf",  "idtree_inf.lzf",
      "sorttree_list.lzf",  "sorttree_prod.lzf", "safety.lzf",
      "df_pair.lzf",        "st_v1.lzf",         "st.lzf",
      "st_demo.lzf"};
  return files;
}

std::optional<std::vector<CorpusCase>> load_manifest(const std::string& dir,
                                                     std::string& err) {
  std::ifstream in(dir + "/manifest.tsv");
  if (!in) {
    err = "cannot open " + dir + "/manifest.tsv";
    return std::nullopt;
  }
  std::vector<CorpusCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    CorpusCase c;
    if (!std::getline(ls, c.path, '\t') || !std::getline(ls, c.mode, '\t')) {
      err = "malformed manifest line: " + line;
      return std::nullopt;
    }
    std::getline(ls, c.expectation, '\t');
    cases.push_back(std::move(c));
  }
  return cases;
}

namespace {

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path);
  if (!in) {
    ok = false;
    return "";
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  ok = true;
  return ss.str();
}

struct CaseRun {
  bool ok;
  std::string message;
};

int main_line_of(const Program& p) {
  for (auto& b : p.binds)
    if (b.name == "main") return b.span.line;
  return 1 << 30;
}

CaseRun run_case(const std::string& dir, const CorpusCase& c,
                 const CorpusOptions& opts) {
  bool ok = false;
  std::string text = read_file(dir + "/" + c.path, ok);
  if (!ok) return {false, "cannot read " + c.path};
  ParseResult pr = parse_program(text, c.path);
  if (pr.error) {
    if (c.mode == "check-fail" && c.expectation == code_name(pr.error->code))
      return {true, ""};
    return {false, c.path + ": parse error: " + pr.error->message};
  }
  const Program& prog = *pr.program;
  CheckResult cr = check_program(prog);

  if (c.mode == "check-ok") {
    if (cr.ok) return {true, ""};
    return {false, c.path + ": expected to check, got " +
                       render_diagnostic(cr.diags.front())};
  }
  if (c.mode == "check-fail") {
    if (cr.ok) return {false, c.path + ": expected check failure " + c.expectation};
    for (auto& d : cr.diags)
      if (code_name(d.code) == c.expectation) return {true, ""};
    return {false, c.path + ": expected " + c.expectation + ", got " +
                       render_diagnostic(cr.diags.front())};
  }
  if (!cr.ok)
    return {false, c.path + ": does not typecheck: " +
                       render_diagnostic(cr.diags.front())};

  if (c.mode == "run") {
    bool gok = false;
    std::string golden = read_file(dir + "/golden/" + c.expectation, gok);
    if (!gok) return {false, c.path + ": missing golden " + c.expectation};
    while (!golden.empty() && (golden.back() == '\n' || golden.back() == '\r'))
      golden.pop_back();
    EvalConfig cfg;
    EvalOutcome out = eval_main(prog, cfg);
    if (!out.ok)
      return {false, c.path + ": runtime error " + std::string(code_name(out.error)) +
                         ": " + out.error_message};
    if (out.rendered != golden)
      return {false,
              c.path + ": expected '" + golden + "', got '" + out.rendered + "'"};
    return {true, ""};
  }

  if (c.mode == "run-property") {
    auto colon = c.expectation.find(':');
    if (colon == std::string::npos)
      return {false, c.path + ": malformed run-property expectation"};
    std::string oracle = c.expectation.substr(0, colon);
    std::string fn = c.expectation.substr(colon + 1);
    for (int i = 0; i < opts.property_count; i++) {
      GeneratedTree g = gen_tree(opts.seed + (unsigned long long)i, opts.max_depth);
      Program p2 = with_generated_main(prog, fn, g);
      CheckResult cr2 = check_program(p2);
      if (!cr2.ok)
        return {false, c.path + ": generated main does not check: " +
                           render_diagnostic(cr2.diags.front())};
      EvalConfig cfg;
      EvalOutcome out = eval_main(p2, cfg);
      if (!out.ok)
        return {false, c.path + ": runtime error on tree " + std::to_string(i) +
                           ": " + out.error_message};
      std::string want;
      if (oracle == "repmin") want = host_render(oracle_repmin(g.tree));
      else if (oracle == "identity") want = host_render(g.tree);
      else if (oracle == "sort") want = host_render(oracle_sort(g.tree));
      else return {false, c.path + ": unknown oracle " + oracle};
      if (out.rendered != want)
        return {false, c.path + ": tree " + std::to_string(i) + " (" + g.literal +
                           "): expected '" + want + "', got '" + out.rendered + "'"};
    }
    return {true, ""};
  }

  if (c.mode == "run-counter") {
    long long expected = std::stoll(c.expectation);
    EvalConfig cfg;
    cfg.counters = true;
    EvalOutcome out = eval_main(prog, cfg);
    if (!out.ok)
      return {false, c.path + ": runtime error: " + out.error_message};
    int main_line = main_line_of(prog);
    int seen = 0;
    for (auto& cc : out.cell_counts) {
      if (cc.site.file != c.path || cc.site.line < main_line) continue;
      if (cc.ctor != "Leaf" && cc.ctor != "Bin") continue;
      seen++;
      if (cc.matches != expected)
        return {false, c.path + ": input cell " + cc.ctor + " at line " +
                           std::to_string(cc.site.line) + " matched " +
                           std::to_string(cc.matches) + " times, expected " +
                           c.expectation};
    }
    if (seen == 0) return {false, c.path + ": no input tree cells found"};
    return {true, ""};
  }

  return {false, c.path + ": unknown mode '" + c.mode + "'"};
}

}  // namespace

CorpusReport run_corpus(const std::string& dir, const CorpusOptions& opts) {
  CorpusReport rep;
  std::string err;
  auto cases = load_manifest(dir, err);
  if (!cases) {
    rep.failed = 1;
    rep.failures.push_back(err);
    return rep;
  }
  // coverage audit: every spec'd corpus file must appear in the manifest
  for (auto& req : corpus_required_files()) {
    bool found = false;
    for (auto& c : *cases)
      if (c.path == req) found = true;
    if (!found) {
      rep.failed++;
      rep.failures.push_back("coverage audit: manifest is missing " + req);
    }
  }
  for (auto& c : *cases) {
    CaseRun r = run_case(dir, c, opts);
    if (opts.log)
      *opts.log << (r.ok ? "pass" : "FAIL") << "  " << c.path << "  " << c.mode
                << (r.ok ? "" : ("\n      " + r.message)) << "\n";
    if (r.ok) rep.passed++;
    else {
      rep.failed++;
      rep.failures.push_back(r.message);
    }
  }
  return rep;
}

std::string check_generated_match_counts(const EvalOutcome& out, long long expected) {
  int seen = 0;
  for (auto& cc : out.cell_counts) {
    if (cc.site.file != "<generated>") continue;
    if (cc.ctor != "Leaf" && cc.ctor != "Bin") continue;
    seen++;
    if (cc.matches != expected)
      return "input cell " + cc.ctor + " matched " + std::to_string(cc.matches) +
             " times, expected " + std::to_string(expected);
  }
  if (seen == 0) return "no generated input cells found";
  return "";
}

}  // namespace lazyf

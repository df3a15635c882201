#pragma once

// Host-side mirror of the object-language Tree, the oracles the test corpus
// is judged against, a deterministic tree generator, and the corpus
// manifest runner behind `lazyf corpus`.

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lazyf/ast.hpp"
#include "lazyf/eval.hpp"
#include "lazyf/typecheck.hpp"

namespace lazyf {

struct HostTree;
using HostTreePtr = std::shared_ptr<const HostTree>;

struct HostTree {
  bool is_leaf = true;
  int value = 0;
  HostTreePtr left, right;
};

HostTreePtr hleaf(int v);
HostTreePtr hbin(HostTreePtr l, HostTreePtr r);

// minval/replace semantics: same shape, every leaf replaced by the minimum.
HostTreePtr oracle_repmin(const HostTreePtr& t);

// Same shape; the prefix traversal of the result is the sorted leaf
// multiset of the input.
HostTreePtr oracle_sort(const HostTreePtr& t);

void host_leaves(const HostTreePtr& t, std::vector<int>& out);
bool host_shape_equal(const HostTreePtr& a, const HostTreePtr& b);
// Renders exactly like the evaluator: Bin (Leaf 1) (Leaf 2)
std::string host_render(const HostTreePtr& t);

struct GeneratedTree {
  HostTreePtr tree;
  std::string literal;  // re-parsable .lzf source literal
  TermPtr term;         // the same literal as an AST, file "<generated>"
};

// Deterministic pseudo-random tree; identical seeds give identical trees.
GeneratedTree gen_tree(unsigned long long seed, int max_depth);

// Copy of `base` whose `main` body is `fn <tree literal>`.
Program with_generated_main(const Program& base, const std::string& fn,
                            const GeneratedTree& g);

// ---------------------------------------------------------------------------
// Corpus manifest

struct CorpusCase {
  std::string path;         // relative to the corpus directory
  std::string mode;         // check-ok | check-fail | run | run-property | run-counter
  std::string expectation;  // per mode; see manifest.tsv
};

struct CorpusOptions {
  unsigned long long seed = 1;
  int property_count = 200;
  int max_depth = 8;
  std::ostream* log = nullptr;
};

struct CorpusReport {
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;
};

// The required corpus inventory; the manifest must cover every one of these files.
const std::vector<std::string>& corpus_required_files();

std::optional<std::vector<CorpusCase>> load_manifest(const std::string& dir,
                                                     std::string& err);
CorpusReport run_corpus(const std::string& dir, const CorpusOptions& opts);

// Every Leaf/Bin cell allocated by the spliced "<generated>" literal must
// have exactly `expected` strict matches. Used by the traversal-count
// criteria. Returns an error message, or empty on success.
std::string check_generated_match_counts(const EvalOutcome& out, long long expected);

}  // namespace lazyf

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lazyf/corpus.hpp"
#include "lazyf/diagnostics.hpp"
#include "lazyf/eval.hpp"
#include "lazyf/parser.hpp"
#include "lazyf/pretty.hpp"
#include "lazyf/typecheck.hpp"

namespace {

// exit codes: 0 success, 1 semantic failure, 2 usage/parse/io, 3 runtime
constexpr int kOk = 0;
constexpr int kSemantic = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

struct Options {
  std::string file;
  std::string corpus_dir = "corpus";
  bool json = false;
  bool trace = false;
  bool counters = false;
  long long max_steps = 0;  // 0: use env or default
  unsigned long long seed = 1;
};

long long effective_budget(const Options& o) {
  if (o.max_steps > 0) return o.max_steps;
  if (const char* env = std::getenv("LAZYF_MAX_STEPS")) {
    long long v = std::atoll(env);
    if (v > 0) return v;
  }
  return 10'000'000;
}

void emit_diags(const std::vector<lazyf::Diagnostic>& diags, bool json) {
  for (auto& d : diags) {
    if (json)
      std::cout << lazyf::render_diagnostic_json(d) << "\n";
    else
      std::cerr << lazyf::render_diagnostic(d) << "\n";
  }
}

int load_and_check(const Options& o, lazyf::ProgramPtr& prog,
                   lazyf::CheckResult& cr) {
  std::ifstream in(o.file);
  if (!in) {
    lazyf::Diagnostic d;
    d.code = lazyf::Code::IOError;
    d.message = "cannot open '" + o.file + "'";
    d.span.file = o.file;
    emit_diags({d}, o.json);
    return kUsage;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  lazyf::ParseResult pr = lazyf::parse_program(ss.str(), o.file);
  if (pr.error) {
    emit_diags({*pr.error}, o.json);
    return kUsage;
  }
  prog = pr.program;
  cr = lazyf::check_program(*prog);
  if (!cr.ok) {
    emit_diags(cr.diags, o.json);
    return kSemantic;
  }
  return kOk;
}

int cmd_check(const Options& o) {
  lazyf::ProgramPtr prog;
  lazyf::CheckResult cr;
  int rc = load_and_check(o, prog, cr);
  if (rc != kOk) return rc;
  for (auto& [name, ty] : cr.types) {
    if (o.json) {
      nlohmann::json j;
      j["name"] = name;
      j["type"] = lazyf::pretty_type(ty);
      std::cout << j.dump() << "\n";
    } else {
      std::cout << name << " : " << lazyf::pretty_type(ty) << "\n";
    }
  }
  return kOk;
}

int cmd_run(const Options& o) {
  lazyf::ProgramPtr prog;
  lazyf::CheckResult cr;
  int rc = load_and_check(o, prog, cr);
  if (rc != kOk) return rc;
  lazyf::EvalConfig cfg;
  cfg.max_steps = effective_budget(o);
  cfg.counters = o.counters;
  cfg.trace = o.trace;
  cfg.trace_out = &std::cerr;
  lazyf::EvalOutcome out = lazyf::eval_main(*prog, cfg);
  if (!out.ok) {
    std::cerr << "error[" << lazyf::code_name(out.error) << "]: " << out.error_message
              << "\n";
    return out.error == lazyf::Code::IOError ? kUsage : kRuntime;
  }
  std::cout << out.rendered << "\n";
  if (o.counters) {
    for (auto& row : out.site_counters)
      std::cerr << "site " << row.site.file << ":" << row.site.line << ":"
                << row.site.col << ": allocs=" << row.allocs
                << " matches=" << row.matches << "\n";
  }
  return kOk;
}

int cmd_corpus(const Options& o) {
  lazyf::CorpusOptions copts;
  copts.seed = o.seed;
  copts.log = &std::cout;
  std::string dir = o.corpus_dir;
  if (const char* env = std::getenv("LAZYF_CORPUS_DIR")) dir = env;
  lazyf::CorpusReport rep = lazyf::run_corpus(dir, copts);
  std::cout << rep.passed << " passed, " << rep.failed << " failed\n";
  return rep.failed == 0 && rep.passed > 0 ? kOk : kSemantic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lazyf - typechecker and call-by-need interpreter for LazyF"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_file) {
    if (needs_file) sub->add_option("file", o.file, "a .lzf source file")->required();
    sub->add_flag("--json", o.json, "emit diagnostics as line-delimited JSON");
    sub->add_flag("--trace", o.trace, "trace every force to stderr");
    sub->add_flag("--counters", o.counters, "report per-site allocation/match counts");
    sub->add_option("--max-steps", o.max_steps, "force-step budget");
  };

  CLI::App* check = app.add_subcommand("check", "typecheck a file and list its types");
  add_common(check, true);
  CLI::App* types =
      app.add_subcommand("types", "print the checked top-level signatures");
  add_common(types, true);
  CLI::App* run = app.add_subcommand("run", "typecheck and evaluate main");
  add_common(run, true);
  CLI::App* corpus = app.add_subcommand(
      "corpus", "run every corpus case (directory: $LAZYF_CORPUS_DIR or ./corpus)");
  corpus->add_option("--seed", o.seed, "seed for the property cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (check->parsed() || types->parsed()) return cmd_check(o);
  if (run->parsed()) return cmd_run(o);
  if (corpus->parsed()) return cmd_corpus(o);
  return kUsage;
}

#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "lazyf/parser.hpp"
#include "lazyf/typecheck.hpp"

namespace lazyf::testing {

inline std::string corpus_dir() { return LAZYF_CORPUS_DIR; }
inline std::string lazyf_bin() { return LAZYF_BIN; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << "cannot open " << path;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProgramPtr parse_or_die(const std::string& text,
                               const std::string& file = "<test>") {
  ParseResult r = parse_program(text, file);
  EXPECT_FALSE(r.error.has_value())
      << (r.error ? render_diagnostic(*r.error) : "");
  if (r.error) return nullptr;
  return r.program;
}

inline ProgramPtr parse_corpus(const std::string& name) {
  return parse_or_die(read_file(corpus_dir() + "/" + name), name);
}

inline CheckResult check_or_die(const Program& p) {
  CheckResult cr = check_program(p);
  EXPECT_TRUE(cr.ok) << (cr.diags.empty() ? "" : render_diagnostic(cr.diags.front()));
  return cr;
}

// Expects the program to fail with the given diagnostic code.
inline void expect_check_code(const std::string& text, Code code) {
  ProgramPtr p = parse_or_die(text);
  ASSERT_TRUE(p);
  CheckResult cr = check_program(*p);
  ASSERT_FALSE(cr.ok) << "program unexpectedly checked";
  bool found = false;
  for (auto& d : cr.diags) found |= d.code == code;
  EXPECT_TRUE(found) << "expected " << code_name(code) << ", got "
                     << render_diagnostic(cr.diags.front());
}

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

inline CliResult run_cli(const std::string& args) {
  CliResult res;
  std::string cmd = lazyf_bin() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  if (!pipe) return res;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    res.stdout_text.append(buf.data(), n);
  int status = pclose(pipe);
  res.exit_code = WEXITSTATUS(status);
  return res;
}

}  // namespace lazyf::testing

#include "lazyf/parser.hpp"

#include <atomic>
#include <cctype>
#include <map>
#include <sstream>
#include <vector>

namespace lazyf {

namespace {

enum class Tok {
  LIdent, UIdent, Int, Char, String,
  KwData, KwWhere, KwLet, KwIn, KwCase, KwOf, KwIf, KwThen, KwElse,
  KwForall, KwExbar, KwPack, KwAs, KwTrue, KwFalse,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Semi, Comma, Equals, Arrow, Backslash, Tilde,
  Bar, BarBarBar, Dot, Colon, Dollar,
  Lt, Le, EqEq, Plus, Minus, Star, Gt,
  Eof
};

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

struct ParseError {
  Diagnostic diag;
};

[[noreturn]] void perr(const SourceSpan& sp, const std::string& msg) {
  Diagnostic d;
  d.code = Code::SyntaxError;
  d.message = msg;
  d.span = sp;
  throw ParseError{d};
}

class Lexer {
 public:
  Lexer(const std::string& text, std::string file)
      : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= text_.size()) {
        out.push_back(make(Tok::Eof, ""));
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  const std::string& text_;
  std::string file_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  char cur() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char peek(size_t n = 1) const {
    return pos_ + n < text_.size() ? text_[pos_ + n] : '\0';
  }

  void advance() {
    if (cur() == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }

  SourceSpan here() const {
    SourceSpan s;
    s.file = file_;
    s.line = s.end_line = line_;
    s.col = s.end_col = col_;
    return s;
  }

  Token make(Tok k, std::string text) const {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.span = here();
    return t;
  }

  void skip_trivia() {
    for (;;) {
      while (isspace((unsigned char)cur())) advance();
      if (cur() == '-' && peek() == '-') {
        while (cur() && cur() != '\n') advance();
        continue;
      }
      if (cur() == '{' && peek() == '-') {
        SourceSpan start = here();
        int depth = 0;
        for (;;) {
          if (!cur()) perr(start, "unterminated block comment");
          if (cur() == '{' && peek() == '-') {
            depth++;
            advance();
            advance();
          } else if (cur() == '-' && peek() == '}') {
            depth--;
            advance();
            advance();
            if (depth == 0) break;
          } else {
            advance();
          }
        }
        continue;
      }
      return;
    }
  }

  Token next() {
    SourceSpan start = here();
    char c = cur();
    auto tok = [&](Tok k, std::string text) {
      Token t;
      t.kind = k;
      t.text = std::move(text);
      t.span = start;
      t.span.end_line = line_;
      t.span.end_col = col_ > 1 ? col_ - 1 : col_;
      return t;
    };

    if (isalpha((unsigned char)c) || c == '_') {
      std::string s;
      while (isalnum((unsigned char)cur()) || cur() == '_' || cur() == '\'') {
        s += cur();
        advance();
      }
      static const std::map<std::string, Tok> kws = {
          {"data", Tok::KwData},     {"where", Tok::KwWhere}, {"let", Tok::KwLet},
          {"in", Tok::KwIn},         {"case", Tok::KwCase},   {"of", Tok::KwOf},
          {"if", Tok::KwIf},         {"then", Tok::KwThen},   {"else", Tok::KwElse},
          {"forall", Tok::KwForall}, {"exbar", Tok::KwExbar}, {"pack", Tok::KwPack},
          {"as", Tok::KwAs},         {"True", Tok::KwTrue},   {"False", Tok::KwFalse}};
      auto it = kws.find(s);
      if (it != kws.end()) return tok(it->second, s);
      return tok(isupper((unsigned char)s[0]) ? Tok::UIdent : Tok::LIdent, s);
    }
    if (isdigit((unsigned char)c)) {
      std::string s;
      while (isdigit((unsigned char)cur())) {
        s += cur();
        advance();
      }
      return tok(Tok::Int, s);
    }
    if (c == '\'') {
      advance();
      char v = cur();
      if (v == '\\') {
        advance();
        char e = cur();
        if (e == 'n') v = '\n';
        else if (e == '\\') v = '\\';
        else if (e == '\'') v = '\'';
        else if (e == '"') v = '"';
        else perr(start, "unknown character escape");
      }
      advance();
      if (cur() != '\'') perr(start, "unterminated character literal");
      advance();
      return tok(Tok::Char, std::string(1, v));
    }
    if (c == '"') {
      advance();
      std::string s;
      while (cur() && cur() != '"') {
        char v = cur();
        if (v == '\\') {
          advance();
          char e = cur();
          if (e == 'n') v = '\n';
          else if (e == '\\') v = '\\';
          else if (e == '"') v = '"';
          else if (e == '\'') v = '\'';
          else perr(start, "unknown string escape");
        }
        s += v;
        advance();
      }
      if (!cur()) perr(start, "unterminated string literal");
      advance();
      return tok(Tok::String, s);
    }

    auto two = [&](char a, char b) { return c == a && peek() == b; };
    if (two('-', '>')) { advance(); advance(); return tok(Tok::Arrow, "->"); }
    if (two('<', '=')) { advance(); advance(); return tok(Tok::Le, "<="); }
    if (two('=', '=')) { advance(); advance(); return tok(Tok::EqEq, "=="); }
    if (c == '|' && peek() == '|' && peek(2) == '|') {
      advance(); advance(); advance();
      return tok(Tok::BarBarBar, "|||");
    }

    switch (c) {
      case '(': advance(); return tok(Tok::LParen, "(");
      case ')': advance(); return tok(Tok::RParen, ")");
      case '[': advance(); return tok(Tok::LBracket, "[");
      case ']': advance(); return tok(Tok::RBracket, "]");
      case '{': advance(); return tok(Tok::LBrace, "{");
      case '}': advance(); return tok(Tok::RBrace, "}");
      case ';': advance(); return tok(Tok::Semi, ";");
      case ',': advance(); return tok(Tok::Comma, ",");
      case '=': advance(); return tok(Tok::Equals, "=");
      case '\\': advance(); return tok(Tok::Backslash, "\\");
      case '~': advance(); return tok(Tok::Tilde, "~");
      case '|': advance(); return tok(Tok::Bar, "|");
      case '.': advance(); return tok(Tok::Dot, ".");
      case ':': advance(); return tok(Tok::Colon, ":");
      case '$': advance(); return tok(Tok::Dollar, "$");
      case '<': advance(); return tok(Tok::Lt, "<");
      case '>': advance(); return tok(Tok::Gt, ">");
      case '+': advance(); return tok(Tok::Plus, "+");
      case '-': advance(); return tok(Tok::Minus, "-");
      case '*': advance(); return tok(Tok::Star, "*");
      default:
        perr(start, std::string("unexpected character '") + c + "'");
    }
  }
};

const char* tok_desc(Tok k) {
  switch (k) {
    case Tok::LIdent: return "identifier";
    case Tok::UIdent: return "constructor identifier";
    case Tok::Int: return "integer literal";
    case Tok::Char: return "character literal";
    case Tok::String: return "string literal";
    case Tok::Eof: return "end of input";
    case Tok::Arrow: return "'->'";
    case Tok::Semi: return "';'";
    case Tok::Equals: return "'='";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    default: return "token";
  }
}

struct Equation {
  std::string name;
  std::vector<PatPtr> params;
  TermPtr guard;
  TermPtr rhs;
  SourceSpan span;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file)
      : toks_(std::move(toks)), file_(std::move(file)) {}

  ProgramPtr parse() {
    auto prog = std::make_shared<Program>();
    prog->file = file_;

    // name -> (sig, equations); order preserved separately
    std::vector<std::string> order;
    std::map<std::string, TypePtr> sigs;
    std::map<std::string, SourceSpan> sig_spans;
    std::map<std::string, std::vector<Equation>> eqs;
    std::string last_equation_name;

    while (!at(Tok::Eof)) {
      if (at(Tok::KwData)) {
        prog->datas.push_back(parse_data());
        continue;
      }
      Token name = expect(Tok::LIdent, "binding name");
      if (at(Tok::Colon)) {
        next();
        TypePtr ty = parse_type();
        expect(Tok::Semi, "';' after signature");
        if (sigs.count(name.text))
          perr(name.span, "duplicate signature for '" + name.text + "'");
        sigs[name.text] = ty;
        sig_spans[name.text] = name.span;
        order.push_back(name.text);
        continue;
      }
      // equation: params, optional guard, '=' rhs
      Equation eq;
      eq.name = name.text;
      eq.span = name.span;
      while (!at(Tok::Equals) && !at(Tok::Bar)) eq.params.push_back(parse_apat());
      if (at(Tok::Bar)) {
        next();
        eq.guard = parse_expr();
      }
      expect(Tok::Equals, "'=' in equation");
      eq.rhs = parse_expr(/*allow_choice=*/true);
      expect(Tok::Semi, "';' after equation");
      if (!sigs.count(eq.name))
        perr(name.span, "missing type signature for '" + eq.name + "'");
      if (!eqs[eq.name].empty() && last_equation_name != eq.name)
        perr(name.span, "equations for '" + eq.name + "' must be contiguous");
      if (!eqs[eq.name].empty() &&
          eqs[eq.name].front().params.size() != eq.params.size())
        perr(name.span, "equations for '" + eq.name +
                            "' have differing numbers of parameters");
      eqs[eq.name].push_back(std::move(eq));
      last_equation_name = name.text;
    }

    for (auto& nm : order) {
      auto it = eqs.find(nm);
      if (it == eqs.end())
        perr(sig_spans[nm], "signature for '" + nm + "' has no equations");
      TopBinding b;
      b.name = nm;
      b.sig = sigs[nm];
      b.span = sig_spans[nm];
      b.body = desugar_equations(it->second);
      prog->binds.push_back(std::move(b));
    }
    return prog;
  }

  TypePtr parse_type_only() {
    auto t = parse_type();
    expect(Tok::Eof, "end of type");
    return t;
  }

  TermPtr parse_term_only() {
    auto t = parse_expr(true);
    expect(Tok::Eof, "end of term");
    return t;
  }

 private:
  std::vector<Token> toks_;
  std::string file_;
  size_t i_ = 0;

  const Token& cur() const { return toks_[i_]; }
  const Token& peek(size_t n = 1) const {
    return toks_[std::min(i_ + n, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token next() { return toks_[i_++]; }

  Token expect(Tok k, const std::string& what) {
    if (!at(k))
      perr(cur().span, "expected " + what + " (" + tok_desc(k) + "), found '" +
                           (cur().kind == Tok::Eof ? "<eof>" : cur().text) + "'");
    return next();
  }

  TermPtr desugar_equations(std::vector<Equation>& list) {
    if (list.size() == 1 && list[0].params.empty() && !list[0].guard)
      return list[0].rhs;
    std::vector<TermPtr> alts;
    for (auto& eq : list) {
      if (eq.params.empty())
        perr(eq.span, "guarded or multiple equations need at least one parameter");
      alts.push_back(elam(eq.params, eq.rhs, eq.guard, eq.span));
    }
    if (alts.size() == 1) return alts[0];
    return echoice(std::move(alts), list[0].span);
  }

  // --- data declarations ----------------------------------------------------

  DataDecl parse_data() {
    DataDecl d;
    d.span = cur().span;
    expect(Tok::KwData, "'data'");
    d.name = expect(Tok::UIdent, "type name").text;
    while (at(Tok::LIdent)) d.params.push_back(next().text);
    if (at(Tok::KwWhere)) {
      d.gadt_syntax = true;
      next();
      expect(Tok::LBrace, "'{' after where");
      while (!at(Tok::RBrace)) {
        CtorDecl c;
        Token cn = expect(Tok::UIdent, "constructor name");
        c.name = cn.text;
        c.span = cn.span;
        expect(Tok::Colon, "':' in constructor signature");
        c.sig = parse_type();
        d.ctors.push_back(std::move(c));
        if (at(Tok::Semi)) next();
        else break;
      }
      expect(Tok::RBrace, "'}' closing constructor list");
    } else {
      expect(Tok::Equals, "'=' or 'where' in data declaration");
      // ADT sugar: C t1 .. tn | ... ; each field type becomes an arrow
      // segment of the full signature, closed under the declared params.
      for (;;) {
        CtorDecl c;
        Token cn = expect(Tok::UIdent, "constructor name");
        c.name = cn.text;
        c.span = cn.span;
        std::vector<TypePtr> fields;
        while (type_atom_ahead()) fields.push_back(parse_atype());
        std::vector<TypePtr> params;
        for (auto& p : d.params) params.push_back(tvar(p));
        TypePtr result = tcon(d.name, params);
        TypePtr sig = result;
        for (auto it = fields.rbegin(); it != fields.rend(); ++it)
          sig = tarrow(*it, sig);
        for (auto it = d.params.rbegin(); it != d.params.rend(); ++it)
          sig = tforall(*it, sig);
        c.sig = sig;
        d.ctors.push_back(std::move(c));
        if (at(Tok::Bar)) {
          next();
          continue;
        }
        break;
      }
    }
    expect(Tok::Semi, "';' after data declaration");
    return d;
  }

  bool type_atom_ahead() const {
    switch (cur().kind) {
      case Tok::LIdent:
      case Tok::UIdent:
      case Tok::LParen:
      case Tok::Lt:
        return true;
      default:
        return false;
    }
  }

  // --- types ------------------------------------------------------------------

  TypePtr parse_type() {
    if (at(Tok::KwForall) || at(Tok::KwExbar)) {
      bool fa = at(Tok::KwForall);
      SourceSpan sp = next().span;
      std::vector<std::string> binders;
      while (at(Tok::LIdent)) binders.push_back(next().text);
      if (binders.empty()) perr(sp, "quantifier needs at least one binder");
      expect(Tok::Dot, "'.' after quantifier binder");
      TypePtr body = parse_type();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = fa ? tforall(*it, body) : texbar(*it, body);
      return body;
    }
    TypePtr lhs = parse_btype();
    if (at(Tok::Arrow)) {
      next();
      return tarrow(lhs, parse_type());
    }
    return lhs;
  }

  TypePtr parse_btype() {
    Token head = cur();
    TypePtr first = parse_atype();
    if (!type_atom_ahead()) return first;
    if (first->kind != TypeKind::Con || !first->args.empty())
      perr(head.span, "only a type constructor can be applied to arguments");
    std::vector<TypePtr> args;
    while (type_atom_ahead()) args.push_back(parse_atype());
    return tcon(first->con, std::move(args), head.span);
  }

  TypePtr parse_atype() {
    Token t = cur();
    switch (t.kind) {
      case Tok::LIdent:
        next();
        return tvar(t.text, t.span);
      case Tok::UIdent:
        next();
        return tcon(t.text, {}, t.span);
      case Tok::LParen: {
        next();
        if (at(Tok::RParen)) {
          next();
          return tcon(kConUnit, {}, t.span);
        }
        TypePtr first = parse_type();
        if (at(Tok::Comma)) {
          std::vector<TypePtr> fields{first};
          while (at(Tok::Comma)) {
            next();
            fields.push_back(parse_type());
          }
          expect(Tok::RParen, "')' closing tuple type");
          return tcon(kConTuple, std::move(fields), t.span);
        }
        expect(Tok::RParen, "')'");
        return first;
      }
      case Tok::Lt: {
        // <(a = sigma), sigma>
        next();
        expect(Tok::LParen, "'(' in packed type");
        std::string binder = expect(Tok::LIdent, "packed binder").text;
        expect(Tok::Equals, "'=' in packed type");
        TypePtr witness = parse_type();
        expect(Tok::RParen, "')' after packed witness");
        expect(Tok::Comma, "',' in packed type");
        TypePtr body = parse_type();
        expect(Tok::Gt, "'>' closing packed type");
        return tpacked(binder, witness, body);
      }
      default:
        perr(t.span, "expected a type");
    }
  }

  // --- patterns ---------------------------------------------------------------

  PatPtr parse_pat() {
    Token t = cur();
    if (at(Tok::KwPack)) {
      next();
      std::string binder = expect(Tok::LIdent, "type-name binder after pack").text;
      PatPtr inner = parse_apat();
      return punpack(binder, inner, t.span);
    }
    if (at(Tok::UIdent)) {
      // constructor with arguments (or bare)
      Token cn = next();
      std::vector<PatPtr> args;
      while (pat_atom_ahead()) args.push_back(parse_apat());
      PatPtr lhs = pcon(cn.text, std::move(args), cn.span);
      return parse_cons_tail(lhs);
    }
    PatPtr lhs = parse_apat();
    return parse_cons_tail(lhs);
  }

  PatPtr parse_cons_tail(PatPtr lhs) {
    if (at(Tok::Colon)) {
      Token c = next();
      PatPtr rhs = parse_pat();
      return pcon("Cons", {lhs, rhs}, c.span);
    }
    return lhs;
  }

  bool pat_atom_ahead() const {
    switch (cur().kind) {
      case Tok::LIdent:
      case Tok::UIdent:
      case Tok::Int:
      case Tok::Char:
      case Tok::String:
      case Tok::KwTrue:
      case Tok::KwFalse:
      case Tok::LParen:
      case Tok::Tilde:
        return true;
      default:
        return false;
    }
  }

  PatPtr parse_apat() {
    Token t = cur();
    switch (t.kind) {
      case Tok::LIdent:
        next();
        if (t.text == "_") return pwild(t.span);
        return pvar(t.text, t.span);
      case Tok::UIdent:
        next();
        return pcon(t.text, {}, t.span);
      case Tok::Int:
        next();
        return plit(lit_int(std::stoll(t.text)), t.span);
      case Tok::Char:
        next();
        return plit(lit_char(t.text[0]), t.span);
      case Tok::String:
        next();
        return plit(lit_string(t.text), t.span);
      case Tok::KwTrue:
        next();
        return plit(lit_bool(true), t.span);
      case Tok::KwFalse:
        next();
        return plit(lit_bool(false), t.span);
      case Tok::Tilde:
        next();
        return plazy(parse_apat(), t.span);
      case Tok::LParen: {
        next();
        if (at(Tok::RParen)) {
          next();
          return plit(lit_unit(), t.span);
        }
        PatPtr first = parse_pat();
        if (at(Tok::Comma)) {
          std::vector<PatPtr> fields{first};
          while (at(Tok::Comma)) {
            next();
            fields.push_back(parse_pat());
          }
          expect(Tok::RParen, "')' closing tuple pattern");
          return ptuple(std::move(fields), t.span);
        }
        expect(Tok::RParen, "')'");
        return first;
      }
      default:
        perr(t.span, "expected a pattern");
    }
  }

  // --- terms --------------------------------------------------------------------

  TermPtr parse_expr(bool allow_choice = false) {
    TermPtr first = parse_expr1();
    if (allow_choice && at(Tok::BarBarBar)) {
      std::vector<TermPtr> alts{first};
      while (at(Tok::BarBarBar)) {
        next();
        alts.push_back(parse_expr1());
      }
      return echoice(std::move(alts), first->span);
    }
    return first;
  }

  TermPtr parse_expr1() {
    Token t = cur();
    switch (t.kind) {
      case Tok::Backslash: {
        next();
        std::vector<PatPtr> params;
        while (!at(Tok::Arrow) && !at(Tok::Bar)) params.push_back(parse_apat());
        if (params.empty()) perr(t.span, "lambda needs at least one parameter");
        TermPtr guard;
        if (at(Tok::Bar)) {
          next();
          guard = parse_op_expr(0);
        }
        expect(Tok::Arrow, "'->' in lambda");
        TermPtr body = parse_expr1();
        return elam(std::move(params), body, guard, t.span);
      }
      case Tok::KwLet: {
        next();
        expect(Tok::LBrace, "'{' after let");
        std::vector<Binding> binds;
        while (!at(Tok::RBrace)) {
          Binding b;
          b.pat = parse_pat();
          expect(Tok::Equals, "'=' in let binding");
          b.rhs = parse_expr1();
          binds.push_back(std::move(b));
          if (at(Tok::Semi)) next();
          else break;
        }
        expect(Tok::RBrace, "'}' closing let bindings");
        expect(Tok::KwIn, "'in' after let bindings");
        TermPtr body = parse_expr1();
        return elet(std::move(binds), body, t.span);
      }
      case Tok::KwCase: {
        next();
        TermPtr scrut = parse_op_expr(1);
        expect(Tok::KwOf, "'of' in case");
        expect(Tok::LBrace, "'{' after of");
        std::vector<CaseBranch> branches;
        while (!at(Tok::RBrace)) {
          CaseBranch br;
          br.pat = parse_pat();
          expect(Tok::Arrow, "'->' in case branch");
          br.body = parse_expr1();
          branches.push_back(std::move(br));
          if (at(Tok::Semi)) next();
          else break;
        }
        expect(Tok::RBrace, "'}' closing case branches");
        return ecase(scrut, std::move(branches), t.span);
      }
      case Tok::KwIf: {
        next();
        TermPtr c = parse_expr1();
        expect(Tok::KwThen, "'then'");
        TermPtr a = parse_expr1();
        expect(Tok::KwElse, "'else'");
        TermPtr b = parse_expr1();
        std::vector<CaseBranch> branches;
        branches.push_back({plit(lit_bool(true), t.span), a});
        branches.push_back({plit(lit_bool(false), t.span), b});
        return ecase(c, std::move(branches), t.span);
      }
      case Tok::KwExbar: {
        next();
        std::string binder = expect(Tok::LIdent, "exbar binder").text;
        expect(Tok::Dot, "'.' after exbar binder");
        TermPtr body = parse_expr1();
        return eexbar(binder, body, t.span);
      }
      case Tok::KwPack: {
        next();
        expect(Tok::LParen, "'(' after pack");
        std::string binder = expect(Tok::LIdent, "pack binder").text;
        expect(Tok::Equals, "'=' in pack");
        TypePtr witness = parse_type();
        expect(Tok::RParen, "')' after pack witness");
        TermPtr payload = parse_aexpr();
        TypePtr as_ty;
        if (at(Tok::KwAs)) {
          next();
          as_ty = parse_type();
        }
        return epack(binder, witness, payload, as_ty, t.span);
      }
      default:
        return parse_op_expr(0);
    }
  }

  struct OpInfo {
    int prec;
    bool right;
  };

  bool binop_at(OpInfo& info) const {
    switch (cur().kind) {
      case Tok::Dollar: info = {1, true}; return true;
      case Tok::Lt:
      case Tok::Le:
      case Tok::EqEq: info = {4, false}; return true;
      case Tok::Colon: info = {5, true}; return true;
      case Tok::Plus:
      case Tok::Minus: info = {6, false}; return true;
      case Tok::Star: info = {7, false}; return true;
      case Tok::Dot: info = {9, true}; return true;
      default: return false;
    }
  }

  TermPtr parse_op_expr(int min_prec) {
    TermPtr lhs = parse_app_expr();
    for (;;) {
      OpInfo info;
      if (!binop_at(info) || info.prec < min_prec) return lhs;
      Token op = next();
      int next_min = info.right ? info.prec : info.prec + 1;
      TermPtr rhs;
      // operand of a low-precedence operator may itself be a lambda/let/...
      if (op.kind == Tok::Dollar)
        rhs = parse_expr1();
      else
        rhs = parse_op_expr(next_min);
      switch (op.kind) {
        case Tok::Dollar:
          lhs = eapp(lhs, rhs);
          break;
        case Tok::Colon:
          lhs = econ("Cons", {lhs, rhs}, op.span);
          break;
        case Tok::Dot: {
          static std::atomic<int> compose_counter{0};
          std::string v = "_c" + std::to_string(compose_counter++);
          lhs = elam({pvar(v, op.span)}, eapp(lhs, eapp(rhs, evar(v, op.span))),
                     nullptr, op.span);
          break;
        }
        default:
          lhs = eprim(op.text, {lhs, rhs}, op.span);
      }
    }
  }

  bool expr_atom_ahead() const {
    switch (cur().kind) {
      case Tok::LIdent:
      case Tok::UIdent:
      case Tok::Int:
      case Tok::Char:
      case Tok::String:
      case Tok::KwTrue:
      case Tok::KwFalse:
      case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  TermPtr parse_app_expr() {
    Token head = cur();
    TermPtr e = parse_aexpr();
    for (;;) {
      if (at(Tok::LBracket)) {
        next();
        TypePtr ty = parse_type();
        expect(Tok::RBracket, "']' closing type application");
        TermPtr t = etyapp(e, ty);
        e = t;
        continue;
      }
      if (!expr_atom_ahead()) return e;
      TermPtr arg = parse_aexpr();
      if (e->kind == TermKind::Con && e->var != kConTuple && e->var != kConUnit) {
        // grow a constructor application
        std::vector<TermPtr> args = e->items;
        args.push_back(arg);
        e = econ(e->var, std::move(args), head.span);
      } else {
        e = eapp(e, arg);
      }
    }
  }

  TermPtr parse_aexpr() {
    Token t = cur();
    switch (t.kind) {
      case Tok::LIdent:
        next();
        return evar(t.text, t.span);
      case Tok::UIdent:
        next();
        return econ(t.text, {}, t.span);
      case Tok::Int:
        next();
        return elit(lit_int(std::stoll(t.text)), t.span);
      case Tok::Char:
        next();
        return elit(lit_char(t.text[0]), t.span);
      case Tok::String:
        next();
        return elit(lit_string(t.text), t.span);
      case Tok::KwTrue:
        next();
        return elit(lit_bool(true), t.span);
      case Tok::KwFalse:
        next();
        return elit(lit_bool(false), t.span);
      case Tok::LParen: {
        next();
        if (at(Tok::RParen)) {
          next();
          return elit(lit_unit(), t.span);
        }
        TermPtr first = parse_expr1();
        if (at(Tok::Comma)) {
          std::vector<TermPtr> fields{first};
          while (at(Tok::Comma)) {
            next();
            fields.push_back(parse_expr1());
          }
          expect(Tok::RParen, "')' closing tuple");
          return econ(kConTuple, std::move(fields), t.span);
        }
        expect(Tok::RParen, "')'");
        return first;
      }
      default:
        perr(t.span, "expected an expression");
    }
  }
};

}  // namespace

ParseResult parse_program(const std::string& text, const std::string& file) {
  ParseResult r;
  try {
    Lexer lx(text, file);
    Parser p(lx.run(), file);
    r.program = p.parse();
  } catch (ParseError& e) {
    r.error = e.diag;
  }
  return r;
}

TypePtr parse_type_string(const std::string& text) {
  Lexer lx(text, "<type>");
  Parser p(lx.run(), "<type>");
  return p.parse_type_only();
}

TermPtr parse_term_string(const std::string& text) {
  Lexer lx(text, "<term>");
  Parser p(lx.run(), "<term>");
  return p.parse_term_only();
}

}  // namespace lazyf

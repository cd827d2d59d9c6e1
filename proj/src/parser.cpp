#include <cctype>
#include <cstdlib>

#include "rbmm/frontend.hpp"

namespace rbmm {

namespace {

enum class Tok { Name, Var, Int, Punct, End, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  int64_t value = 0;
  SrcLoc loc;
  bool spaced = false;  // preceded by whitespace
};

class Lexer {
public:
  explicit Lexer(const std::string &src) : s_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      bool spaced = skip_space();
      Token t;
      t.loc = {line_, col()};
      t.spaced = spaced;
      if (i_ >= s_.size()) {
        t.kind = Tok::Eof;
        out.push_back(t);
        return out;
      }
      char c = s_[i_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t st = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        t.kind = Tok::Int;
        t.text = s_.substr(st, i_ - st);
        t.value = std::strtoll(t.text.c_str(), nullptr, 10);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t st = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
        bool upper = std::isupper(static_cast<unsigned char>(c)) || c == '_';
        // module-qualified names such as io.write
        while (!upper && i_ + 1 < s_.size() && s_[i_] == '.' &&
               std::islower(static_cast<unsigned char>(s_[i_ + 1]))) {
          ++i_;
          while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
        }
        t.kind = upper ? Tok::Var : Tok::Name;
        t.text = s_.substr(st, i_ - st);
      } else if (c == '.' && (i_ + 1 >= s_.size() || std::isspace(static_cast<unsigned char>(s_[i_ + 1])) ||
                              s_[i_ + 1] == '%')) {
        ++i_;
        t.kind = Tok::End;
        t.text = ".";
      } else {
        static const char *ops[] = {"--->", "=:=", "=\\=", ":-", "::", ":=", "==", "=<", "=>", "<=", ">=",
                                    "\\+",  "\\=", "//",  "(",  ")",  "[",  "]",  "|",  ",",  ";",  "!",
                                    "@",    "<",   ">",   "=",  "+",  "-",  "*",  "/"};
        bool found = false;
        for (const char *op : ops) {
          size_t n = std::char_traits<char>::length(op);
          if (s_.compare(i_, n, op) == 0) {
            t.kind = Tok::Punct;
            t.text = op;
            i_ += n;
            found = true;
            break;
          }
        }
        if (!found)
          throw Error(Error::Kind::Syntax, t.loc, std::string("syntax error: unexpected character '") + c + "'");
      }
      out.push_back(t);
    }
  }

private:
  int col() const { return static_cast<int>(i_ - line_start_) + 1; }

  bool skip_space() {
    bool any = false;
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == '\n') {
        ++i_;
        ++line_;
        line_start_ = i_;
        any = true;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
        any = true;
      } else if (c == '%') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
        any = true;
      } else if (c == '/' && i_ + 1 < s_.size() && s_[i_ + 1] == '*') {
        i_ += 2;
        while (i_ + 1 < s_.size() && !(s_[i_] == '*' && s_[i_ + 1] == '/')) {
          if (s_[i_] == '\n') {
            ++line_;
            line_start_ = i_ + 1;
          }
          ++i_;
        }
        i_ = std::min(i_ + 2, s_.size());
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  const std::string &s_;
  size_t i_ = 0;
  int line_ = 1;
  size_t line_start_ = 0;
};

bool is_relop(const std::string &s) {
  return s == "=" || s == "<=" || s == "=>" || s == ":=" || s == "==" || s == "<" || s == ">" || s == "=<" ||
         s == ">=" || s == "=:=" || s == "=\\=" || s == "\\=";
}

class Parser {
public:
  Parser(std::vector<Token> toks, ParseOptions opts) : t_(std::move(toks)), opts_(opts) {}

  SurfaceProgram run() {
    SurfaceProgram sp;
    sp.annotated = opts_.allow_annotations;
    while (peek().kind != Tok::Eof) item(sp);
    return sp;
  }

private:
  const Token &peek(size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
  Token next() { return t_[std::min(p_++, t_.size() - 1)]; }

  bool is_punct(const std::string &s, size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == s;
  }
  bool is_name(const std::string &s, size_t k = 0) const { return peek(k).kind == Tok::Name && peek(k).text == s; }

  [[noreturn]] void fail(const std::string &what) const {
    const Token &t = peek();
    std::string got = t.kind == Tok::Eof ? "end of file" : "'" + t.text + "'";
    throw Error(Error::Kind::Syntax, t.loc, "syntax error: expected " + what + ", found " + got);
  }

  void expect_punct(const std::string &s) {
    if (!is_punct(s)) fail("'" + s + "'");
    ++p_;
  }
  void expect_name(const std::string &s) {
    if (!is_name(s)) fail("'" + s + "'");
    ++p_;
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("'.'");
    ++p_;
  }
  std::string name() {
    if (peek().kind != Tok::Name) fail("a name");
    return next().text;
  }
  std::string var() {
    if (peek().kind != Tok::Var) fail("a variable");
    return next().text;
  }

  void item(SurfaceProgram &sp) {
    if (is_punct(":-")) {
      ++p_;
      SrcLoc loc = peek().loc;
      std::string kw = name();
      if (kw == "type")
        type_decl(sp, loc);
      else if (kw == "pred")
        pred_decl(sp, loc);
      else if (kw == "mode")
        mode_decl(sp, loc);
      else if (kw == "module" || kw == "interface" || kw == "implementation" || kw == "import_module") {
        while (peek().kind != Tok::End && peek().kind != Tok::Eof) ++p_;
        expect_end();
      } else
        throw Error(Error::Kind::Syntax, loc, "syntax error: unknown declaration '" + kw + "'");
      return;
    }
    Clause c;
    c.loc = peek().loc;
    c.head = term();
    c.head_region_args = pending_region_args_;
    pending_region_args_.clear();
    pending_has_region_args_ = false;
    if (c.head.kind != Term::Kind::Functor) throw Error(Error::Kind::Syntax, c.loc, "syntax error: bad clause head");
    if (is_punct(":-")) {
      ++p_;
      c.body = goal();
      c.has_body = true;
    }
    expect_end();
    sp.clauses.push_back(std::move(c));
  }

  std::string type_name() {
    std::string n = name();
    return n;
  }

  void type_decl(SurfaceProgram &sp, SrcLoc loc) {
    TypeDef d;
    d.loc = loc;
    d.name = name();
    expect_punct("--->");
    for (;;) {
      Constructor c;
      if (is_punct("[")) {
        ++p_;
        if (is_punct("]")) {
          ++p_;
          c.name = kNilName;
        } else {
          c.name = kConsName;
          c.args.push_back(type_name());
          expect_punct("|");
          c.args.push_back(type_name());
          expect_punct("]");
        }
      } else {
        c.name = name();
        if (is_punct("(")) {
          ++p_;
          c.args.push_back(type_name());
          while (is_punct(",")) {
            ++p_;
            c.args.push_back(type_name());
          }
          expect_punct(")");
        }
      }
      d.ctors.push_back(std::move(c));
      if (!is_punct(";")) break;
      ++p_;
    }
    expect_end();
    sp.types.push_back(std::move(d));
  }

  static bool mode_of(const std::string &m, Mode &out) {
    if (m == "in" || m == "di") {
      out = Mode::In;
      return true;
    }
    if (m == "out" || m == "uo") {
      out = Mode::Out;
      return true;
    }
    return false;
  }

  Determinism det() {
    SrcLoc loc = peek().loc;
    std::string d = name();
    if (d == "det") return Determinism::Det;
    if (d == "semidet") return Determinism::Semidet;
    if (d == "multi") return Determinism::Multi;
    if (d == "nondet") return Determinism::Nondet;
    if (d == "failure") return Determinism::Failure;
    throw Error(Error::Kind::Syntax, loc, "syntax error: unknown determinism '" + d + "'");
  }

  Mode mode() {
    SrcLoc loc = peek().loc;
    std::string m = name();
    Mode md;
    if (!mode_of(m, md)) throw Error(Error::Kind::Syntax, loc, "syntax error: unknown mode '" + m + "'");
    return md;
  }

  void pred_decl(SurfaceProgram &sp, SrcLoc loc) {
    PredDecl d;
    d.loc = loc;
    d.name = name();
    std::vector<Mode> inline_modes;
    bool has_inline = false;
    if (is_punct("(")) {
      ++p_;
      for (;;) {
        d.arg_types.push_back(type_name());
        if (is_punct("::")) {
          ++p_;
          inline_modes.push_back(mode());
          has_inline = true;
        }
        if (!is_punct(",")) break;
        ++p_;
      }
      expect_punct(")");
    }
    if (has_inline && inline_modes.size() != d.arg_types.size())
      throw Error(Error::Kind::Syntax, loc, "syntax error: modes given for only some arguments of " + d.name);
    if (is_name("is")) {
      ++p_;
      Determinism dt = det();
      if (!has_inline && !d.arg_types.empty())
        throw Error(Error::Kind::Syntax, loc, "syntax error: determinism without modes for " + d.name);
      d.modes.push_back(inline_modes);
      d.dets.push_back(dt);
    } else if (has_inline) {
      throw Error(Error::Kind::Syntax, loc, "syntax error: missing determinism for " + d.name);
    }
    expect_end();
    sp.preds.push_back(std::move(d));
  }

  void mode_decl(SurfaceProgram &sp, SrcLoc loc) {
    std::string n = name();
    std::vector<Mode> ms;
    if (is_punct("(")) {
      ++p_;
      ms.push_back(mode());
      while (is_punct(",")) {
        ++p_;
        ms.push_back(mode());
      }
      expect_punct(")");
    }
    expect_name("is");
    Determinism dt = det();
    expect_end();
    for (auto it = sp.preds.rbegin(); it != sp.preds.rend(); ++it) {
      if (it->name == n && it->arg_types.size() == ms.size()) {
        it->modes.push_back(ms);
        it->dets.push_back(dt);
        return;
      }
    }
    throw Error(Error::Kind::Syntax, loc,
                "mode declaration for undeclared predicate " + n + "/" + std::to_string(ms.size()));
  }

  // ---- goals

  SGoal goal() {
    SGoal first = conj();
    if (!is_punct(";")) return first;
    SGoal d;
    d.kind = SGoal::Kind::Disj;
    d.loc = first.loc;
    d.sub.push_back(std::move(first));
    while (is_punct(";")) {
      ++p_;
      d.sub.push_back(conj());
    }
    return d;
  }

  SGoal conj() {
    SGoal first = unary();
    if (!is_punct(",")) return first;
    SGoal c;
    c.kind = SGoal::Kind::Conj;
    c.loc = first.loc;
    c.sub.push_back(std::move(first));
    while (is_punct(",")) {
      ++p_;
      c.sub.push_back(unary());
    }
    return c;
  }

  std::vector<std::string> var_list() {
    std::vector<std::string> vs;
    expect_punct("[");
    if (!is_punct("]")) {
      vs.push_back(var());
      while (is_punct(",")) {
        ++p_;
        vs.push_back(var());
      }
    }
    expect_punct("]");
    return vs;
  }

  SGoal ite_rest(SrcLoc loc) {
    SGoal g;
    g.kind = SGoal::Kind::Ite;
    g.loc = loc;
    g.sub.push_back(goal());
    expect_name("then");
    g.sub.push_back(goal());
    expect_name("else");
    g.sub.push_back(goal());
    return g;
  }

  SGoal unary() {
    SrcLoc loc = peek().loc;
    if (is_name("not") && !is_punct("(", 1)) {
      ++p_;
      SGoal g;
      g.kind = SGoal::Kind::Not;
      g.loc = loc;
      g.sub.push_back(unary());
      return g;
    }
    if (is_punct("\\+") || (is_name("not") && is_punct("(", 1))) {
      ++p_;
      SGoal g;
      g.kind = SGoal::Kind::Not;
      g.loc = loc;
      g.sub.push_back(unary());
      return g;
    }
    if ((is_name("some") || is_name("all")) && is_punct("[", 1)) {
      bool all = peek().text == "all";
      ++p_;
      SGoal g;
      g.kind = all ? SGoal::Kind::All : SGoal::Kind::Some;
      g.loc = loc;
      g.vars = var_list();
      g.sub.push_back(unary());
      return g;
    }
    if (is_name("if")) {
      ++p_;
      return ite_rest(loc);
    }
    if (is_punct("(")) {
      if (opts_.allow_annotations && peek(1).kind == Tok::Int && is_punct(")", 2)) {
        int label = static_cast<int>(peek(1).value);
        p_ += 3;
        SGoal g = unary();
        g.label = label;
        return g;
      }
      ++p_;
      SGoal g;
      if (is_name("if")) {
        ++p_;
        g = ite_rest(loc);
      } else {
        g = goal();
      }
      expect_punct(")");
      return g;
    }
    if (opts_.allow_annotations && (is_name("create") || is_name("remove")) && is_punct("(", 1) &&
        peek(2).kind == Tok::Var && is_punct(")", 3)) {
      SGoal g;
      g.kind = SGoal::Kind::Instr;
      g.loc = loc;
      g.op = peek().text;
      g.vars.push_back(peek(2).text);
      p_ += 4;
      return g;
    }
    return simple();
  }

  SGoal simple() {
    SrcLoc loc = peek().loc;
    SGoal g;
    g.loc = loc;
    Term lhs = expr();
    std::string op;
    if (peek().kind == Tok::Punct && is_relop(peek().text))
      op = next().text;
    else if (is_name("is"))
      op = next().text;
    if (op.empty()) {
      if (lhs.kind != Term::Kind::Functor) throw Error(Error::Kind::Syntax, loc, "syntax error: expected a goal");
      g.kind = SGoal::Kind::Call;
      g.call = std::move(lhs);
      g.region_args = pending_region_args_;
      g.has_region_args = pending_has_region_args_;
      pending_region_args_.clear();
      pending_has_region_args_ = false;
      return g;
    }
    pending_region_args_.clear();
    pending_has_region_args_ = false;
    g.kind = SGoal::Kind::Unify;
    g.op = op;
    g.lhs = std::move(lhs);
    g.rhs = expr();
    if (opts_.allow_annotations && is_name("in") && peek(1).kind == Tok::Var) {
      ++p_;
      g.in_region = next().text;
    }
    return g;
  }

  // ---- terms and arithmetic expressions

  Term expr() {
    Term left = mul_expr();
    while (is_punct("+") || is_punct("-")) {
      Term t;
      t.kind = Term::Kind::Functor;
      t.loc = peek().loc;
      t.name = next().text;
      t.args.push_back(std::move(left));
      t.args.push_back(mul_expr());
      left = std::move(t);
    }
    return left;
  }

  Term mul_expr() {
    Term left = unary_expr();
    while (is_punct("*") || is_punct("//") || is_punct("/") || is_name("mod") || is_name("rem")) {
      Term t;
      t.kind = Term::Kind::Functor;
      t.loc = peek().loc;
      t.name = next().text;
      if (t.name == "/") t.name = "//";
      if (t.name == "rem") t.name = "mod";
      t.args.push_back(std::move(left));
      t.args.push_back(unary_expr());
      left = std::move(t);
    }
    return left;
  }

  Term unary_expr() {
    if (is_punct("-")) {
      SrcLoc loc = next().loc;
      if (peek().kind == Tok::Int) {
        Term t;
        t.kind = Term::Kind::Int;
        t.loc = loc;
        t.value = -next().value;
        return t;
      }
      Term t;
      t.kind = Term::Kind::Functor;
      t.loc = loc;
      t.name = "-";
      t.args.push_back(unary_expr());
      return t;
    }
    return term();
  }

  Term term() {
    Token tk = peek();
    Term t;
    t.loc = tk.loc;
    switch (tk.kind) {
      case Tok::Var:
        ++p_;
        t.kind = Term::Kind::Var;
        t.name = tk.text;
        region_suffix(t);
        return t;
      case Tok::Int:
        ++p_;
        t.kind = Term::Kind::Int;
        t.value = tk.value;
        return t;
      case Tok::Name: {
        ++p_;
        t.kind = Term::Kind::Functor;
        t.name = tk.text;
        if (opts_.allow_annotations && is_punct("<") && !peek().spaced) {
          ++p_;
          pending_region_args_.clear();
          pending_has_region_args_ = true;
          if (!is_punct(">")) {
            pending_region_args_.push_back(var());
            while (is_punct(",")) {
              ++p_;
              pending_region_args_.push_back(var());
            }
          }
          expect_punct(">");
        }
        if (is_punct("(") && !peek().spaced) {
          ++p_;
          t.args.push_back(arg_term());
          while (is_punct(",")) {
            ++p_;
            t.args.push_back(arg_term());
          }
          expect_punct(")");
        }
        return t;
      }
      case Tok::Punct:
        if (tk.text == "[") {
          ++p_;
          if (is_punct("]")) {
            ++p_;
            t.kind = Term::Kind::Functor;
            t.name = kNilName;
            return t;
          }
          std::vector<Term> elems;
          elems.push_back(expr());
          while (is_punct(",")) {
            ++p_;
            elems.push_back(expr());
          }
          Term tail;
          tail.kind = Term::Kind::Functor;
          tail.name = kNilName;
          tail.loc = peek().loc;
          if (is_punct("|")) {
            ++p_;
            tail = expr();
          }
          expect_punct("]");
          for (auto it = elems.rbegin(); it != elems.rend(); ++it) {
            Term c;
            c.kind = Term::Kind::Functor;
            c.name = kConsName;
            c.loc = it->loc;
            c.args.push_back(std::move(*it));
            c.args.push_back(std::move(tail));
            tail = std::move(c);
          }
          tail.loc = tk.loc;
          return tail;
        }
        if (tk.text == "(") {
          ++p_;
          Term inner = expr();
          expect_punct(")");
          return inner;
        }
        if (tk.text == "!") {
          ++p_;
          t.kind = Term::Kind::Var;
          t.name = "!" + var();
          return t;
        }
        break;
      default: break;
    }
    fail("a term");
  }

  Term arg_term() {
    Term t = expr();
    return t;
  }

  void region_suffix(Term &t) {
    if (opts_.allow_annotations && is_punct("@") && peek(1).kind == Tok::Var) {
      ++p_;
      t.region = next().text;
    }
  }

  std::vector<Token> t_;
  size_t p_ = 0;
  ParseOptions opts_;
  std::vector<std::string> pending_region_args_;
  bool pending_has_region_args_ = false;
};

}  // namespace

SurfaceProgram parse_surface(const std::string &text, ParseOptions opts) {
  Lexer lx(text);
  Parser ps(lx.run(), opts);
  return ps.run();
}

}  // namespace rbmm

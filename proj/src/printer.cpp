#include <sstream>

#include "rbmm/frontend.hpp"

namespace rbmm {

namespace {

const PrintDecor kPlain;

std::string expr_str(const Procedure &p, const Expr &e, int prec = 0) {
  auto bin = [&](const char *op, int my) {
    std::string s = expr_str(p, e.args[0], my) + " " + op + " " + expr_str(p, e.args[1], my + 1);
    return my < prec ? "(" + s + ")" : s;
  };
  switch (e.kind) {
    case Expr::Kind::Var: return p.vars[e.var].name;
    case Expr::Kind::Int: return e.value < 0 ? "(" + std::to_string(e.value) + ")" : std::to_string(e.value);
    case Expr::Kind::Add: return bin("+", 1);
    case Expr::Kind::Sub: return bin("-", 1);
    case Expr::Kind::Mul: return bin("*", 2);
    case Expr::Kind::Div: return bin("//", 2);
    case Expr::Kind::Mod: return bin("mod", 2);
    case Expr::Kind::Neg: return "-(" + expr_str(p, e.args[0]) + ")";
  }
  return "?";
}

std::string mode_name(Mode m) { return m == Mode::In ? "in" : "out"; }

class Printer {
public:
  Printer(const Program &prog, const PrintDecor &d) : prog_(prog), d_(d) {}

  std::string var(const Procedure &p, int v, bool with_region) const {
    std::string s = p.vars[v].name;
    if (with_region) s += d_.var_region(p, v);
    return s;
  }

  std::string atom(const Procedure &p, const Goal &g) const {
    switch (g.kind) {
      case GoalKind::Unify: {
        std::string l = var(p, g.lhs, false);
        if (g.functor.empty()) {
          const char *op = g.ukind == UnifyKind::Test ? " == " : g.ukind == UnifyKind::Assign ? " := " : " = ";
          return l + op + var(p, g.rhs, false);
        }
        const char *op = g.ukind == UnifyKind::Construct ? " <= " : g.ukind == UnifyKind::Deconstruct ? " => " : " = ";
        std::string s = l + op + term(p, g);
        if (g.ukind == UnifyKind::Construct) s += d_.construct_region(p, g);
        return s;
      }
      case GoalKind::Call: {
        std::string s = g.pred + d_.call_regions(p, g);
        if (g.args.empty()) return s;
        s += "(";
        for (size_t i = 0; i < g.args.size(); ++i) s += (i ? ", " : "") + var(p, g.args[i], true);
        return s + ")";
      }
      case GoalKind::Builtin: return builtin(p, g);
      default: return "?";
    }
  }

  std::string term(const Procedure &p, const Goal &g) const {
    if (g.functor == kConsName && g.args.size() == 2)
      return "[" + var(p, g.args[0], false) + " | " + var(p, g.args[1], false) + "]";
    if (g.args.empty()) return g.functor;
    std::string s = g.functor + "(";
    for (size_t i = 0; i < g.args.size(); ++i) s += (i ? ", " : "") + var(p, g.args[i], false);
    return s + ")";
  }

  std::string builtin(const Procedure &p, const Goal &g) const {
    auto cmp = [&](const char *op) { return expr_str(p, g.exprs[0], 1) + " " + op + " " + expr_str(p, g.exprs[1], 1); };
    switch (g.bop) {
      case BuiltinOp::Is: return var(p, g.out, false) + " is " + expr_str(p, g.exprs[0]);
      case BuiltinOp::Lt: return cmp("<");
      case BuiltinOp::Gt: return cmp(">");
      case BuiltinOp::Le: return cmp("=<");
      case BuiltinOp::Ge: return cmp(">=");
      case BuiltinOp::Eq: return cmp("=:=");
      case BuiltinOp::Ne: return cmp("=\\=");
      case BuiltinOp::Print: return "print(" + var(p, g.args[0], false) + ")";
      case BuiltinOp::Write:
        return "io.write(" + var(p, g.args[0], false) + ", " + var(p, g.args[1], false) + ", " +
               var(p, g.out, false) + ")";
      case BuiltinOp::Nl: return "io.nl(" + var(p, g.args[0], false) + ", " + var(p, g.out, false) + ")";
      case BuiltinOp::True: return "true";
      case BuiltinOp::Fail: return "fail";
    }
    return "?";
  }

  // Emits `g` as a sequence of lines at the given depth. Conjunction items
  // are separated by commas; the caller appends the closing punctuation.
  void goal(const Procedure &p, const Goal &g, int depth, std::vector<std::string> &out) const {
    switch (g.kind) {
      case GoalKind::Unify:
      case GoalKind::Call:
      case GoalKind::Builtin: {
        for (const auto &s : d_.before(p, g)) out.push_back(pad(depth) + s + ",");
        std::string lbl = d_.labels() ? "(" + std::to_string(g.point) + ") " : "";
        out.push_back(pad(depth) + lbl + atom(p, g));
        auto after = d_.after(p, g);
        for (const auto &s : after) {
          out.back() += ",";
          out.push_back(pad(depth) + s);
        }
        return;
      }
      case GoalKind::Conj: {
        if (g.sub.empty()) {
          out.push_back(pad(depth) + "true");
          return;
        }
        for (size_t i = 0; i < g.sub.size(); ++i) {
          if (i) out.back() += ",";
          goal(p, g.sub[i], depth, out);
        }
        return;
      }
      case GoalKind::Disj: {
        out.push_back(pad(depth) + "(");
        if (g.sub.empty()) out.push_back(pad(depth + 1) + "fail");
        for (size_t i = 0; i < g.sub.size(); ++i) {
          if (i) out.push_back(pad(depth) + ";");
          goal(p, g.sub[i], depth + 1, out);
        }
        out.push_back(pad(depth) + ")");
        return;
      }
      case GoalKind::Ite: {
        out.push_back(pad(depth) + "( if");
        goal(p, g.sub[0], depth + 1, out);
        out.push_back(pad(depth) + "then");
        goal(p, g.sub[1], depth + 1, out);
        out.push_back(pad(depth) + "else");
        goal(p, g.sub[2], depth + 1, out);
        out.push_back(pad(depth) + ")");
        return;
      }
      case GoalKind::Some: {
        std::string vs;
        for (size_t i = 0; i < g.qvars.size(); ++i) vs += (i ? ", " : "") + p.vars[g.qvars[i]].name;
        out.push_back(pad(depth) + "some [" + vs + "] (");
        goal(p, g.sub[0], depth + 1, out);
        out.push_back(pad(depth) + ")");
        return;
      }
    }
  }

  std::string procedure(const Procedure &p) const {
    std::ostringstream os;
    os << p.name << d_.head_regions(p);
    if (!p.head_vars.empty()) {
      os << "(";
      for (size_t i = 0; i < p.head_vars.size(); ++i) os << (i ? ", " : "") << var(p, p.head_vars[i], true);
      os << ")";
    }
    os << " :-\n";
    std::vector<std::string> lines;
    goal(p, p.body, 1, lines);
    for (size_t i = 0; i < lines.size(); ++i) os << lines[i] << (i + 1 == lines.size() ? ".\n" : "\n");
    return os.str();
  }

  static std::string pad(int depth) { return std::string(static_cast<size_t>(depth) * 4, ' '); }

private:
  const Program &prog_;
  const PrintDecor &d_;
};

std::string type_decl(const TypeDef &t) {
  std::string s = ":- type " + t.name + " ---> ";
  for (size_t i = 0; i < t.ctors.size(); ++i) {
    const auto &c = t.ctors[i];
    if (i) s += " ; ";
    if (c.name == kConsName && c.args.size() == 2) {
      s += "[" + c.args[0] + " | " + c.args[1] + "]";
      continue;
    }
    s += c.name;
    if (!c.args.empty()) {
      s += "(";
      for (size_t j = 0; j < c.args.size(); ++j) s += (j ? ", " : "") + c.args[j];
      s += ")";
    }
  }
  return s + ".\n";
}

}  // namespace

std::string print_declarations(const Program &prog) {
  std::ostringstream os;
  for (const auto &t : prog.types.all())
    if (!t.builtin) os << type_decl(t);
  std::string last;
  for (const auto &p : prog.procs) {
    std::string key = p.name + "/" + std::to_string(p.arity);
    if (key != last) {
      os << ":- pred " << p.name;
      if (p.arity) {
        os << "(";
        for (size_t i = 0; i < p.arg_types.size(); ++i) os << (i ? ", " : "") << p.arg_types[i];
        os << ")";
      }
      os << ".\n";
      last = key;
    }
    os << ":- mode " << p.name;
    if (p.arity) {
      os << "(";
      for (size_t i = 0; i < p.modes.size(); ++i) os << (i ? ", " : "") << mode_name(p.modes[i]);
      os << ")";
    }
    os << " is " << det_name(p.det) << ".\n";
  }
  return os.str();
}

std::string print_program(const Program &prog, const PrintDecor *decor) {
  Printer pr(prog, decor ? *decor : kPlain);
  std::ostringstream os;
  os << print_declarations(prog);
  for (const auto &p : prog.procs) os << "\n" << pr.procedure(p);
  return os.str();
}

std::string print_goal(const Program &prog, const Procedure &p, const Goal &g) {
  Printer pr(prog, kPlain);
  std::vector<std::string> lines;
  pr.goal(p, g, 0, lines);
  std::string s;
  for (const auto &l : lines) s += l + "\n";
  return s;
}

std::string print_atom(const Program &prog, const Procedure &p, const Goal &g) {
  return Printer(prog, kPlain).atom(p, g);
}

}  // namespace rbmm

#include "cobble/printer.hpp"

#include <cassert>
#include <cstring>

namespace cobble {

namespace {

// C precedence, higher binds tighter. Postfix 15, unary 14, cast 13,
// then the binary ladder down to comma 0.
int binop_prec(BinOp op) {
  switch (op) {
    case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 12;
    case BinOp::Add: case BinOp::Sub: return 11;
    case BinOp::Shl: case BinOp::Shr: return 10;
    case BinOp::Lt: case BinOp::Gt: case BinOp::Le: case BinOp::Ge: return 9;
    case BinOp::Eq: case BinOp::Ne: return 8;
    case BinOp::BitAnd: return 7;
    case BinOp::BitXor: return 6;
    case BinOp::BitOr: return 5;
    case BinOp::LogAnd: return 4;
    case BinOp::LogOr: return 3;
  }
  return 0;
}

const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Shl: return "<<";
    case BinOp::Shr: return ">>";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::BitAnd: return "&";
    case BinOp::BitXor: return "^";
    case BinOp::BitOr: return "|";
    case BinOp::LogAnd: return "&&";
    case BinOp::LogOr: return "||";
  }
  return "?";
}

const char* assign_text(AssignOp op) {
  switch (op) {
    case AssignOp::Assign: return "=";
    case AssignOp::Add: return "+=";
    case AssignOp::Sub: return "-=";
    case AssignOp::Mul: return "*=";
    case AssignOp::Div: return "/=";
    case AssignOp::Mod: return "%=";
    case AssignOp::Shl: return "<<=";
    case AssignOp::Shr: return ">>=";
    case AssignOp::And: return "&=";
    case AssignOp::Xor: return "^=";
    case AssignOp::Or: return "|=";
  }
  return "?";
}

int expr_prec(const Expr* e) {
  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Literal:
    case Expr::Kind::String:
    case Expr::Kind::Call:
    case Expr::Kind::Index:
    case Expr::Kind::Member:
    case Expr::Kind::SizeofExpr:
    case Expr::Kind::SizeofType:
    case Expr::Kind::InitList:
      return 15;
    case Expr::Kind::Unary:
      return (e->un_op == UnOp::PostInc || e->un_op == UnOp::PostDec) ? 15 : 14;
    case Expr::Kind::Deref:
      return 14;
    case Expr::Kind::Cast:
      return 13;
    case Expr::Kind::Binary:
      return binop_prec(e->bin_op);
    case Expr::Kind::Cond:
      return 2;
    case Expr::Kind::Assign:
      return 1;
    case Expr::Kind::Comma:
      return 0;
  }
  return 0;
}

bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Lt: case BinOp::Gt: case BinOp::Le: case BinOp::Ge:
    case BinOp::Eq: case BinOp::Ne:
      return true;
    default:
      return false;
  }
}

bool is_bitwise(BinOp op) {
  return op == BinOp::BitAnd || op == BinOp::BitXor || op == BinOp::BitOr;
}

// Parens beyond precedence, matching what -Wparentheses would flag.
bool warn_pair(const Expr* parent, const Expr* child) {
  if (parent->kind != Expr::Kind::Binary || child->kind != Expr::Kind::Binary)
    return false;
  BinOp p = parent->bin_op, c = child->bin_op;
  if (p == BinOp::LogOr && c == BinOp::LogAnd) return true;
  if (is_bitwise(p) && c != p) return true;
  if ((p == BinOp::Shl || p == BinOp::Shr) &&
      (c == BinOp::Add || c == BinOp::Sub))
    return true;
  if (is_comparison(p) && is_comparison(c)) return true;
  return false;
}

std::string expr_text(const Expr* e);

// Child rendering with parens when the child binds looser than the
// context requires (or a warn pair applies).
std::string child_text(const Expr* parent, const Expr* child, int need) {
  std::string s = expr_text(child);
  if (expr_prec(child) < need || (parent && warn_pair(parent, child)))
    return "(" + s + ")";
  return s;
}

// Splits a declaration into base type and declarator fragment, so that
// "int *p" and grouped for-init declarators print naturally.
void decl_fragments(const TypeDesc* t, const std::string& name,
                    std::string* base, std::string* frag) {
  std::string suffix;
  while (t->is_array()) {
    if (t->array_len < 0)
      suffix += "[]";
    else
      suffix += "[" + std::to_string(t->array_len) + "]";
    t = t->elem;
  }
  std::string stars;
  while (t->is_pointer()) {
    stars += "*";
    t = t->elem;
  }
  *base = t->is_record() ? "struct " + t->record->tag : scalar_c_type(t->scalar);
  *frag = stars + name + suffix;
}

std::string expr_text(const Expr* e) {
  switch (e->kind) {
    case Expr::Kind::Var:
      return e->name;
    case Expr::Kind::Literal:
    case Expr::Kind::String:
      return e->lexeme;
    case Expr::Kind::Index:
      return child_text(e, e->a, 15) + "[" + expr_text(e->b) + "]";
    case Expr::Kind::Member:
      return child_text(e, e->a, 15) + (e->arrow ? "->" : ".") + e->name;
    case Expr::Kind::Deref: {
      std::string inner = child_text(e, e->a, 13);
      return "*" + inner;
    }
    case Expr::Kind::Unary: {
      const char* tok = "";
      bool post = false;
      switch (e->un_op) {
        case UnOp::Plus: tok = "+"; break;
        case UnOp::Minus: tok = "-"; break;
        case UnOp::Not: tok = "!"; break;
        case UnOp::BitNot: tok = "~"; break;
        case UnOp::AddrOf: tok = "&"; break;
        case UnOp::PreInc: tok = "++"; break;
        case UnOp::PreDec: tok = "--"; break;
        case UnOp::PostInc: tok = "++"; post = true; break;
        case UnOp::PostDec: tok = "--"; post = true; break;
      }
      if (post) return child_text(e, e->a, 15) + tok;
      std::string inner = child_text(e, e->a, 13);
      // "-(-x)" instead of "--x": keep token boundaries unambiguous.
      if (!inner.empty() && inner[0] == tok[strlen(tok) - 1])
        inner = "(" + inner + ")";
      return tok + inner;
    }
    case Expr::Kind::Binary: {
      int p = binop_prec(e->bin_op);
      return child_text(e, e->a, p) + " " + binop_text(e->bin_op) + " " +
             child_text(e, e->b, p + 1);
    }
    case Expr::Kind::Assign:
      return child_text(e, e->a, 14) + " " + assign_text(e->assign_op) + " " +
             child_text(e, e->b, 1);
    case Expr::Kind::Cond:
      return child_text(e, e->a, 3) + " ? " + child_text(e, e->b, 1) + " : " +
             child_text(e, e->c, 2);
    case Expr::Kind::Comma:
      return child_text(e, e->a, 0) + ", " + child_text(e, e->b, 1);
    case Expr::Kind::Call: {
      std::string s = e->name + "(";
      for (size_t i = 0; i < e->args.size(); i++) {
        if (i) s += ", ";
        s += child_text(e, e->args[i], 1);
      }
      return s + ")";
    }
    case Expr::Kind::Cast:
      return "(" + type_c_text(e->cast_type) + ")" + child_text(e, e->a, 13);
    case Expr::Kind::SizeofExpr:
      return "sizeof(" + expr_text(e->a) + ")";
    case Expr::Kind::SizeofType:
      return "sizeof(" + type_c_text(e->cast_type) + ")";
    case Expr::Kind::InitList: {
      std::string s = "{ ";
      for (size_t i = 0; i < e->args.size(); i++) {
        if (i) s += ", ";
        s += child_text(e, e->args[i], 1);
      }
      return s + " }";
    }
  }
  return "";
}

class UnitPrinter {
 public:
  std::string run(const SourceUnit& u) {
    bool any_include = false;
    for (const auto& item : u.preamble)
      if (item.kind == PreambleItem::Kind::Include) {
        out_ += "#include <" + item.header + ">\n";
        any_include = true;
      }
    bool any_other = false;
    for (const auto& item : u.preamble) {
      if (item.kind == PreambleItem::Kind::Include) continue;
      if (!any_other && any_include) out_ += "\n";
      any_other = true;
      if (item.kind == PreambleItem::Kind::Record) {
        print_record(item.record, 0);
      } else {
        out_ += var_decl_text(item.var) + "\n";
      }
    }
    if (any_include || any_other) out_ += "\n";
    print_function(*u.fn);
    return std::move(out_);
  }

 private:
  std::string out_;

  void indent(int level) { out_.append(level * 4, ' '); }

  void print_record(const RecordType* rec, int level) {
    indent(level);
    out_ += "struct " + rec->tag + " {\n";
    for (const auto& f : rec->fields) {
      indent(level + 1);
      std::string base, frag;
      decl_fragments(f.type, f.name, &base, &frag);
      out_ += base + " " + frag + ";\n";
    }
    indent(level);
    out_ += "};\n";
  }

  std::string var_decl_text(const Declarator& d) {
    std::string base, frag;
    decl_fragments(d.type, d.name, &base, &frag);
    std::string s = (d.is_static ? "static " : "") + base + " " + frag;
    if (d.init) s += " = " + expr_text(d.init);
    return s + ";";
  }

  // Conditions get an extra pair of parens when they are assignments,
  // which is what gcc wants to see for "if ((a = b))".
  std::string cond_text(const Expr* e) {
    std::string s = expr_text(e);
    if (e->kind == Expr::Kind::Assign) return "(" + s + ")";
    return s;
  }

  void print_function(const FunctionDef& fn) {
    std::string base, frag;
    decl_fragments(fn.return_type, "", &base, &frag);
    out_ += base + " " + frag + fn.name + "(";
    if (fn.params.empty()) {
      out_ += "void";
    } else {
      for (size_t i = 0; i < fn.params.size(); i++) {
        if (i) out_ += ", ";
        std::string pb, pf;
        decl_fragments(fn.params[i].type, fn.params[i].name, &pb, &pf);
        out_ += pb + " " + pf;
      }
    }
    out_ += ") ";
    print_block(fn.body, 0);
  }

  // Prints a Compound with the opening brace on the current line.
  void print_block(const Stmt* s, int level) {
    assert(s->kind == Stmt::Kind::Compound);
    out_ += "{\n";
    for (const Stmt* c : s->stmts) print_stmt(c, level + 1);
    indent(level);
    out_ += "}";
    if (level == 0) out_ += "\n";
  }

  // Any statement in a control-body position prints as a block.
  void print_body(const Stmt* s, int level) {
    if (s->kind == Stmt::Kind::Compound) {
      print_block(s, level);
      return;
    }
    out_ += "{\n";
    if (s->kind != Stmt::Kind::Empty) print_stmt(s, level + 1);
    indent(level);
    out_ += "}";
  }

  void print_stmt(const Stmt* s, int level) {
    switch (s->kind) {
      case Stmt::Kind::Empty:
        return;  // dropped by normalization
      case Stmt::Kind::Compound:
        indent(level);
        print_block(s, level);
        out_ += "\n";
        return;
      case Stmt::Kind::Decl:
        indent(level);
        out_ += var_decl_text(s->decl) + "\n";
        return;
      case Stmt::Kind::RecordDef:
        print_record(s->record, level);
        return;
      case Stmt::Kind::ExprStmt:
        indent(level);
        out_ += expr_text(s->expr) + ";\n";
        return;
      case Stmt::Kind::If: {
        indent(level);
        out_ += "if (" + cond_text(s->cond) + ") ";
        print_body(s->body, level);
        const Stmt* e = s->orelse;
        // else-if chains stay flat.
        while (e && e->kind == Stmt::Kind::If) {
          out_ += " else if (" + cond_text(e->cond) + ") ";
          print_body(e->body, level);
          e = e->orelse;
        }
        if (e) {
          out_ += " else ";
          print_body(e, level);
        }
        out_ += "\n";
        return;
      }
      case Stmt::Kind::While:
        indent(level);
        out_ += "while (" + cond_text(s->cond) + ") ";
        print_body(s->body, level);
        out_ += "\n";
        return;
      case Stmt::Kind::DoWhile:
        indent(level);
        out_ += "do ";
        print_body(s->body, level);
        out_ += " while (" + cond_text(s->cond) + ");\n";
        return;
      case Stmt::Kind::For: {
        indent(level);
        out_ += "for (";
        if (!s->decl_group.empty()) {
          std::string base, frag;
          decl_fragments(s->decl_group[0].type, s->decl_group[0].name, &base,
                         &frag);
          out_ += base + " ";
          for (size_t i = 0; i < s->decl_group.size(); i++) {
            if (i) out_ += ", ";
            std::string b2, f2;
            decl_fragments(s->decl_group[i].type, s->decl_group[i].name, &b2,
                           &f2);
            out_ += f2;
            if (s->decl_group[i].init)
              out_ += " = " + expr_text(s->decl_group[i].init);
          }
        } else if (s->init_expr) {
          out_ += expr_text(s->init_expr);
        }
        out_ += "; ";
        if (s->cond) out_ += cond_text(s->cond);
        out_ += "; ";
        if (s->step) out_ += expr_text(s->step);
        out_ += ") ";
        print_body(s->body, level);
        out_ += "\n";
        return;
      }
      case Stmt::Kind::Return:
        indent(level);
        out_ += s->expr ? "return " + expr_text(s->expr) + ";\n" : "return;\n";
        return;
      case Stmt::Kind::Break:
        indent(level);
        out_ += "break;\n";
        return;
      case Stmt::Kind::Continue:
        indent(level);
        out_ += "continue;\n";
        return;
      case Stmt::Kind::Switch:
        indent(level);
        out_ += "switch (" + cond_text(s->expr) + ") ";
        print_block(s->body, level);
        out_ += "\n";
        return;
      case Stmt::Kind::Case:
        // Label at block level, statement indented under it.
        indent(level - 1 >= 0 ? level - 1 : 0);
        out_ += "case " + expr_text(s->expr) + ":\n";
        if (s->body->kind != Stmt::Kind::Empty) {
          print_stmt(s->body, level);
        } else {
          indent(level);
          out_ += ";\n";
        }
        return;
      case Stmt::Kind::Default:
        indent(level - 1 >= 0 ? level - 1 : 0);
        out_ += "default:\n";
        if (s->body->kind != Stmt::Kind::Empty) {
          print_stmt(s->body, level);
        } else {
          indent(level);
          out_ += ";\n";
        }
        return;
      case Stmt::Kind::Label:
        indent(level);
        out_ += s->label + ":\n";
        if (s->body->kind != Stmt::Kind::Empty) {
          print_stmt(s->body, level);
        } else {
          // A label must precede a statement.
          indent(level);
          out_ += ";\n";
        }
        return;
      case Stmt::Kind::Goto:
        indent(level);
        out_ += "goto " + s->label + ";\n";
        return;
    }
  }
};

}  // namespace

std::string print_expr(const Expr* e) { return expr_text(e); }

std::string print_unit(const SourceUnit& u) {
  UnitPrinter p;
  return p.run(u);
}

}  // namespace cobble

#pragma once

// Concrete syntax of `.dal` files.
//
//   program   := unit*
//   unit      := 'kunit' NAME ['(' NAME (',' NAME)* ')'] ':' stmt*
//   stmt      := meta | use | setdef | rule            (separated by newline or ';')
//   meta      := ('certain'|'open'|'complete'|'closed') '(' NAME ')'
//   use       := 'use' NAME '(' [NAME '=' NAME ['(' terms ')'] (',' ...)*] ')'
//   setdef    := NAME '=' '{' [tuple (',' tuple)*] '}'
//   rule      := head ['<-' formula]
//   formula   := conj ('or' conj)*
//   conj      := unary ((',' | 'and') unary)*
//   unary     := 'not' unary | quant | '(' formula ')' | 'true' | 'false' | atom
//   quant     := ('some'|'each') VAR (',' VAR)* ['in' pred] ['|' formula]
//
// Newlines end a statement except inside parentheses or braces. `--` starts a
// comment that runs to the end of the line.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dalog/core.hpp"
#include "dalog/formula.hpp"

namespace dalog {

namespace detail {

enum class Tok { Ident, Int, Sym, Ref, LParen, RParen, LBrace, RBrace, LBracket, RBracket, Comma, Bar, Colon, Equals, Arrow, Semi, Newline, End };

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Sym: return "symbol";
    case Tok::Ref: return "dotted reference";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Bar: return "'|'";
    case Tok::Colon: return "':'";
    case Tok::Equals: return "'='";
    case Tok::Arrow: return "'<-'";
    case Tok::Semi: return "';'";
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;    // identifier, symbol body, integer digits, or ref prefix
  std::string suffix;  // ref suffix
  SourceSpan span;
};

inline const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {"kunit", "use", "not", "and", "or",       "some",   "each",
                                           "in",    "true", "false", "certain", "open", "complete", "closed"};
  return kw;
}

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    int depth = 0;
    while (true) {
      skip_blanks();
      SourceSpan sp = here();
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, "", "", sp});
        return out;
      }
      char c = text_[pos_];
      if (c == '\n') {
        advance();
        if (depth == 0) out.push_back({Tok::Newline, "", "", sp});
        continue;
      }
      if (ident_start(c)) {
        std::string id = read_ident();
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' && ident_start(text_[pos_ + 1])) {
          advance();
          std::string suffix = read_ident();
          out.push_back({Tok::Ref, id, suffix, sp});
        } else {
          out.push_back({Tok::Ident, id, "", sp});
        }
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '-' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        std::string digits(1, c);
        advance();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          digits += text_[pos_];
          advance();
        }
        out.push_back({Tok::Int, digits, "", sp});
        continue;
      }
      if (c == '\'') {
        advance();
        std::string body;
        while (pos_ < text_.size() && text_[pos_] != '\'' && text_[pos_] != '\n') {
          body += text_[pos_];
          advance();
        }
        if (pos_ >= text_.size() || text_[pos_] != '\'')
          throw Error(ErrorKind::Parse, "unterminated symbol, expected closing quote", sp);
        advance();
        out.push_back({Tok::Sym, body, "", sp});
        continue;
      }
      if (c == '<' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        advance();
        advance();
        out.push_back({Tok::Arrow, "", "", sp});
        continue;
      }
      Tok k;
      switch (c) {
        case '(': k = Tok::LParen; ++depth; break;
        case ')': k = Tok::RParen; depth = depth > 0 ? depth - 1 : 0; break;
        case '{': k = Tok::LBrace; ++depth; break;
        case '}': k = Tok::RBrace; depth = depth > 0 ? depth - 1 : 0; break;
        case '[': k = Tok::LBracket; break;
        case ']': k = Tok::RBracket; break;
        case ',': k = Tok::Comma; break;
        case '|': k = Tok::Bar; break;
        case ':': k = Tok::Colon; break;
        case '=': k = Tok::Equals; break;
        case ';': k = Tok::Semi; break;
        default:
          throw Error(ErrorKind::Parse, std::string("unexpected character '") + c + "'", sp);
      }
      advance();
      out.push_back({k, "", "", sp});
    }
  }

 private:
  SourceSpan here() const { return {file_, line_, col_}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blanks() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string read_ident() {
    std::string id;
    while (pos_ < text_.size() && ident_char(text_[pos_])) {
      id += text_[pos_];
      advance();
    }
    return id;
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

inline void record_arity(Signature& sig, const std::string& pred, std::size_t arity) { sig.emplace(pred, arity); }

/// Arities of plain predicates as written in a unit's rules (first use wins).
inline Signature syntactic_arities(const KUnitDef& u) {
  Signature sig;
  for (const auto& r : u.rules) {
    if (r.head.kind == PredRef::Kind::Plain || r.head.kind == PredRef::Kind::Truth)
      record_arity(sig, r.head.name, r.head_args.size());
    if (r.body)
      visit_atoms(*r.body, [&](const AtomF& a, bool) {
        if (a.pred.kind == PredRef::Kind::Plain || a.pred.kind == PredRef::Kind::Truth)
          record_arity(sig, a.pred.name, a.args.size());
      });
  }
  return sig;
}

}  // namespace detail

/// Replaces `some x in p | B` by `some x | p(x) and B` and `each x in p | B`
/// by `each x | not p(x) or B`. A domain predicate whose arity is known from
/// `known` must be unary.
inline Formula desugar_quantifier_domain(const Formula& f, const Signature* known = nullptr) {
  return std::visit(
      overloaded{
          [&](const AtomF&) -> Formula { return f; },
          [&](const EqF&) -> Formula { return f; },
          [&](const NotF& n) -> Formula { return Formula{NotF{desugar_quantifier_domain(*n.body, known)}, f.span}; },
          [&](const AndF& c) -> Formula {
            AndF out;
            for (const auto& p : c.parts) out.parts.push_back(desugar_quantifier_domain(p, known));
            return Formula{std::move(out), f.span};
          },
          [&](const OrF& c) -> Formula {
            OrF out;
            for (const auto& p : c.parts) out.parts.push_back(desugar_quantifier_domain(p, known));
            return Formula{std::move(out), f.span};
          },
          [&](const QuantF& q) -> Formula {
            Formula body = desugar_quantifier_domain(*q.body, known);
            if (!q.domain) return Formula{QuantF{q.q, q.vars, std::move(body)}, f.span};
            const PredRef& dom = *q.domain;
            if (known && (dom.kind == PredRef::Kind::Plain || dom.kind == PredRef::Kind::Truth)) {
              auto it = known->find(dom.name);
              if (it != known->end() && it->second != 1)
                throw Error(ErrorKind::DomainArity,
                            "quantifier domain '" + dom.name + "' has arity " + std::to_string(it->second) +
                                ", expected a unary predicate",
                            f.span);
            }
            std::vector<Formula> guards;
            for (const auto& v : q.vars) guards.push_back(make_atom(dom, {Term::var(v)}, f.span));
            if (q.q == Quantifier::Exists) {
              if (!is_true_const(body)) guards.push_back(std::move(body));
              Formula inner = guards.size() == 1 ? std::move(guards.front()) : Formula{AndF{std::move(guards)}, f.span};
              return Formula{QuantF{q.q, q.vars, std::move(inner)}, f.span};
            }
            std::vector<Formula> parts;
            for (auto& g : guards) parts.push_back(make_not(std::move(g), f.span));
            parts.push_back(std::move(body));
            return Formula{QuantF{q.q, q.vars, Formula{OrF{std::move(parts)}, f.span}}, f.span};
          },
      },
      f.node);
}

/// Facts for `pred = {tuples}`. Throws when a tuple holds a variable, or when
/// `context` already defines `pred` by rules or facts.
inline std::vector<Rule> desugar_set(const std::string& pred, const std::vector<std::vector<Term>>& tuples,
                                     const SourceSpan& span = {}, const KUnitDef* context = nullptr) {
  if (context)
    for (const auto& r : context->rules)
      if (r.head.is_plain() && r.head.name == pred)
        throw Error(ErrorKind::MixedDefinition,
                    "set definition of '" + pred + "' conflicts with other facts or rules for it", span);
  std::vector<Rule> out;
  for (const auto& tuple : tuples) {
    for (const auto& t : tuple)
      if (t.is_var())
        throw Error(ErrorKind::NonConstant, "set definition of '" + pred + "' contains variable '" + t.var_name() + "'",
                    span);
    out.push_back(Rule{PredRef::plain(pred), tuple, std::nullopt, span});
  }
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, std::string file) : toks_(detail::Lexer(text, std::move(file)).run()) {}

  Program parse_program() {
    Program prog;
    skip_separators();
    while (!at(detail::Tok::End)) {
      KUnitDef unit = parse_unit();
      if (prog.find(unit.name))
        throw Error(ErrorKind::DuplicateUnit, "kunit '" + unit.name + "' defined twice", unit.span);
      prog.units.push_back(std::move(unit));
      skip_separators();
    }
    return prog;
  }

 private:
  using Tok = detail::Tok;

  struct SetDef {
    std::string pred;
    SourceSpan span;
    std::size_t first_rule;
    std::size_t end_rule;
  };

  const detail::Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_kw(const char* kw) const { return at(Tok::Ident) && peek().text == kw; }
  detail::Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const auto& t = peek();
    std::string found = detail::tok_name(t.kind);
    if (t.kind == Tok::Ident) found = "'" + t.text + "'";
    throw Error(ErrorKind::Parse, "expected " + expected + ", found " + found, t.span);
  }

  detail::Token expect(Tok k) {
    if (!at(k)) fail(detail::tok_name(k));
    return take();
  }

  std::string expect_name(const char* what) {
    if (!at(Tok::Ident) || detail::keywords().count(peek().text)) fail(what);
    return take().text;
  }

  void skip_separators() {
    while (at(Tok::Newline) || at(Tok::Semi)) take();
  }

  KUnitDef parse_unit() {
    if (!at_kw("kunit")) fail("'kunit'");
    KUnitDef unit;
    unit.span = take().span;
    unit.name = expect_name("kunit name");
    if (at(Tok::LParen)) {
      take();
      unit.exported.emplace();
      if (!at(Tok::RParen)) {
        unit.exported->insert(expect_name("predicate name"));
        while (at(Tok::Comma)) {
          take();
          unit.exported->insert(expect_name("predicate name"));
        }
      }
      expect(Tok::RParen);
    }
    expect(Tok::Colon);

    std::vector<SetDef> sets;
    while (true) {
      skip_separators();
      if (at(Tok::End) || at_kw("kunit")) break;
      parse_statement(unit, sets);
      if (!(at(Tok::Newline) || at(Tok::Semi) || at(Tok::End))) fail("end of statement");
    }

    // A set-defined predicate must have no other facts or rules.
    std::map<std::string, int> set_count;
    for (const auto& s : sets) ++set_count[s.pred];
    for (const auto& s : sets) {
      if (set_count[s.pred] > 1)
        throw Error(ErrorKind::MixedDefinition, "predicate '" + s.pred + "' has more than one set definition", s.span);
      for (std::size_t i = 0; i < unit.rules.size(); ++i) {
        const Rule& r = unit.rules[i];
        bool own = i >= s.first_rule && i < s.end_rule;
        if (!own && r.head.is_plain() && r.head.name == s.pred)
          throw Error(ErrorKind::MixedDefinition,
                      "set definition of '" + s.pred + "' conflicts with other facts or rules for it", r.span);
      }
    }

    Signature known = detail::syntactic_arities(unit);
    for (auto& r : unit.rules)
      if (r.body) r.body = desugar_quantifier_domain(*r.body, &known);
    return unit;
  }

  void parse_statement(KUnitDef& unit, std::vector<SetDef>& sets) {
    const auto& t = peek();
    if (t.kind == Tok::Ident && (t.text == "certain" || t.text == "open" || t.text == "complete" || t.text == "closed")) {
      MetaConstraint m;
      m.span = t.span;
      m.kind = t.text == "certain"    ? MetaKind::Certain
               : t.text == "open"     ? MetaKind::Open
               : t.text == "complete" ? MetaKind::Complete
                                      : MetaKind::Closed;
      take();
      expect(Tok::LParen);
      m.pred = expect_name("predicate name");
      expect(Tok::RParen);
      unit.metas.push_back(std::move(m));
      return;
    }
    if (at_kw("use")) {
      UseDirective u;
      u.span = take().span;
      u.target = expect_name("kunit name");
      expect(Tok::LParen);
      if (!at(Tok::RParen)) {
        u.bindings.push_back(parse_binding());
        while (at(Tok::Comma)) {
          take();
          u.bindings.push_back(parse_binding());
        }
      }
      expect(Tok::RParen);
      unit.uses.push_back(std::move(u));
      return;
    }
    if (at(Tok::Ident) && peek(1).kind == Tok::Equals) {
      SourceSpan sp = peek().span;
      std::string pred = expect_name("predicate name");
      take();
      expect(Tok::LBrace);
      std::vector<std::vector<Term>> tuples;
      if (!at(Tok::RBrace)) {
        tuples.push_back(parse_tuple());
        while (at(Tok::Comma)) {
          take();
          tuples.push_back(parse_tuple());
        }
      }
      expect(Tok::RBrace);
      auto facts = desugar_set(pred, tuples, sp);
      std::size_t first = unit.rules.size();
      for (auto& f : facts) unit.rules.push_back(std::move(f));
      sets.push_back({pred, sp, first, unit.rules.size()});
      return;
    }
    unit.rules.push_back(parse_rule());
  }

  UseBinding parse_binding() {
    UseBinding b;
    b.inner = expect_name("predicate name");
    expect(Tok::Equals);
    b.outer = expect_name("predicate name");
    if (at(Tok::LParen)) b.extra = parse_term_list();
    return b;
  }

  std::vector<Term> parse_tuple() {
    if (at(Tok::LParen)) return parse_term_list();
    return {parse_term()};
  }

  std::vector<Term> parse_term_list() {
    expect(Tok::LParen);
    std::vector<Term> out;
    if (!at(Tok::RParen)) {
      out.push_back(parse_term());
      while (at(Tok::Comma)) {
        take();
        out.push_back(parse_term());
      }
    }
    if (!at(Tok::RParen)) fail("',' or ')'");
    take();
    return out;
  }

  Term parse_term() {
    const auto& t = peek();
    if (t.kind == Tok::Int) {
      take();
      return Term::constant(Constant::integer(std::stoll(t.text)));
    }
    if (t.kind == Tok::Sym) {
      take();
      return Term::constant(Constant::symbol(t.text));
    }
    if (t.kind == Tok::Ident && !detail::keywords().count(t.text)) {
      take();
      return Term::var(t.text);
    }
    fail("term (variable, integer or quoted symbol)");
  }

  PredRef ref_from_token(const detail::Token& t) {
    if (t.kind == Tok::Ident) return PredRef::plain(t.text);
    if (t.suffix == "T") return PredRef::truth(t.text, TruthValue::T);
    if (t.suffix == "F") return PredRef::truth(t.text, TruthValue::F);
    if (t.suffix == "U") return PredRef::truth(t.text, TruthValue::U);
    if (t.suffix == "CS") return PredRef::cs(t.text);
    if (detail::keywords().count(t.text)) throw Error(ErrorKind::Parse, "expected variable before '.'", t.span);
    return PredRef::proj(Term::var(t.text), t.suffix);
  }

  bool at_pred() const {
    return (at(Tok::Ident) && !detail::keywords().count(peek().text)) || at(Tok::Ref);
  }

  Rule parse_rule() {
    if (!at_pred()) fail("statement");
    Rule r;
    auto head_tok = take();
    r.span = head_tok.span;
    r.head = ref_from_token(head_tok);
    if (at(Tok::LParen)) r.head_args = parse_term_list();
    if (at(Tok::Arrow)) {
      take();
      r.body = parse_formula();
    }
    return r;
  }

  Formula parse_formula() {
    SourceSpan sp = peek().span;
    std::vector<Formula> parts{parse_conj()};
    while (at_kw("or")) {
      take();
      parts.push_back(parse_conj());
    }
    return make_or(std::move(parts), sp);
  }

  Formula parse_conj() {
    SourceSpan sp = peek().span;
    std::vector<Formula> parts{parse_unary()};
    while (at(Tok::Comma) || at_kw("and")) {
      take();
      parts.push_back(parse_unary());
    }
    return make_and(std::move(parts), sp);
  }

  Formula parse_unary() {
    SourceSpan sp = peek().span;
    if (at_kw("not")) {
      take();
      return make_not(parse_unary(), sp);
    }
    if (at_kw("some") || at_kw("each")) return parse_quant();
    if (at_kw("true")) {
      take();
      return Formula{AndF{}, sp};
    }
    if (at_kw("false")) {
      take();
      return Formula{OrF{}, sp};
    }
    if (at(Tok::LParen)) {
      take();
      Formula f = parse_formula();
      expect(Tok::RParen);
      return f;
    }
    if (!at_pred()) fail("formula");
    auto t = take();
    PredRef pred = ref_from_token(t);
    std::vector<Term> args;
    if (at(Tok::LParen)) args = parse_term_list();
    return make_atom(std::move(pred), std::move(args), t.span);
  }

  Formula parse_quant() {
    auto kw = take();
    Quantifier q = kw.text == "some" ? Quantifier::Exists : Quantifier::Forall;
    std::vector<std::string> vars{expect_name("quantified variable")};
    while (at(Tok::Comma)) {
      take();
      vars.push_back(expect_name("quantified variable"));
    }
    std::set<std::string> seen;
    for (const auto& v : vars)
      if (!seen.insert(v).second)
        throw Error(ErrorKind::Parse, "variable '" + v + "' quantified twice", kw.span);
    std::optional<PredRef> domain;
    if (at_kw("in")) {
      take();
      if (!at_pred()) fail("domain predicate");
      domain = ref_from_token(take());
    }
    Formula body = make_true();
    if (at(Tok::Bar)) {
      take();
      body = parse_formula();
    } else if (q == Quantifier::Forall || !domain) {
      fail("'|'");
    }
    return Formula{QuantF{q, std::move(vars), std::move(body), std::move(domain)}, kw.span};
  }

  std::vector<detail::Token> toks_;
  std::size_t pos_ = 0;
};

inline Program parse_program(std::string_view text, std::string file = "<input>") {
  return Parser(text, std::move(file)).parse_program();
}

/// Parses several sources, given as (text, file name) pairs, into one
/// program. Unit names must be unique across all of them.
inline Program parse_sources(const std::vector<std::pair<std::string, std::string>>& sources) {
  Program out;
  for (const auto& [text, file] : sources) {
    Program part = parse_program(text, file);
    for (auto& u : part.units) {
      if (out.find(u.name)) throw Error(ErrorKind::DuplicateUnit, "kunit '" + u.name + "' defined twice", u.span);
      out.units.push_back(std::move(u));
    }
  }
  return out;
}

/// Argument of a query atom: a constant, or `unit.CS[i]` naming the i-th
/// constraint model of a unit.
struct QueryArg {
  std::optional<Constant> value;
  std::string model_unit;
  std::size_t model_index = 0;
};

struct QueryAtom {
  std::string pred;
  std::vector<QueryArg> args;
};

/// Parses a ground atom such as `win(1)`, `prolog` or `p('a', k.CS[0])`.
inline QueryAtom parse_query_atom(std::string_view text) {
  using detail::Tok;
  auto toks = detail::Lexer(text, "<atom>").run();
  std::size_t i = 0;
  auto fail = [&](const std::string& expected) {
    throw Error(ErrorKind::Parse, "expected " + expected + " in atom", toks[i].span);
  };
  QueryAtom q;
  if (toks[i].kind != Tok::Ident || detail::keywords().count(toks[i].text)) fail("predicate name");
  q.pred = toks[i++].text;
  if (toks[i].kind == Tok::LParen) {
    ++i;
    while (true) {
      QueryArg arg;
      const auto& t = toks[i];
      if (t.kind == Tok::Int) {
        arg.value = Constant::integer(std::stoll(t.text));
        ++i;
      } else if (t.kind == Tok::Sym) {
        arg.value = Constant::symbol(t.text);
        ++i;
      } else if (t.kind == Tok::Ref && t.suffix == "CS" && toks[i + 1].kind == Tok::LBracket &&
                 toks[i + 2].kind == Tok::Int && toks[i + 3].kind == Tok::RBracket && toks[i + 2].text[0] != '-') {
        arg.model_unit = t.text;
        arg.model_index = std::stoull(toks[i + 2].text);
        i += 4;
      } else {
        fail("constant (integer, quoted symbol or unit.CS[i])");
      }
      q.args.push_back(std::move(arg));
      if (toks[i].kind == Tok::Comma) {
        ++i;
        continue;
      }
      if (toks[i].kind != Tok::RParen) fail("',' or ')'");
      ++i;
      break;
    }
  }
  while (toks[i].kind == Tok::Newline) ++i;
  if (toks[i].kind != Tok::End) fail("end of atom");
  return q;
}

}  // namespace dalog

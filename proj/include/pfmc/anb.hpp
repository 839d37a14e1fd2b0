#pragma once

// AnB ("Alice and Bob") protocol notation frontend: lexer, parser and a
// canonical renderer. The grammar is documented in docs/anb_grammar.ebnf.
// Uppercase identifiers are variables, lowercase are constants; pk/1 and
// inv/1 are builtin function symbols (inv constructs the key-inverse node).

#include <cctype>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfmc/term.hpp"

namespace pfmc {

struct AnbError : std::runtime_error {
  int line;
  int col;
  AnbError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " at line " + std::to_string(line_) +
                           ", column " + std::to_string(col_)),
        line(line_),
        col(col_) {}
};

enum class ChannelKind : std::uint8_t { Plain, Secure };
enum class DeclKind : std::uint8_t { Agent, Number, Function, SymmetricKey };

struct Action {
  std::string sender;
  std::string receiver;
  bool sender_pseudo = false;    // [A] ->: sender end of the channel unauthenticated
  bool receiver_pseudo = false;  // -> [B]
  ChannelKind channel = ChannelKind::Plain;
  TermPtr message;
};

struct Goal {
  enum Kind { Secrecy, Authentication, SecureChannel };
  Kind kind;
  std::string a;  // Authentication: authenticator; SecureChannel: sender
  std::string b;  // Authentication: peer; SecureChannel: receiver
  std::vector<std::string> parties;  // Secrecy only
  TermPtr payload;
};

struct ProtocolSpec {
  std::string name;
  std::vector<std::pair<std::string, DeclKind>> decls;  // declaration order
  std::map<std::string, DeclKind> decl_kind;
  std::map<std::string, std::uint32_t> var_index;  // uppercase declarations
  std::vector<std::string> roles;                  // Agent declarations in order
  std::map<std::string, TermList> knowledge;
  std::vector<std::string> knowledge_order;  // roles with knowledge, file order
  std::vector<std::pair<std::string, std::string>> inequalities;
  std::vector<Action> actions;
  std::vector<Goal> goals;

  bool is_var(const std::string& n) const { return var_index.count(n) != 0; }
  bool is_role_var(const std::string& n) const {
    auto it = decl_kind.find(n);
    return it != decl_kind.end() && it->second == DeclKind::Agent && is_var(n);
  }
};

namespace anb_detail {

struct Token {
  enum Type {
    Ident,
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,   // {
    RBrace,   // }
    LSym,     // {|
    RSym,     // |}
    LBrack,   // [
    RBrack,   // ]
    Arrow,    // ->
    SecArrow, // *->*
    Neq,      // !=
    Newline,
    End
  };
  Type type;
  std::string text;
  int line;
  int col;
};

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Token::Type t, std::string s, int l, int c) {
    out.push_back(Token{t, std::move(s), l, c});
  };
  while (i < src.size()) {
    char c = src[i];
    int l = line, co = col;
    auto advance = [&](std::size_t n) {
      for (std::size_t k = 0; k < n; ++k) {
        if (src[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        ++i;
      }
    };
    if (c == '\n') {
      push(Token::Newline, "\n", l, co);
      advance(1);
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                src[j] == '_'))
        ++j;
      push(Token::Ident, src.substr(i, j - i), l, co);
      advance(j - i);
      continue;
    }
    auto starts = [&](const char* s) {
      return src.compare(i, std::char_traits<char>::length(s), s) == 0;
    };
    if (starts("*->*")) {
      push(Token::SecArrow, "*->*", l, co);
      advance(4);
      continue;
    }
    if (starts("->")) {
      push(Token::Arrow, "->", l, co);
      advance(2);
      continue;
    }
    if (starts("{|")) {
      push(Token::LSym, "{|", l, co);
      advance(2);
      continue;
    }
    if (starts("|}")) {
      push(Token::RSym, "|}", l, co);
      advance(2);
      continue;
    }
    if (starts("!=")) {
      push(Token::Neq, "!=", l, co);
      advance(2);
      continue;
    }
    switch (c) {
      case ':': push(Token::Colon, ":", l, co); advance(1); continue;
      case ';': push(Token::Semi, ";", l, co); advance(1); continue;
      case ',': push(Token::Comma, ",", l, co); advance(1); continue;
      case '(': push(Token::LParen, "(", l, co); advance(1); continue;
      case ')': push(Token::RParen, ")", l, co); advance(1); continue;
      case '{': push(Token::LBrace, "{", l, co); advance(1); continue;
      case '}': push(Token::RBrace, "}", l, co); advance(1); continue;
      case '[': push(Token::LBrack, "[", l, co); advance(1); continue;
      case ']': push(Token::RBrack, "]", l, co); advance(1); continue;
      default:
        throw AnbError(std::string("unexpected character '") + c + "'", l, co);
    }
  }
  out.push_back(Token{Token::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  ProtocolSpec parse() {
    expect_section("Protocol");
    spec_.name = expect_ident("protocol name");
    expect_section("Types");
    parse_types();
    expect_section("Knowledge");
    parse_knowledge();
    expect_section("Actions");
    parse_actions();
    expect_section("Goals");
    parse_goals();
    validate();
    return std::move(spec_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ProtocolSpec spec_;

  // --- token plumbing -----------------------------------------------------
  const Token& peek(std::size_t ahead = 0, bool skip_nl = true) const {
    std::size_t p = pos_;
    std::size_t seen = 0;
    while (p < toks_.size()) {
      if (skip_nl && toks_[p].type == Token::Newline) {
        ++p;
        continue;
      }
      if (seen == ahead) return toks_[p];
      ++seen;
      ++p;
    }
    return toks_.back();
  }
  const Token& next(bool skip_nl = true) {
    while (skip_nl && toks_[pos_].type == Token::Newline) ++pos_;
    return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++];
  }
  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    throw AnbError(msg + (t.text.empty() ? "" : " near '" + t.text + "'"), t.line,
                   t.col);
  }
  const Token& expect(Token::Type ty, const char* what) {
    const Token& t = next();
    if (t.type != ty) fail(std::string("expected ") + what, t);
    return t;
  }
  std::string expect_ident(const char* what) {
    return expect(Token::Ident, what).text;
  }
  void expect_section(const char* name) {
    const Token& t = next();
    if (t.type != Token::Ident || t.text != name)
      fail(std::string("expected section '") + name + "'", t);
    expect(Token::Colon, "':'");
  }
  bool at_section(const char* name) const {
    const Token& t = peek();
    return t.type == Token::Ident && t.text == name &&
           peek(1).type == Token::Colon;
  }

  // --- declarations -------------------------------------------------------
  void parse_types() {
    while (true) {
      const Token& kw = next();
      if (kw.type != Token::Ident) fail("expected type keyword", kw);
      DeclKind kind;
      if (kw.text == "Agent") kind = DeclKind::Agent;
      else if (kw.text == "Number") kind = DeclKind::Number;
      else if (kw.text == "Function") kind = DeclKind::Function;
      else if (kw.text == "Symmetric_key") kind = DeclKind::SymmetricKey;
      else fail("unknown type keyword", kw);
      while (true) {
        const Token& id = next();
        if (id.type != Token::Ident) fail("expected identifier", id);
        if (spec_.decl_kind.count(id.text)) fail("duplicate declaration", id);
        spec_.decls.emplace_back(id.text, kind);
        spec_.decl_kind[id.text] = kind;
        if (std::isupper(static_cast<unsigned char>(id.text[0]))) {
          auto idx = static_cast<std::uint32_t>(spec_.var_index.size());
          spec_.var_index[id.text] = idx;
        }
        if (kind == DeclKind::Agent) spec_.roles.push_back(id.text);
        if (peek().type == Token::Comma) {
          next();
          continue;
        }
        break;
      }
      if (peek().type == Token::Semi) {
        next();
        continue;
      }
      break;
    }
  }

  // --- terms ----------------------------------------------------------------
  bool is_builtin_fn(const std::string& n) const { return n == "pk" || n == "inv"; }

  TermPtr resolve_ident(const Token& id) {
    auto it = spec_.decl_kind.find(id.text);
    if (it == spec_.decl_kind.end()) {
      if (is_builtin_fn(id.text)) return mk_atom(id.text);
      fail("undeclared identifier", id);
    }
    if (spec_.is_var(id.text)) return mk_var(id.text, spec_.var_index.at(id.text));
    switch (it->second) {
      case DeclKind::Agent: return mk_atom(id.text, AtomKind::Agent);
      case DeclKind::Number: return mk_atom(id.text, AtomKind::Number);
      default: return mk_atom(id.text);
    }
  }

  TermPtr parse_applied(const Token& id) {
    // IDENT '(' term {',' term} ')'
    next();  // consume '('
    TermList args;
    while (true) {
      args.push_back(parse_term());
      if (peek().type == Token::Comma) {
        next();
        continue;
      }
      break;
    }
    expect(Token::RParen, "')'");
    if (id.text == "inv") {
      if (args.size() != 1) fail("inv takes exactly one argument", id);
      return mk_inv(args[0]);
    }
    auto it = spec_.decl_kind.find(id.text);
    bool declared_fn = it != spec_.decl_kind.end() && it->second == DeclKind::Function;
    if (!declared_fn && !is_builtin_fn(id.text))
      fail("identifier is not a declared function", id);
    if (id.text == "pk" && args.size() != 1) fail("pk takes exactly one argument", id);
    return mk_apply(id.text, std::move(args));
  }

  // primary := IDENT ['(' args ')'] | '(' msglist ')'
  TermPtr parse_primary() {
    const Token& t = next();
    if (t.type == Token::LParen) {
      TermPtr inner = parse_msglist();
      expect(Token::RParen, "')'");
      return inner;
    }
    if (t.type != Token::Ident) fail("expected identifier", t);
    if (peek(0, true).type == Token::LParen) return parse_applied(t);
    return resolve_ident(t);
  }

  TermPtr parse_term() {
    const Token& t = peek();
    if (t.type == Token::LSym) {
      next();
      TermPtr body = parse_msglist();
      expect(Token::RSym, "'|}'");
      TermPtr key = parse_primary();
      return mk_sym_enc(key, body);
    }
    if (t.type == Token::LBrace) {
      next();
      TermPtr body = parse_msglist();
      expect(Token::RBrace, "'}'");
      TermPtr key = parse_primary();
      return mk_asym_enc(key, body);
    }
    return parse_primary();
  }

  TermPtr parse_msglist() {
    TermList parts{parse_term()};
    while (peek().type == Token::Comma && !at_action_head(1)) {
      next();
      parts.push_back(parse_term());
    }
    return mk_message(parts);
  }

  // --- knowledge ------------------------------------------------------------
  void parse_knowledge() {
    while (true) {
      std::string role = expect_ident("role name");
      if (!spec_.decl_kind.count(role) || spec_.decl_kind[role] != DeclKind::Agent)
        fail("knowledge entry for a non-agent", toks_[pos_ - 1]);
      expect(Token::Colon, "':'");
      TermList terms;
      while (true) {
        terms.push_back(parse_term());
        if (peek().type == Token::Comma) {
          next();
          continue;
        }
        break;
      }
      spec_.knowledge[role] = std::move(terms);
      spec_.knowledge_order.push_back(role);
      if (peek().type == Token::Semi) {
        next();
        continue;
      }
      break;
    }
    const Token& w = peek();
    if (w.type == Token::Ident && w.text == "where") {
      next();
      while (true) {
        std::string lhs = expect_ident("identifier");
        expect(Token::Neq, "'!='");
        std::string rhs = expect_ident("identifier");
        if (!spec_.decl_kind.count(lhs) || !spec_.decl_kind.count(rhs))
          fail("undeclared identifier in where clause", toks_[pos_ - 1]);
        spec_.inequalities.emplace_back(lhs, rhs);
        if (peek().type == Token::Comma) {
          next();
          continue;
        }
        break;
      }
    }
  }

  // --- actions ----------------------------------------------------------------
  // lookahead: ['['] IDENT [']'] (-> | *->*) starting `ahead` non-newline
  // tokens from the cursor
  bool at_action_head(std::size_t ahead = 0) const {
    std::size_t k = ahead;
    bool brack = false;
    if (peek(k).type == Token::LBrack) {
      brack = true;
      ++k;
    }
    if (peek(k).type != Token::Ident) return false;
    ++k;
    if (brack) {
      if (peek(k).type != Token::RBrack) return false;
      ++k;
    }
    return peek(k).type == Token::Arrow || peek(k).type == Token::SecArrow;
  }

  std::pair<std::string, bool> parse_endpoint() {
    bool pseudo = false;
    if (peek().type == Token::LBrack) {
      next();
      pseudo = true;
    }
    const Token& id = expect(Token::Ident, "role name");
    std::string name = id.text;
    if (!spec_.decl_kind.count(name) || spec_.decl_kind[name] != DeclKind::Agent)
      fail("action endpoint is not a declared agent", id);
    if (pseudo) expect(Token::RBrack, "']'");
    return {name, pseudo};
  }

  void parse_actions() {
    while (!at_section("Goals")) {
      if (peek().type == Token::End) fail("missing Goals section", peek());
      Action act;
      auto [snd, sp] = parse_endpoint();
      act.sender = snd;
      act.sender_pseudo = sp;
      const Token& arrow = next();
      if (arrow.type == Token::SecArrow) act.channel = ChannelKind::Secure;
      else if (arrow.type == Token::Arrow) act.channel = ChannelKind::Plain;
      else fail("expected '->' or '*->*'", arrow);
      auto [rcv, rp] = parse_endpoint();
      act.receiver = rcv;
      act.receiver_pseudo = rp;
      expect(Token::Colon, "':'");
      act.message = parse_action_message();
      spec_.actions.push_back(std::move(act));
    }
  }

  // message list that stops at the next action head or the Goals section
  TermPtr parse_action_message() {
    TermList parts{parse_term()};
    while (true) {
      if (peek().type != Token::Comma) break;
      // a comma directly followed by an action head would be a syntax error
      next();
      parts.push_back(parse_term());
      if (at_action_head() || at_section("Goals")) break;
    }
    return mk_message(parts);
  }

  // --- goals -----------------------------------------------------------------
  // Goals are line-based: collect one logical line, then match its shape.
  std::vector<Token> goal_line() {
    while (toks_[pos_].type == Token::Newline) ++pos_;
    std::vector<Token> line;
    while (toks_[pos_].type != Token::Newline && toks_[pos_].type != Token::End)
      line.push_back(toks_[pos_++]);
    return line;
  }

  void parse_goals() {
    while (true) {
      while (toks_[pos_].type == Token::Newline) ++pos_;
      if (toks_[pos_].type == Token::End) break;
      std::vector<Token> line = goal_line();
      spec_.goals.push_back(parse_goal_line(line));
    }
  }

  Goal parse_goal_line(const std::vector<Token>& line) {
    // sub-parser over the line via a scratch Parser state
    auto term_of = [&](std::size_t from, std::size_t to) {
      std::vector<Token> sub(line.begin() + from, line.begin() + to);
      sub.push_back(Token{Token::End, "", line.empty() ? 0 : line[0].line, 0});
      Parser p("");
      p.toks_ = std::move(sub);
      p.spec_ = spec_;  // declarations for resolution
      TermPtr t = p.parse_msglist();
      if (p.peek().type != Token::End) p.fail("trailing tokens in goal", p.peek());
      return t;
    };
    auto role_at = [&](std::size_t i) -> std::string {
      if (i >= line.size() || line[i].type != Token::Ident)
        fail("expected role name in goal", i < line.size() ? line[i] : toks_.back());
      const std::string& n = line[i].text;
      if (!spec_.decl_kind.count(n) || spec_.decl_kind.at(n) != DeclKind::Agent)
        fail("goal endpoint is not a declared agent", line[i]);
      return n;
    };

    // A authenticates B on <payload>
    if (line.size() >= 4 && line[1].type == Token::Ident &&
        line[1].text == "authenticates") {
      Goal g;
      g.kind = Goal::Authentication;
      g.a = role_at(0);
      g.b = role_at(2);
      if (line[3].type != Token::Ident || line[3].text != "on")
        fail("expected 'on'", line[3]);
      g.payload = term_of(4, line.size());
      return g;
    }
    // A *->* B: <payload>
    if (line.size() >= 4 && line[1].type == Token::SecArrow) {
      Goal g;
      g.kind = Goal::SecureChannel;
      g.a = role_at(0);
      g.b = role_at(2);
      if (line[3].type != Token::Colon) fail("expected ':'", line[3]);
      g.payload = term_of(4, line.size());
      return g;
    }
    // <payload> secret between A,B,...
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      if (line[i].type == Token::Ident && line[i].text == "secret" &&
          line[i + 1].type == Token::Ident && line[i + 1].text == "between") {
        Goal g;
        g.kind = Goal::Secrecy;
        g.payload = term_of(0, i);
        for (std::size_t j = i + 2; j < line.size(); j += 2) {
          g.parties.push_back(role_at(j));
          if (j + 1 < line.size() && line[j + 1].type != Token::Comma)
            fail("expected ','", line[j + 1]);
        }
        if (g.parties.empty()) fail("secrecy goal lists no parties", line[i]);
        return g;
      }
    }
    fail("unrecognized goal form", line.empty() ? toks_.back() : line[0]);
  }

  // --- whole-spec validation --------------------------------------------------
  void validate() {
    if (spec_.actions.empty())
      throw AnbError("protocol has no actions", 1, 1);
    for (const auto& a : spec_.actions) {
      if (!spec_.knowledge.count(a.sender))
        throw AnbError("role '" + a.sender + "' acts but has no knowledge entry", 1, 1);
      if (!spec_.knowledge.count(a.receiver))
        throw AnbError("role '" + a.receiver + "' acts but has no knowledge entry", 1,
                       1);
    }
  }
};

}  // namespace anb_detail

inline ProtocolSpec parse_anb(const std::string& text) {
  return anb_detail::Parser(text).parse();
}

// ---------------------------------------------------------------------------
// Canonical rendering (bare variable names) and structural spec equality.

inline std::string render_bare(const TermPtr& t);

namespace anb_detail {
inline std::string render_bare_key(const TermPtr& k) {
  if (k->kind == TermKind::Pair || k->kind == TermKind::SymEnc ||
      k->kind == TermKind::AsymEnc)
    return "(" + render_bare(k) + ")";
  return render_bare(k);
}
inline std::string render_bare_elem(const TermPtr& t) {
  if (t->kind == TermKind::Pair) return "(" + render_bare(t) + ")";
  return render_bare(t);
}
}  // namespace anb_detail

inline std::string render_bare(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Atom: return t->name;
    case TermKind::Var: return t->name;
    case TermKind::Pair: {
      std::string out = anb_detail::render_bare_elem(t->args[0]);
      TermPtr cur = t->args[1];
      while (cur->kind == TermKind::Pair) {
        out += "," + anb_detail::render_bare_elem(cur->args[0]);
        cur = cur->args[1];
      }
      return out + "," + anb_detail::render_bare_elem(cur);
    }
    case TermKind::SymEnc:
      return "{|" + render_bare(t->args[1]) + "|}" +
             anb_detail::render_bare_key(t->args[0]);
    case TermKind::AsymEnc:
      return "{" + render_bare(t->args[1]) + "}" +
             anb_detail::render_bare_key(t->args[0]);
    case TermKind::Inv: return "inv(" + render_bare(t->args[0]) + ")";
    case TermKind::Apply: {
      std::string out = t->name + "(";
      for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ",";
        out += anb_detail::render_bare_elem(t->args[i]);
      }
      return out + ")";
    }
  }
  return "?";
}

inline std::string render_anb(const ProtocolSpec& spec) {
  std::string out = "Protocol: " + spec.name + "\n\nTypes:";
  const std::pair<DeclKind, const char*> kinds[] = {
      {DeclKind::Agent, "Agent"},
      {DeclKind::Number, "Number"},
      {DeclKind::Function, "Function"},
      {DeclKind::SymmetricKey, "Symmetric_key"}};
  bool first_kind = true;
  for (auto [kind, kw] : kinds) {
    std::string names;
    for (const auto& [n, k] : spec.decls)
      if (k == kind) names += (names.empty() ? "" : ",") + n;
    if (names.empty()) continue;
    out += std::string(first_kind ? " " : ";\n      ") + kw + " " + names;
    first_kind = false;
  }
  out += "\n\nKnowledge:";
  bool first_role = true;
  for (const auto& role : spec.knowledge_order) {
    out += std::string(first_role ? " " : ";\n          ") + role + ":";
    first_role = false;
    const auto& terms = spec.knowledge.at(role);
    for (std::size_t i = 0; i < terms.size(); ++i)
      out += (i ? "," : " ") + anb_detail::render_bare_elem(terms[i]);
  }
  if (!spec.inequalities.empty()) {
    out += "\n          where ";
    for (std::size_t i = 0; i < spec.inequalities.size(); ++i) {
      if (i) out += ", ";
      out += spec.inequalities[i].first + "!=" + spec.inequalities[i].second;
    }
  }
  out += "\n\nActions:\n\n";
  for (const auto& a : spec.actions) {
    std::string snd = a.sender_pseudo ? "[" + a.sender + "]" : a.sender;
    std::string rcv = a.receiver_pseudo ? "[" + a.receiver + "]" : a.receiver;
    const char* arrow = a.channel == ChannelKind::Secure ? " *->* " : " -> ";
    out += snd + arrow + rcv + ": " + render_bare(a.message) + "\n";
  }
  out += "\nGoals:\n\n";
  for (const auto& g : spec.goals) {
    switch (g.kind) {
      case Goal::Authentication:
        out += g.a + " authenticates " + g.b + " on " + render_bare(g.payload) + "\n";
        break;
      case Goal::SecureChannel:
        out += g.a + " *->* " + g.b + ": " + render_bare(g.payload) + "\n";
        break;
      case Goal::Secrecy: {
        out += render_bare(g.payload) + " secret between ";
        for (std::size_t i = 0; i < g.parties.size(); ++i)
          out += (i ? "," : "") + g.parties[i];
        out += "\n";
        break;
      }
    }
  }
  return out;
}

inline bool goal_eq(const Goal& x, const Goal& y) {
  return x.kind == y.kind && x.a == y.a && x.b == y.b && x.parties == y.parties &&
         term_eq(x.payload, y.payload);
}

inline bool spec_eq(const ProtocolSpec& x, const ProtocolSpec& y) {
  if (x.name != y.name || x.decls != y.decls ||
      x.knowledge_order != y.knowledge_order ||
      x.inequalities != y.inequalities)
    return false;
  for (const auto& role : x.knowledge_order) {
    const auto& kx = x.knowledge.at(role);
    auto it = y.knowledge.find(role);
    if (it == y.knowledge.end() || it->second.size() != kx.size()) return false;
    for (std::size_t i = 0; i < kx.size(); ++i)
      if (!term_eq(kx[i], it->second[i])) return false;
  }
  if (x.actions.size() != y.actions.size() || x.goals.size() != y.goals.size())
    return false;
  for (std::size_t i = 0; i < x.actions.size(); ++i) {
    const Action& ax = x.actions[i];
    const Action& ay = y.actions[i];
    if (ax.sender != ay.sender || ax.receiver != ay.receiver ||
        ax.sender_pseudo != ay.sender_pseudo ||
        ax.receiver_pseudo != ay.receiver_pseudo || ax.channel != ay.channel ||
        !term_eq(ax.message, ay.message))
      return false;
  }
  for (std::size_t i = 0; i < x.goals.size(); ++i)
    if (!goal_eq(x.goals[i], y.goals[i])) return false;
  return true;
}

}  // namespace pfmc

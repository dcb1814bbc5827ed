// Copyright 2026 The semtwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "semtwin/error.hpp"
#include "semtwin/rules.hpp"

namespace semtwin {

namespace {

bool is_geometry_builtin(std::string_view name) {
  return name == "withinDistance" || name == "distanceGreaterThan" ||
         name == "intersects" || name == "contains";
}

// Positions that must hold a wktLiteral.
bool is_geometry_arg(std::string_view name, std::size_t i) {
  return is_geometry_builtin(name) && i < 2;
}

bool is_distance_arg(std::string_view name, std::size_t i) {
  return (name == "withinDistance" || name == "distanceGreaterThan") && i == 2;
}

void collect_vars(const PatternTerm& t, std::set<std::string>& out) {
  if (const auto* v = std::get_if<Variable>(&t)) out.insert(v->name);
}

void check_pattern_shape(const TriplePattern& p, const std::string& rule) {
  auto literal_at = [](const PatternTerm& t) {
    const Term* term = std::get_if<Term>(&t);
    return term && !is_iri(*term);
  };
  if (literal_at(p.subject)) {
    throw ValidationError("rule '" + rule + "': literal in subject position");
  }
  if (literal_at(p.predicate)) {
    throw ValidationError("rule '" + rule +
                          "': predicate must be an IRI or variable");
  }
}

}  // namespace

const std::map<std::string, std::size_t, std::less<>>& builtin_registry() {
  static const std::map<std::string, std::size_t, std::less<>> kRegistry = {
      {"withinDistance", 3}, {"distanceGreaterThan", 3},
      {"intersects", 2},     {"contains", 2},
      {"lessThan", 2},       {"greaterThan", 2},
      {"equal", 2},          {"notEqual", 2}};
  return kRegistry;
}

void RuleSet::add(Rule rule) {
  const std::string& name = rule.name;
  if (name.empty()) throw ValidationError("rule without a name");
  if (find(name)) throw ValidationError("duplicate rule name '" + name + "'");
  if (rule.head.empty()) {
    throw ValidationError("rule '" + name + "' has an empty head");
  }
  std::set<std::string> bound;
  std::size_t patterns = 0;
  for (const auto& item : rule.body) {
    if (const auto* p = std::get_if<TriplePattern>(&item)) {
      check_pattern_shape(*p, name);
      collect_vars(p->subject, bound);
      collect_vars(p->predicate, bound);
      collect_vars(p->object, bound);
      ++patterns;
    }
  }
  if (patterns == 0) {
    throw ValidationError("rule '" + name +
                          "' needs at least one triple pattern in its body");
  }
  for (const auto& item : rule.body) {
    const auto* b = std::get_if<BuiltinCall>(&item);
    if (!b) continue;
    auto it = builtin_registry().find(b->name);
    if (it == builtin_registry().end()) {
      throw ValidationError("rule '" + name + "': unknown built-in '" +
                            b->name + "'");
    }
    if (b->args.size() != it->second) {
      throw ValidationError("rule '" + name + "': built-in " + b->name +
                            " takes " + std::to_string(it->second) +
                            " arguments, got " +
                            std::to_string(b->args.size()));
    }
    for (std::size_t i = 0; i < b->args.size(); ++i) {
      const PatternTerm& a = b->args[i];
      if (const auto* v = std::get_if<Variable>(&a)) {
        if (!bound.count(v->name)) {
          throw ValidationError("rule '" + name + "': variable ?" + v->name +
                                " of built-in " + b->name +
                                " is not bound by a triple pattern");
        }
        continue;
      }
      const Literal* lit = as_literal(std::get<Term>(a));
      if (is_geometry_arg(b->name, i) &&
          (!lit || lit->datatype != Datatype::WktLiteral)) {
        throw ValidationError("rule '" + name + "': argument " +
                              std::to_string(i + 1) + " of " + b->name +
                              " must be a wktLiteral");
      }
      if (is_distance_arg(b->name, i) && (!lit || !lit->is_numeric())) {
        throw ValidationError("rule '" + name + "': distance argument of " +
                              b->name + " must be numeric");
      }
    }
  }
  for (const auto& p : rule.head) {
    check_pattern_shape(p, name);
    for (const PatternTerm* t : {&p.subject, &p.predicate, &p.object}) {
      if (const auto* v = std::get_if<Variable>(t); v && !bound.count(v->name)) {
        throw ValidationError("rule '" + name + "': head variable ?" + v->name +
                              " does not occur in the body");
      }
    }
  }
  rules_.push_back(std::move(rule));
}

const Rule* RuleSet::find(std::string_view name) const {
  for (const auto& r : rules_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

namespace {

const std::map<std::string, std::string>& default_prefixes() {
  static const std::map<std::string, std::string> kPrefixes = {
      {"", std::string(vocab::kNamespace)},
      {"xsd", "http://www.w3.org/2001/XMLSchema#"},
      {"geo", "http://www.opengis.net/ont/geosparql#"}};
  return kPrefixes;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class RuleReader {
 public:
  explicit RuleReader(std::string_view text)
      : text_(text), prefixes_(default_prefixes()) {}

  RuleSet read() {
    RuleSet rules;
    while (true) {
      skip_space();
      if (at_end()) break;
      if (peek() == '@') {
        read_prefix();
      } else if (peek() == '[') {
        std::size_t line = line_, col = col_;
        Rule r = read_rule();
        try {
          rules.add(std::move(r));
        } catch (const ValidationError& e) {
          throw ParseError(e.what(), line, col);
        }
      } else {
        fail("expected '[' to start a rule");
      }
    }
    return rules;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col_);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip_space();
    if (peek() != c || at_end()) fail(std::string("expected '") + c + "'");
    advance();
  }

  std::string read_word() {
    std::string w;
    while (!at_end() && is_name_char(peek())) {
      w += peek();
      advance();
    }
    return w;
  }

  void read_prefix() {
    std::size_t start = pos_;
    advance();
    std::string kw = read_word();
    if (kw != "prefix") {
      pos_ = start;
      fail("unknown directive '@" + kw + "'");
    }
    skip_space();
    std::string name = read_word();
    if (peek() != ':') fail("expected ':' after prefix name");
    advance();
    skip_space();
    std::string iri = read_angle_iri();
    expect('.');
    prefixes_[name] = iri;
  }

  std::string read_angle_iri() {
    if (peek() != '<') fail("expected '<'");
    advance();
    std::string out;
    while (!at_end() && peek() != '>') {
      if (peek() == '\n') fail("unterminated IRI");
      out += peek();
      advance();
    }
    if (at_end()) fail("unterminated IRI");
    advance();
    if (!is_absolute_iri(out)) fail("malformed IRI '" + out + "'");
    return out;
  }

  std::string read_local() {
    std::string local;
    while (!at_end()) {
      char c = peek();
      if (is_name_char(c) || c == '-' ||
          (c == '.' && is_name_char(peek(1)))) {
        local += c;
        advance();
      } else {
        break;
      }
    }
    return local;
  }

  std::string expand(const std::string& prefix) {
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) fail("undeclared prefix '" + prefix + ":'");
    return it->second + read_local();
  }

  Rule read_rule() {
    expect('[');
    skip_space();
    Rule rule;
    while (!at_end() && (is_name_char(peek()) || peek() == '-' ||
                         peek() == '.')) {
      rule.name += peek();
      advance();
    }
    if (rule.name.empty()) fail("expected rule name");
    expect(':');
    while (true) {
      skip_space();
      if (peek() == '-' && peek(1) == '>') {
        advance();
        advance();
        break;
      }
      if (at_end() || peek() == ']') fail("expected '->' in rule body");
      if (peek() == '(') {
        rule.body.emplace_back(read_pattern());
      } else {
        rule.body.emplace_back(read_builtin());
      }
    }
    while (true) {
      skip_space();
      if (peek() == ']') {
        advance();
        break;
      }
      if (at_end()) fail("unterminated rule");
      if (peek() != '(') fail("expected triple pattern in rule head");
      rule.head.push_back(read_pattern());
    }
    return rule;
  }

  TriplePattern read_pattern() {
    expect('(');
    TriplePattern p{read_term(), read_term(), read_term()};
    expect(')');
    return p;
  }

  BuiltinCall read_builtin() {
    skip_space();
    std::size_t line = line_, col = col_;
    BuiltinCall call;
    call.name = read_word();
    if (call.name.empty()) fail("expected triple pattern or built-in");
    if (!builtin_registry().count(call.name)) {
      throw ParseError("unknown built-in '" + call.name + "'", line, col);
    }
    expect('(');
    while (true) {
      skip_space();
      std::size_t aline = line_, acol = col_;
      PatternTerm arg = read_term();
      std::size_t i = call.args.size();
      if (const Term* t = std::get_if<Term>(&arg);
          t && is_geometry_arg(call.name, i)) {
        const Literal* lit = as_literal(*t);
        if (lit && lit->datatype == Datatype::String) {
          try {
            arg = Term{Literal::make(lit->lexical, Datatype::WktLiteral)};
          } catch (const ValidationError& e) {
            throw ParseError(e.what(), aline, acol);
          }
        }
      }
      call.args.push_back(std::move(arg));
      skip_space();
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == ')') {
        advance();
        break;
      }
      fail("expected ',' or ')' in built-in arguments");
    }
    return call;
  }

  PatternTerm read_term() {
    skip_space();
    if (at_end()) fail("expected term");
    std::size_t line = line_, col = col_;
    char c = peek();
    try {
      if (c == '?') {
        advance();
        std::string name = read_word();
        if (name.empty()) fail("expected variable name after '?'");
        return Variable{name};
      }
      if (c == '<') return Term{Iri(read_angle_iri())};
      if (c == '"') return Term{read_literal()};
      if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c))) {
        return Term{read_number()};
      }
      if (c == ':') {
        advance();
        return Term{Iri(expand(""))};
      }
      std::string word = read_word();
      if (word.empty()) fail(std::string("unexpected character '") + c + "'");
      if (peek() == ':') {
        advance();
        return Term{Iri(expand(word))};
      }
      if (word == "type" || word == "a") return Term{vocab::type};
      if (word == "true" || word == "false") {
        return Term{Literal::of_bool(word == "true")};
      }
      throw ParseError("unexpected identifier '" + word + "'", line, col);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line, col);
    }
  }

  Literal read_number() {
    std::string s;
    bool is_double = false;
    if (peek() == '-' || peek() == '+') {
      s += peek();
      advance();
    }
    while (!at_end()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        s += c;
      } else if (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        s += c;
        is_double = true;
      } else if ((c == 'e' || c == 'E') &&
                 (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                  ((peek(1) == '-' || peek(1) == '+') &&
                   std::isdigit(static_cast<unsigned char>(peek(2)))))) {
        s += c;
        advance();
        s += peek();
        is_double = true;
      } else {
        break;
      }
      advance();
    }
    return Literal::make(s, is_double ? Datatype::Double : Datatype::Integer);
  }

  Literal read_literal() {
    advance();
    std::string lex;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = peek();
      advance();
      if (c == '"') break;
      if (c != '\\') {
        lex += c;
        continue;
      }
      if (at_end()) fail("dangling escape");
      char e = peek();
      advance();
      switch (e) {
        case 'n': lex += '\n'; break;
        case 't': lex += '\t'; break;
        case 'r': lex += '\r'; break;
        case '"': lex += '"'; break;
        case '\\': lex += '\\'; break;
        default: fail(std::string("unknown escape '\\") + e + "'");
      }
    }
    if (peek() != '^') return Literal::make(lex, Datatype::String);
    advance();
    if (peek() != '^') fail("expected '^^'");
    advance();
    std::optional<Datatype> dt;
    if (peek() == '<') {
      std::string iri = read_angle_iri();
      dt = datatype_from_iri(iri);
      if (!dt) fail("unsupported datatype <" + iri + ">");
    } else {
      std::string word = read_word();
      if (peek() == ':') {
        advance();
        std::string iri = expand(word);
        dt = datatype_from_iri(iri);
        if (!dt) fail("unsupported datatype <" + iri + ">");
      } else {
        dt = datatype_from_name(word);
        if (!dt) fail("unsupported datatype '" + word + "'");
      }
    }
    return Literal::make(lex, *dt);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::map<std::string, std::string> prefixes_;
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string format_rule_term(const PatternTerm& t) {
  if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
  const Term& term = std::get<Term>(t);
  if (const auto* i = as_iri(term)) {
    std::string_view ns = vocab::kNamespace;
    std::string_view value = i->value;
    if (value.substr(0, ns.size()) == ns) {
      std::string_view local = value.substr(ns.size());
      bool simple = !local.empty();
      for (std::size_t k = 0; k < local.size() && simple; ++k) {
        char c = local[k];
        simple = is_name_char(c) || c == '-' ||
                 (c == '.' && k + 1 < local.size() &&
                  is_name_char(local[k + 1]));
      }
      if (simple) return ":" + std::string(local);
    }
    return "<" + i->value + ">";
  }
  const Literal& lit = std::get<Literal>(term);
  std::string out = "\"" + escape(lit.lexical) + "\"";
  if (lit.datatype != Datatype::String) {
    out += "^^" + std::string(datatype_name(lit.datatype));
  }
  return out;
}

}  // namespace

std::string format_pattern(const TriplePattern& p) {
  return "(" + format_rule_term(p.subject) + " " +
         format_rule_term(p.predicate) + " " + format_rule_term(p.object) +
         ")";
}

std::string format_triple(const Triple& t) {
  return format_pattern(
      TriplePattern{Term{t.subject}, Term{t.predicate}, t.object});
}

std::string format_rule(const Rule& rule) {
  std::string out = "[" + rule.name + ":";
  for (const auto& item : rule.body) {
    out += " ";
    if (const auto* p = std::get_if<TriplePattern>(&item)) {
      out += format_pattern(*p);
    } else {
      const auto& b = std::get<BuiltinCall>(item);
      out += b.name + "(";
      for (std::size_t i = 0; i < b.args.size(); ++i) {
        if (i) out += ", ";
        out += format_rule_term(b.args[i]);
      }
      out += ")";
    }
  }
  out += " ->";
  for (const auto& p : rule.head) out += " " + format_pattern(p);
  out += "]";
  return out;
}

std::string serialize_rules(const RuleSet& rules) {
  std::string out;
  for (const auto& r : rules.rules()) out += format_rule(r) + "\n";
  return out;
}

RuleSet parse_rules(std::string_view text) { return RuleReader(text).read(); }

}  // namespace semtwin

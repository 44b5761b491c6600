#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "surropub/scm.hpp"

namespace surropub {

namespace {

enum class Tok {
  Identifier, Number, String,
  Pipe, Tilde, Colon, Comma, Semicolon,
  LBrace, RBrace, LParen, RParen,
  EqEq, NotEq,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t col;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
        continue;
      }
      const std::size_t line = line_, col = col_;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          word += text_[pos_];
          advance();
        }
        out.push_back({Tok::Identifier, std::move(word), line, col});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        std::string num;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                text_[pos_] == 'e' || text_[pos_] == 'E' ||
                ((text_[pos_] == '+' || text_[pos_] == '-') && !num.empty() &&
                 (num.back() == 'e' || num.back() == 'E')))) {
          num += text_[pos_];
          advance();
        }
        out.push_back({Tok::Number, std::move(num), line, col});
        continue;
      }
      if (c == '"') {
        advance();
        std::string s;
        while (pos_ < text_.size() && text_[pos_] != '"') {
          s += text_[pos_];
          advance();
        }
        if (pos_ >= text_.size()) throw ParseError("unterminated string", line, col);
        advance();
        out.push_back({Tok::String, std::move(s), line, col});
        continue;
      }
      if (c == '=' && peek(1) == '=') {
        advance(); advance();
        out.push_back({Tok::EqEq, "==", line, col});
        continue;
      }
      if (c == '!' && peek(1) == '=') {
        advance(); advance();
        out.push_back({Tok::NotEq, "!=", line, col});
        continue;
      }
      Tok kind;
      switch (c) {
        case '|': kind = Tok::Pipe; break;
        case '~': kind = Tok::Tilde; break;
        case ':': kind = Tok::Colon; break;
        case ',': kind = Tok::Comma; break;
        case ';': kind = Tok::Semicolon; break;
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      advance();
      out.push_back({kind, std::string(1, c), line, col});
    }
    out.push_back({Tok::End, "", line_, col_});
    return out;
  }

private:
  char peek(std::size_t ahead) const {
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

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool is_keyword(const Token& t, std::string_view word) {
  return t.kind == Tok::Identifier && t.text == word;
}

class Parser {
public:
  Parser(std::vector<Token> tokens, SchemaPtr schema, bool allow_symbolic)
      : tokens_(std::move(tokens)), schema_(std::move(schema)),
        allow_symbolic_(allow_symbolic) {}

  DocumentDraft run() {
    DocumentDraft doc;
    while (!at(Tok::End)) {
      if (is_keyword(peek(), "var")) {
        doc.equations.push_back(parse_equation());
      } else if (is_keyword(peek(), "constraint")) {
        doc.constraints.push_back(parse_constraint());
      } else {
        fail("expected 'var' or 'constraint'");
      }
    }
    doc.free_parameters = std::move(free_params_);
    return doc;
  }

private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  Token take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " (at end of document)"
                                               : " (near '" + t.text + "')"),
                     t.line, t.col);
  }
  Token expect(Tok kind, const std::string& what) {
    if (!at(kind)) fail("expected " + what);
    return take();
  }

  std::size_t resolve_variable(const Token& name) const {
    auto idx = schema_->find(name.text);
    if (!idx)
      throw ParseError("unknown variable '" + name.text + "'", name.line, name.col);
    return *idx;
  }

  /// A code token may be a number, identifier, or quoted string.
  std::string parse_code_text() {
    if (at(Tok::Number) || at(Tok::Identifier) || at(Tok::String)) return take().text;
    fail("expected a value code");
  }

  std::uint16_t resolve_code(std::size_t variable, const Token& at_tok,
                             const std::string& code) const {
    auto idx = schema_->variable(variable).index_of(code);
    if (!idx)
      throw ParseError("variable '" + schema_->variable(variable).name +
                           "' has no code '" + code + "'",
                       at_tok.line, at_tok.col);
    return static_cast<std::uint16_t>(*idx);
  }

  Equation parse_equation() {
    take();  // var
    const Token name = expect(Tok::Identifier, "a variable name");
    Equation eq;
    eq.variable = resolve_variable(name);
    if (at(Tok::Pipe)) {
      take();
      for (;;) {
        const Token parent = expect(Tok::Identifier, "a parent name");
        const std::size_t p = resolve_variable(parent);
        if (p == eq.variable)
          throw ParseError("variable '" + parent.text + "' cannot be its own parent",
                           parent.line, parent.col);
        if (std::find(eq.parents.begin(), eq.parents.end(), p) != eq.parents.end())
          throw ParseError("duplicate parent '" + parent.text + "'", parent.line, parent.col);
        eq.parents.push_back(p);
        if (!at(Tok::Comma)) break;
        take();
      }
    }
    expect(Tok::Tilde, "'~'");

    bool saw_default = false;
    for (;;) {
      Clause clause;
      if (is_keyword(peek(), "when")) {
        const Token when_tok = take();
        clause.guard = parse_predicate(&eq);
        expect(Tok::Colon, "':' after the guard");
        if (saw_default)
          throw ParseError("guarded clause after the default clause", when_tok.line,
                           when_tok.col);
      } else {
        if (is_keyword(peek(), "else")) take();
        saw_default = true;
      }
      clause.dist = parse_distribution(eq.variable);
      eq.clauses.push_back(std::move(clause));
      if (at(Tok::Comma)) {  // optional separator between clauses
        take();
        continue;
      }
      if (is_keyword(peek(), "when") || is_keyword(peek(), "else") ||
          is_keyword(peek(), "categorical") || is_keyword(peek(), "bernoulli") ||
          is_keyword(peek(), "uniform"))
        continue;
      break;
    }
    if (at(Tok::Semicolon)) take();
    if (!saw_default)
      throw ParseError("equation of '" + name.text + "' is missing an unconditional default clause",
                       name.line, name.col);
    return eq;
  }

  Constraint parse_constraint() {
    take();  // constraint
    Constraint c;
    c.description = expect(Tok::String, "a quoted description").text;
    expect(Tok::Colon, "':' after the description");
    c.predicate = parse_predicate(nullptr);
    if (at(Tok::Semicolon)) take();
    return c;
  }

  /// Guards reference only the equation's parents; constraints any variable.
  PredicatePtr parse_predicate(const Equation* scope) { return parse_or(scope); }

  PredicatePtr parse_or(const Equation* scope) {
    auto left = parse_and(scope);
    while (is_keyword(peek(), "or")) {
      take();
      auto node = std::make_shared<Predicate>();
      node->kind = Predicate::Kind::Or;
      node->children = {std::move(left), parse_and(scope)};
      left = std::move(node);
    }
    return left;
  }

  PredicatePtr parse_and(const Equation* scope) {
    auto left = parse_unary(scope);
    while (is_keyword(peek(), "and")) {
      take();
      auto node = std::make_shared<Predicate>();
      node->kind = Predicate::Kind::And;
      node->children = {std::move(left), parse_unary(scope)};
      left = std::move(node);
    }
    return left;
  }

  PredicatePtr parse_unary(const Equation* scope) {
    if (is_keyword(peek(), "not")) {
      take();
      auto node = std::make_shared<Predicate>();
      node->kind = Predicate::Kind::Not;
      node->children = {parse_unary(scope)};
      return node;
    }
    if (at(Tok::LParen)) {
      take();
      auto inner = parse_or(scope);
      expect(Tok::RParen, "')'");
      return inner;
    }
    const Token name = expect(Tok::Identifier, "a variable name");
    const std::size_t var = resolve_variable(name);
    if (scope &&
        std::find(scope->parents.begin(), scope->parents.end(), var) == scope->parents.end())
      throw ParseError("guard references '" + name.text +
                           "', which is not a declared parent of '" +
                           schema_->variable(scope->variable).name + "'",
                       name.line, name.col);
    auto node = std::make_shared<Predicate>();
    node->variable = var;
    if (at(Tok::EqEq) || at(Tok::NotEq)) {
      node->kind = at(Tok::EqEq) ? Predicate::Kind::Eq : Predicate::Kind::Ne;
      take();
      const Token code_tok = peek();
      node->values.push_back(resolve_code(var, code_tok, parse_code_text()));
      return node;
    }
    if (is_keyword(peek(), "in")) {
      take();
      node->kind = Predicate::Kind::In;
      expect(Tok::LBrace, "'{'");
      for (;;) {
        const Token code_tok = peek();
        node->values.push_back(resolve_code(var, code_tok, parse_code_text()));
        if (at(Tok::Comma)) {
          take();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      return node;
    }
    fail("expected '==', '!=' or 'in' after '" + name.text + "'");
  }

  /// Weight in a categorical clause: a number, or (draft mode) an identifier.
  double parse_weight(bool* symbolic) {
    if (at(Tok::Number)) return std::stod(take().text);
    if (at(Tok::Identifier) && allow_symbolic_) {
      free_params_.push_back(take().text);
      *symbolic = true;
      return std::numeric_limits<double>::quiet_NaN();
    }
    if (at(Tok::Identifier))
      fail("weight '" + peek().text + "' is a free parameter; assign it a numeric value");
    fail("expected a numeric weight");
  }

  Distribution parse_distribution(std::size_t variable) {
    const Token head = expect(Tok::Identifier, "a distribution");
    const std::size_t k = schema_->variable(variable).cardinality();
    Distribution dist;
    bool symbolic = false;
    if (head.text == "categorical") {
      dist.kind = Distribution::Kind::Categorical;
      dist.weights.assign(k, 0.0);
      std::vector<bool> seen(k, false);
      expect(Tok::LBrace, "'{'");
      for (;;) {
        const Token code_tok = peek();
        const std::uint16_t idx = resolve_code(variable, code_tok, parse_code_text());
        if (seen[idx])
          throw ParseError("code '" + schema_->variable(variable).code(idx) +
                               "' listed twice",
                           code_tok.line, code_tok.col);
        seen[idx] = true;
        expect(Tok::Colon, "':' between code and weight");
        const Token w_tok = peek();
        const double w = parse_weight(&symbolic);
        if (!symbolic && w < 0.0)
          throw ParseError("negative weight", w_tok.line, w_tok.col);
        dist.weights[idx] = w;
        if (at(Tok::Comma)) {
          take();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      if (!symbolic) {
        double sum = 0.0;
        for (double w : dist.weights) sum += w;
        if (std::fabs(sum - 1.0) > 1e-9)
          throw ParseError("weights of '" + schema_->variable(variable).name +
                               "' sum to " + std::to_string(sum) + ", expected 1",
                           head.line, head.col);
      }
      return dist;
    }
    if (head.text == "bernoulli") {
      if (k != 2)
        throw ParseError("bernoulli requires a 2-value variable; '" +
                             schema_->variable(variable).name + "' has " +
                             std::to_string(k) + " values",
                         head.line, head.col);
      dist.kind = Distribution::Kind::Bernoulli;
      expect(Tok::LParen, "'('");
      const Token p_tok = peek();
      const double p = parse_weight(&symbolic);
      expect(Tok::RParen, "')'");
      if (!symbolic) {
        if (p < 0.0 || p > 1.0)
          throw ParseError("bernoulli parameter must be in [0, 1]", p_tok.line, p_tok.col);
        dist.bernoulli_p = p;
        dist.weights = {1.0 - p, p};
      } else {
        dist.weights = {std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()};
      }
      return dist;
    }
    if (head.text == "uniform") {
      dist.kind = Distribution::Kind::Uniform;
      dist.weights.assign(k, 0.0);
      expect(Tok::LBrace, "'{'");
      std::size_t count = 0;
      std::vector<bool> seen(k, false);
      for (;;) {
        const Token code_tok = peek();
        const std::uint16_t idx = resolve_code(variable, code_tok, parse_code_text());
        if (seen[idx])
          throw ParseError("code '" + schema_->variable(variable).code(idx) +
                               "' listed twice",
                           code_tok.line, code_tok.col);
        seen[idx] = true;
        dist.weights[idx] = 1.0;
        ++count;
        if (at(Tok::Comma)) {
          take();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      for (auto& w : dist.weights) w /= static_cast<double>(count);
      return dist;
    }
    throw ParseError("unknown distribution '" + head.text +
                         "'; expected categorical, bernoulli or uniform",
                     head.line, head.col);
  }

  std::vector<Token> tokens_;
  SchemaPtr schema_;
  bool allow_symbolic_;
  std::vector<std::string> free_params_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Predicate::eval(const Record& record) const {
  switch (kind) {
    case Kind::Eq:
      return record.cells[variable] == values[0];
    case Kind::Ne:
      return record.cells[variable] != values[0];
    case Kind::In:
      return std::find(values.begin(), values.end(), record.cells[variable]) != values.end();
    case Kind::And:
      return children[0]->eval(record) && children[1]->eval(record);
    case Kind::Or:
      return children[0]->eval(record) || children[1]->eval(record);
    case Kind::Not:
      return !children[0]->eval(record);
  }
  return false;
}

std::string Predicate::to_dsl(const Schema& schema) const {
  const auto code = [&](std::uint16_t v) { return schema.variable(variable).code(v); };
  switch (kind) {
    case Kind::Eq:
      return schema.variable(variable).name + " == " + code(values[0]);
    case Kind::Ne:
      return schema.variable(variable).name + " != " + code(values[0]);
    case Kind::In: {
      std::string out = schema.variable(variable).name + " in {";
      for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? ", " : "") + code(values[i]);
      return out + "}";
    }
    case Kind::And:
      return "(" + children[0]->to_dsl(schema) + " and " + children[1]->to_dsl(schema) + ")";
    case Kind::Or:
      return "(" + children[0]->to_dsl(schema) + " or " + children[1]->to_dsl(schema) + ")";
    case Kind::Not:
      return "not (" + children[0]->to_dsl(schema) + ")";
  }
  return "";
}

bool eval_constraint(const Constraint& constraint, const Record& record) {
  return constraint.predicate->eval(record);
}

namespace {

std::string format_weight(double w) {
  // Shortest representation that parses back to the same double.
  std::ostringstream out;
  out.precision(17);
  out << w;
  std::string text = out.str();
  if (std::stod(text) == w) {
    for (int digits = 1; digits < 17; ++digits) {
      std::ostringstream shorter;
      shorter.precision(digits);
      shorter << w;
      if (std::stod(shorter.str()) == w) return shorter.str();
    }
  }
  return text;
}

}  // namespace

std::string Distribution::to_dsl(const Schema& schema, std::size_t variable) const {
  const auto& spec = schema.variable(variable);
  switch (kind) {
    case Kind::Bernoulli:
      return "bernoulli(" + format_weight(bernoulli_p) + ")";
    case Kind::Uniform: {
      std::string out = "uniform{";
      bool first = true;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
          out += (first ? "" : ", ") + spec.code(i);
          first = false;
        }
      }
      return out + "}";
    }
    case Kind::Categorical: {
      std::string out = "categorical{";
      bool first = true;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] != 0.0) {
          out += (first ? "" : ", ") + spec.code(i) + ": " + format_weight(weights[i]);
          first = false;
        }
      }
      return out + "}";
    }
  }
  return "";
}

std::string Constraint::to_dsl(const Schema& schema) const {
  return "constraint \"" + description + "\": " + predicate->to_dsl(schema) + ";";
}

DagCheck validate_dag(const std::vector<std::vector<std::size_t>>& parents) {
  const std::size_t n = parents.size();
  std::vector<std::size_t> remaining(n);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v) {
    remaining[v] = parents[v].size();
    for (std::size_t p : parents[v]) children[p].push_back(v);
  }

  DagCheck out;
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (remaining[v] == 0) ready.push_back(v);
  // Process in ascending index order for a deterministic topological order.
  for (std::size_t head = 0; head < ready.size(); ++head) {
    std::sort(ready.begin() + static_cast<std::ptrdiff_t>(head), ready.end());
    const std::size_t v = ready[head];
    out.topo_order.push_back(v);
    for (std::size_t c : children[v])
      if (--remaining[c] == 0) ready.push_back(c);
  }
  if (out.topo_order.size() == n) {
    out.ok = true;
    return out;
  }

  // Walk parent links among the unresolved nodes until a repeat closes a cycle.
  std::vector<bool> resolved(n, false);
  for (std::size_t v : out.topo_order) resolved[v] = true;
  std::size_t start = 0;
  while (resolved[start]) ++start;
  std::vector<std::size_t> path;
  std::vector<std::ptrdiff_t> seen_at(n, -1);
  std::size_t cur = start;
  for (;;) {
    if (seen_at[cur] >= 0) {
      out.cycle.assign(path.begin() + seen_at[cur], path.end());
      out.cycle.push_back(cur);
      break;
    }
    seen_at[cur] = static_cast<std::ptrdiff_t>(path.size());
    path.push_back(cur);
    std::size_t next = n;
    for (std::size_t p : parents[cur])
      if (!resolved[p]) {
        next = p;
        break;
      }
    cur = next;
  }
  out.topo_order.clear();
  return out;
}

std::string cycle_to_string(const Schema& schema, const std::vector<std::size_t>& cycle) {
  std::string out;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (i) out += " -> ";
    out += schema.variable(cycle[i]).name;
  }
  return out;
}

ScmModel::ScmModel(SchemaPtr schema, std::vector<Equation> equations,
                   std::vector<Constraint> constraints)
    : schema_(std::move(schema)),
      equations_(std::move(equations)),
      constraints_(std::move(constraints)) {
  if (equations_.size() != schema_->variable_count())
    throw Error("ScmModel requires exactly one equation per schema variable");
  for (std::size_t v = 0; v < equations_.size(); ++v)
    if (equations_[v].variable != v) throw Error("ScmModel equations must be variable-indexed");
  auto check = validate_dag(parents());
  if (!check.ok)
    throw Error("ScmModel contains a cycle: " + cycle_to_string(*schema_, check.cycle));
  topo_order_ = std::move(check.topo_order);
}

std::vector<std::vector<std::size_t>> ScmModel::parents() const {
  std::vector<std::vector<std::size_t>> out(equations_.size());
  for (const auto& eq : equations_) out[eq.variable] = eq.parents;
  return out;
}

std::string ScmModel::to_dsl() const {
  std::ostringstream out;
  for (std::size_t v : topo_order_) {
    const auto& eq = equations_[v];
    out << "var " << schema_->variable(v).name;
    for (std::size_t i = 0; i < eq.parents.size(); ++i)
      out << (i == 0 ? " | " : ", ") << schema_->variable(eq.parents[i]).name;
    out << " ~";
    for (const auto& clause : eq.clauses) {
      out << "\n  ";
      if (clause.guard)
        out << "when " << clause.guard->to_dsl(*schema_) << ": ";
      else if (eq.clauses.size() > 1)
        out << "else ";
      out << clause.dist.to_dsl(*schema_, v);
    }
    out << ";\n";
  }
  for (const auto& c : constraints_) out << c.to_dsl(*schema_) << "\n";
  return out.str();
}

DocumentDraft parse_scm_draft(const std::string& text, SchemaPtr schema,
                              bool allow_symbolic_weights) {
  Lexer lexer(text);
  Parser parser(lexer.run(), std::move(schema), allow_symbolic_weights);
  return parser.run();
}

ScmModel parse_scm(const std::string& text, SchemaPtr schema) {
  DocumentDraft doc = parse_scm_draft(text, schema, /*allow_symbolic_weights=*/false);

  std::vector<Equation> by_var(schema->variable_count());
  std::vector<bool> present(schema->variable_count(), false);
  for (auto& eq : doc.equations) {
    if (present[eq.variable])
      throw ParseError("variable '" + schema->variable(eq.variable).name +
                       "' has more than one equation");
    present[eq.variable] = true;
    by_var[eq.variable] = std::move(eq);
  }
  for (std::size_t v = 0; v < present.size(); ++v)
    if (!present[v])
      throw ParseError("variable '" + schema->variable(v).name + "' has no equation");

  std::vector<std::vector<std::size_t>> parents(by_var.size());
  for (const auto& eq : by_var) parents[eq.variable] = eq.parents;
  auto check = validate_dag(parents);
  if (!check.ok)
    throw ParseError("cycle detected: " + cycle_to_string(*schema, check.cycle));

  return ScmModel(std::move(schema), std::move(by_var), std::move(doc.constraints));
}

}  // namespace surropub

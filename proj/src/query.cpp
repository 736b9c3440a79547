#include "cledger/query.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cledger {

// ---------------------------------------------------------------------------
// Contract spec loading

namespace {

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw SpecError(std::string("missing key: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("bad value for key ") + key + ": " + e.what());
  }
}

}  // namespace

std::shared_ptr<const Contract> load_contract_spec(const std::string& jsonText) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonText);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("invalid JSON: ") + e.what());
  }

  LegalAutomaton a;
  a.id = get_field<std::string>(j, "id");
  for (const auto& r : get_field<std::vector<std::string>>(j, "resources"))
    a.resources.insert(r);
  for (const auto& e : get_field<std::vector<std::string>>(j, "events"))
    a.events.events.insert(e);
  for (const auto& k : get_field<std::vector<std::string>>(j, "actors"))
    a.actors.insert(k);
  for (const auto& s : get_field<std::vector<std::string>>(j, "states"))
    a.states.insert(s);
  a.initial = get_field<std::string>(j, "initial");

  if (!j.contains("actions")) throw SpecError("missing key: actions");
  for (const auto& [name, body] : j.at("actions").items()) {
    a.actions.insert(name);
    Transfer t;
    t.resource = get_field<std::string>(body, "resource");
    t.from = ActorId::parse(get_field<std::string>(body, "from"));
    t.to = ActorId::parse(get_field<std::string>(body, "to"));
    a.rho.emplace(name, std::move(t));
  }

  if (!j.contains("finals")) throw SpecError("missing key: finals");
  for (const auto& [state, verdict] : j.at("finals").items()) {
    std::string v = verdict.get<std::string>();
    if (v != "HON" && v != "BRC")
      throw SpecError("final verdict must be HON or BRC: " + v);
    a.finals.emplace(state, v == "HON" ? Outcome::Honoured : Outcome::Breach);
  }

  std::size_t n = 0;
  for (const auto& tr : get_field<std::vector<nlohmann::json>>(j, "transitions")) {
    LegalTransition t;
    t.source = get_field<std::string>(tr, "from");
    t.target = get_field<std::string>(tr, "to");
    for (const auto& act : get_field<std::vector<std::string>>(tr, "actions"))
      t.actions.insert(act);
    t.id = "t" + std::to_string(n++) + ":" + t.source + "->" + t.target;
    a.transitions.push_back(std::move(t));
  }

  for (const auto& to : get_field<std::vector<std::string>>(j, "timeouts"))
    a.timeouts.insert(to);

  std::vector<Allocation> allocs;
  if (!j.contains("initial_allocations"))
    throw SpecError("missing key: initial_allocations");
  for (const auto& [res, actor] : j.at("initial_allocations").items())
    allocs.push_back({res, ActorId::parse(actor.get<std::string>())});
  a.initialSoA = new_state_of_affairs(a.resources, a.events, allocs);

  return Contract::build(std::move(a));
}

std::shared_ptr<const Contract> load_contract_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_contract_spec(buf.str());
}

// ---------------------------------------------------------------------------
// Formula parser

namespace {

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }

  char peek_char() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  bool try_punct(const std::string& p) {
    skip_ws();
    if (src.compare(pos, p.size(), p) == 0) {
      pos += p.size();
      return true;
    }
    return false;
  }

  void expect_punct(const std::string& p) {
    if (!try_punct(p)) throw SyntaxError(pos, "'" + p + "'");
  }

  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
           c == '.' || c == '-';
  }

  /// Peeks the next word without consuming it; empty when none.
  std::string peek_word() {
    skip_ws();
    std::size_t i = pos;
    while (i < src.size() && word_char(src[i])) ++i;
    return src.substr(pos, i - pos);
  }

  std::string take_word(const char* what) {
    std::string w = peek_word();
    if (w.empty()) throw SyntaxError(pos, what);
    pos += w.size();
    return w;
  }

  std::string take_quoted() {
    skip_ws();
    if (pos >= src.size() || src[pos] != '"')
      throw SyntaxError(pos, "quoted string");
    std::size_t end = src.find('"', pos + 1);
    if (end == std::string::npos) throw SyntaxError(pos, "closing quote");
    std::string out = src.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    return out;
  }

  long take_number() {
    skip_ws();
    std::size_t start = pos;
    if (pos < src.size() && src[pos] == '-') ++pos;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
      ++pos;
    if (pos == start || (src[start] == '-' && pos == start + 1))
      throw SyntaxError(start, "number");
    return std::stol(src.substr(start, pos - start));
  }
};

struct Parser {
  Lexer lex;

  Transfer transfer_literal() {
    lex.expect_punct("(");
    Transfer t;
    t.resource = lex.take_word("resource name");
    lex.expect_punct(",");
    t.from = ActorId::parse(lex.take_word("actor name"));
    lex.expect_punct(",");
    t.to = ActorId::parse(lex.take_word("actor name"));
    lex.expect_punct(")");
    return t;
  }

  FormulaPtr atom() {
    if (lex.try_punct("(")) {
      auto f = formula();
      lex.expect_punct(")");
      return f;
    }
    std::size_t at = lex.pos;
    std::string w = lex.take_word("atom");
    if (w == "true") return Formula::make_true();
    if (w == "false") return Formula::make_false();
    if (w == "chi") {
      lex.expect_punct("(");
      long t = lex.take_number();
      lex.expect_punct(")");
      return Formula::chi(t);
    }
    if (w == "app") {
      lex.expect_punct("(");
      Transfer t = transfer_literal();
      FormulaPtr f;
      if (lex.try_punct(",")) {
        long n = lex.take_number();
        f = Formula::app_at(t, n);
      } else {
        f = Formula::app(t);
      }
      lex.expect_punct(")");
      return f;
    }
    if (w == "applast") {
      lex.expect_punct("(");
      Transfer t = transfer_literal();
      lex.expect_punct(",");
      long bound = lex.take_number();
      lex.expect_punct(")");
      return Formula::app_last(t, bound);
    }
    if (w == "hol") {
      lex.expect_punct("(");
      std::string r = lex.take_word("resource name");
      lex.expect_punct(",");
      std::string k = lex.take_word("actor name");
      lex.expect_punct(",");
      long t = lex.take_number();
      lex.expect_punct(")");
      return Formula::hol(r, k, t);
    }
    if (w == "phi") {
      lex.expect_punct("(");
      long t = lex.take_number();
      lex.expect_punct(")");
      return Formula::phi(t);
    }
    if (w == "bc") {
      lex.expect_punct("(");
      std::string cid = lex.take_word("contract id");
      lex.expect_punct(")");
      return Formula::bc(cid);
    }
    if (w == "oneof") {
      lex.expect_punct("(");
      std::set<Path> paths;
      do {
        std::string text = lex.take_quoted();
        Path p;
        std::istringstream in(text);
        std::string name;
        while (in >> name) p.push_back(name);
        paths.insert(std::move(p));
      } while (lex.try_punct(","));
      lex.expect_punct(")");
      return Formula::one_of(std::move(paths));
    }
    lex.pos = at;
    throw UnknownIdentifier(w);
  }

  FormulaPtr unary() {
    std::string w = lex.peek_word();
    if (w == "not") {
      lex.take_word("not");
      return Formula::negation(unary());
    }
    if (w == "EXF") { lex.take_word("EXF"); return Formula::modal(FormulaKind::DiamondUp, unary()); }
    if (w == "ALF") { lex.take_word("ALF"); return Formula::modal(FormulaKind::BoxDown, unary()); }
    if (w == "PAST") { lex.take_word("PAST"); return Formula::modal(FormulaKind::DiamondDown, unary()); }
    if (w == "ALLP") { lex.take_word("ALLP"); return Formula::modal(FormulaKind::BoxUp, unary()); }
    if (w == "NXE") { lex.take_word("NXE"); return Formula::modal(FormulaKind::NextDia, unary()); }
    if (w == "NXA") { lex.take_word("NXA"); return Formula::modal(FormulaKind::NextBox, unary()); }
    if (w == "PVE") { lex.take_word("PVE"); return Formula::modal(FormulaKind::PrevDia, unary()); }
    if (w == "PVA") { lex.take_word("PVA"); return Formula::modal(FormulaKind::PrevBox, unary()); }
    if (w == "pullback" || w == "exists" || w == "forall") {
      lex.take_word("map operator");
      std::string mapName = lex.take_quoted();
      FormulaKind k = w == "pullback" ? FormulaKind::Pullback
                      : w == "exists" ? FormulaKind::ExistsAlong
                                      : FormulaKind::ForallAlong;
      return Formula::along(k, mapName, unary());
    }
    return atom();
  }

  FormulaPtr and_expr() {
    auto f = unary();
    while (lex.peek_word() == "and") {
      lex.take_word("and");
      f = Formula::conjunction(f, unary());
    }
    return f;
  }

  FormulaPtr or_expr() {
    auto f = and_expr();
    while (lex.peek_word() == "or") {
      lex.take_word("or");
      f = Formula::disjunction(f, and_expr());
    }
    return f;
  }

  FormulaPtr formula() {
    auto f = or_expr();
    if (lex.try_punct("=>")) return Formula::implication(f, formula());
    return f;
  }
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) {
  Parser p{Lexer{text}};
  auto f = p.formula();
  if (!p.lex.at_end()) throw SyntaxError(p.lex.pos, "end of input");
  return f;
}

namespace {

std::string print_transfer_args(const std::string& name) {
  // Transfer names are already "(r,from,to)".
  return name;
}

}  // namespace

std::string print_formula(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::True:
      return "true";
    case FormulaKind::False:
      return "false";
    case FormulaKind::Not:
      return "not " + print_formula(f->lhs);
    case FormulaKind::And:
      return "(" + print_formula(f->lhs) + " and " + print_formula(f->rhs) + ")";
    case FormulaKind::Or:
      return "(" + print_formula(f->lhs) + " or " + print_formula(f->rhs) + ")";
    case FormulaKind::Implies:
      return "(" + print_formula(f->lhs) + " => " + print_formula(f->rhs) + ")";
    case FormulaKind::DiamondUp:
      return "EXF " + print_formula(f->lhs);
    case FormulaKind::BoxDown:
      return "ALF " + print_formula(f->lhs);
    case FormulaKind::DiamondDown:
      return "PAST " + print_formula(f->lhs);
    case FormulaKind::BoxUp:
      return "ALLP " + print_formula(f->lhs);
    case FormulaKind::NextDia:
      return "NXE " + print_formula(f->lhs);
    case FormulaKind::NextBox:
      return "NXA " + print_formula(f->lhs);
    case FormulaKind::PrevDia:
      return "PVE " + print_formula(f->lhs);
    case FormulaKind::PrevBox:
      return "PVA " + print_formula(f->lhs);
    case FormulaKind::Pullback:
      return "pullback \"" + f->name + "\" " + print_formula(f->lhs);
    case FormulaKind::ExistsAlong:
      return "exists \"" + f->name + "\" " + print_formula(f->lhs);
    case FormulaKind::ForallAlong:
      return "forall \"" + f->name + "\" " + print_formula(f->lhs);
    case FormulaKind::AtomChi:
      return "chi(" + std::to_string(f->t) + ")";
    case FormulaKind::AtomApp:
      return "app(" + print_transfer_args(f->name) + ")";
    case FormulaKind::AtomAppAt:
      return "app(" + print_transfer_args(f->name) + "," + std::to_string(f->t) + ")";
    case FormulaKind::AtomAppLast:
      return "applast(" + print_transfer_args(f->name) + "," + std::to_string(f->t) +
             ")";
    case FormulaKind::AtomHol: {
      return "hol(" + f->name + "," + f->actor + "," + std::to_string(f->t) + ")";
    }
    case FormulaKind::AtomPhi:
      return "phi(" + std::to_string(f->t) + ")";
    case FormulaKind::AtomBc:
      return "bc(" + f->name + ")";
    case FormulaKind::AtomOneOf: {
      std::string out = "oneof(";
      bool first = true;
      for (const auto& p : f->oneOf) {
        if (!first) out += ",";
        first = false;
        out += '"';
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (i) out += ' ';
          out += p[i];
        }
        out += '"';
      }
      return out + ")";
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// Query execution

namespace {

std::string path_display(const Path& p) {
  std::string out = "<";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    out += p[i];
  }
  return out + ">";
}

}  // namespace

QueryResult run_query(const LedgerState& l, const ContractRegistry& registry,
                      const std::set<std::string>& contractIds, const QueryAst& ast) {
  auto lu = std::make_shared<LedgerUniverse>(l, registry, contractIds, ast.horizon,
                                             ast.gate);
  LedgerEvalContext lec(lu);
  std::size_t at = ast.at.value_or(l.size());
  Path here = lu->established(at);

  QueryResult out;
  out.verdict = eval_formula(ast.formula, here, lec.ctx());
  out.truncatedAtHorizon = lec.ctx().truncationSeen;

  // A satisfying future (or past) makes a useful witness for the outer
  // existential modalities.
  if (out.verdict && ast.formula->kind == FormulaKind::DiamondUp) {
    for (const auto& q : lu->enumeration()) {
      if (!is_prefix(here, q)) continue;
      if (eval_formula(ast.formula->lhs, q, lec.ctx())) {
        out.witnesses.push_back(path_display(q));
        break;
      }
    }
  }
  if (out.verdict && ast.formula->kind == FormulaKind::DiamondDown) {
    for (std::size_t n = 0; n <= here.size(); ++n) {
      Path q(here.begin(), here.begin() + n);
      if (eval_formula(ast.formula->lhs, q, lec.ctx())) {
        out.witnesses.push_back(path_display(q));
        break;
      }
    }
  }
  return out;
}

ContractStateAnswer contract_state_at(const LedgerState& l, const Contract& c,
                                      std::optional<std::size_t> at) {
  std::size_t bound = std::min(at.value_or(l.size()), l.size());
  std::vector<Transfer> trace;
  for (std::size_t i = 0; i < bound; ++i)
    if (l.records()[i].contract == c.id()) trace.push_back(l.records()[i].transfer);
  auto scan = scan_transfers(c, trace);
  ContractStateAnswer out;
  out.legalState = scan.legalState;
  out.execState = scan.execState.name();
  auto it = c.legal().finals.find(scan.legalState);
  if (it != c.legal().finals.end()) out.outcome = it->second;
  return out;
}

std::vector<PatternHit> audit_pattern(const LedgerState& l, const Transfer& first,
                                      const Transfer& then) {
  std::vector<PatternHit> out;
  std::size_t searchFrom = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (!(l.records()[i].transfer == first)) continue;
    for (std::size_t j = std::max(searchFrom, i + 1); j < l.size(); ++j) {
      if (l.records()[j].transfer == then) {
        out.push_back({i, j});
        searchFrom = j + 1;
        break;
      }
    }
  }
  return out;
}

}  // namespace cledger

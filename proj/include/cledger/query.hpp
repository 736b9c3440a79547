#ifndef CLEDGER_QUERY_HPP
#define CLEDGER_QUERY_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cledger/logic.hpp"

namespace cledger {

/// Loads the JSON contract description (id, resources, events, actors,
/// actions, states, initial, finals, transitions, timeouts,
/// initial_allocations) and validates it. Throws SpecError on malformed
/// documents and InvalidContract on semantic failures.
class SpecError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<const Contract> load_contract_spec(const std::string& jsonText);
std::shared_ptr<const Contract> load_contract_spec_file(const std::string& path);

class SyntaxError : public std::runtime_error {
public:
  SyntaxError(std::size_t position, const std::string& expected)
      : std::runtime_error("syntax error at position " + std::to_string(position) +
                           ": expected " + expected),
        position_(position),
        expected_(expected) {}
  std::size_t position() const { return position_; }
  const std::string& expected() const { return expected_; }

private:
  std::size_t position_;
  std::string expected_;
};

class UnknownIdentifier : public std::runtime_error {
public:
  explicit UnknownIdentifier(const std::string& name)
      : std::runtime_error("unknown identifier: " + name), name_(name) {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

/// Grammar (precedence low to high: "=>" < or < and < not < modalities):
///   formula  := or_expr ("=>" formula)?           right associative
///   or_expr  := and_expr ("or" and_expr)*
///   and_expr := unary ("and" unary)*
///   unary    := "not" unary | modality unary | atom
///   modality := EXF | ALF | PAST | ALLP | NXE | NXA | PVE | PVA
///             | (pullback | exists | forall) "<map-name>"
///   atom     := true | false | chi(t) | app((r,from,to)) | app((r,from,to),n)
///             | applast((r,from,to),t) | hol(r,k,t) | phi(t) | bc(id)
///             | "(" formula ")"
FormulaPtr parse_formula(const std::string& text);

/// Inverse of parse_formula up to AST equality.
std::string print_formula(const FormulaPtr& f);

struct QueryAst {
  FormulaPtr formula;
  std::optional<std::size_t> at;  // default: the whole recorded ledger
  std::size_t horizon = 6;
  GateMode gate = GateMode::ContractGated;
};

struct QueryResult {
  bool verdict = false;
  std::vector<std::string> witnesses;
  bool truncatedAtHorizon = false;
};

/// Evaluates the formula at the established path of step `at` (default: the
/// full recorded trace) inside the bounded ledger universe.
QueryResult run_query(const LedgerState& l, const ContractRegistry& registry,
                      const std::set<std::string>& contractIds, const QueryAst& ast);

/// The legal and execution states reached by the recorded trace at step `at`.
struct ContractStateAnswer {
  std::string legalState;
  std::string execState;
  std::optional<Outcome> outcome;  // set when the legal state is final
};

ContractStateAnswer contract_state_at(const LedgerState& l, const Contract& c,
                                      std::optional<std::size_t> at = std::nullopt);

/// Occurrences of `first` later followed by `then` in the recorded trace,
/// each occurrence of `first` paired with the next unconsumed `then`.
struct PatternHit {
  std::size_t firstIndex = 0;
  std::size_t thenIndex = 0;
};

std::vector<PatternHit> audit_pattern(const LedgerState& l, const Transfer& first,
                                      const Transfer& then);

}  // namespace cledger

#endif  // CLEDGER_QUERY_HPP

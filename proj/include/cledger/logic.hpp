#ifndef CLEDGER_LOGIC_HPP
#define CLEDGER_LOGIC_HPP

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cledger/automata.hpp"
#include "cledger/ledger.hpp"
#include "cledger/occurrence.hpp"

namespace cledger {

/// A path: a word over the transfer (or bundle) name alphabet.
using Path = std::vector<std::string>;

bool is_prefix(const Path& a, const Path& b);
Path longest_common_prefix(const Path& a, const Path& b);

class LogicError : public std::runtime_error {
public:
  enum class Code {
    PathOutsideUniverse,
    IndexOutOfRange,
    UnregisteredMap,
    UnsupportedAtom,
    NotPrefixClosed,
  };
  LogicError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

private:
  Code code_;
};

/// A finite prefix-closed set of paths; the boolean algebra Subtree(X) is the
/// powerset of the enumeration.
class Universe {
public:
  virtual ~Universe() = default;
  virtual const std::set<Path>& enumeration() const = 0;
  /// True when the enumeration was cut by a horizon (some admissible
  /// prolongation exists beyond the last enumerated step).
  virtual bool truncated() const { return false; }

  bool contains(const Path& p) const { return enumeration().count(p) > 0; }
  std::vector<Path> successors(const Path& p) const;
  const Path* predecessor(const Path& p) const;  // nullptr at the root
};

class ExplicitTree : public Universe {
public:
  /// Throws NotPrefixClosed unless `close` is set, in which case missing
  /// prefixes are added.
  explicit ExplicitTree(std::set<Path> paths, bool close = false);
  const std::set<Path>& enumeration() const override { return paths_; }

private:
  std::set<Path> paths_;
};

enum class GateMode {
  ResourceSafe,    // prolong by any alphabet transfer passing the hand-over gate
  ContractGated,   // prolong only by transfers advancing a contract's execution
};

/// The bounded tree of possible ledger states: all prefixes of the recorded
/// trace (projected onto the given contracts) plus gated prolongations, each
/// divergence growing at most `horizon` steps past its recorded ancestor.
class LedgerUniverse : public Universe {
public:
  LedgerUniverse(LedgerState ledger, ContractRegistry registry,
                 std::set<std::string> contractIds, std::size_t horizon,
                 GateMode gate = GateMode::ContractGated);

  const std::set<Path>& enumeration() const override;
  bool truncated() const override;

  /// First t elements of the projected recorded trace.
  Path established(std::size_t t) const;
  std::size_t recorded_length() const { return base_.size(); }
  const ContractRegistry& registry() const { return registry_; }
  const std::set<std::string>& contract_ids() const { return contractIds_; }

  /// Merged initial allocations of the universe's contracts (for hol replay).
  const StateOfAffairs& initial_state() const { return initial_; }

  std::vector<Transfer> admissible_next(const Path& p) const;

private:
  void ensure_enumerated() const;

  LedgerState ledger_;
  ContractRegistry registry_;
  std::set<std::string> contractIds_;
  std::size_t horizon_;
  GateMode gate_;
  Path base_;                      // projected recorded trace, as names
  std::vector<Transfer> alphabet_;
  StateOfAffairs initial_;
  mutable bool enumerated_ = false;
  mutable bool truncated_ = false;
  mutable std::set<Path> paths_;
};

// ---------------------------------------------------------------------------
// Formulas

enum class FormulaKind {
  True,
  False,
  Not,
  And,
  Or,
  Implies,
  DiamondUp,   // a future exists where the operand holds
  BoxDown,     // the operand holds in all futures
  DiamondDown, // a past exists where the operand held
  BoxUp,       // the operand held in all pasts
  NextDia,
  NextBox,
  PrevDia,
  PrevBox,
  Pullback,
  ExistsAlong,
  ForallAlong,
  AtomChi,      // |path| <= t
  AtomApp,      // name appears in the path
  AtomAppAt,    // name at 1-based position n
  AtomAppLast,  // |path| <= t and name last
  AtomHol,      // actor holds resource at step t
  AtomPhi,      // membership in the evolution E_t
  AtomBc,       // last contract-relevant element completes a bundle
  AtomOneOf,    // membership in an explicit path set (zeta singletons, tests)
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FormulaKind kind;
  FormulaPtr lhs, rhs;
  long t = 0;
  std::string name;     // transfer/bundle name, map name, resource, or contract id
  std::string actor;    // hol
  std::set<Path> oneOf;

  static FormulaPtr make_true();
  static FormulaPtr make_false();
  static FormulaPtr negation(FormulaPtr a);
  static FormulaPtr conjunction(FormulaPtr a, FormulaPtr b);
  static FormulaPtr disjunction(FormulaPtr a, FormulaPtr b);
  static FormulaPtr implication(FormulaPtr a, FormulaPtr b);
  static FormulaPtr modal(FormulaKind k, FormulaPtr a);
  static FormulaPtr along(FormulaKind k, std::string mapName, FormulaPtr a);
  static FormulaPtr chi(long t);
  static FormulaPtr app(const Transfer& t);
  static FormulaPtr app_at(const Transfer& t, long n);
  static FormulaPtr app_last(const Transfer& t, long bound);
  static FormulaPtr hol(std::string resource, std::string actor, long t);
  static FormulaPtr phi(long t);
  static FormulaPtr bc(std::string contractId);
  static FormulaPtr one_of(std::set<Path> paths);
};

bool equal(const FormulaPtr& a, const FormulaPtr& b);

/// A monotone map between universes, with its domain and codomain.
struct MonotoneMap {
  const Universe* domain = nullptr;
  const Universe* codomain = nullptr;
  std::function<Path(const Path&)> fn;
};

/// Everything evaluation needs besides the current universe: the registry,
/// named monotone maps, the established trace for Phi atoms, and initial
/// allocations for hol.
class EvalContext {
public:
  const Universe* universe = nullptr;
  const ContractRegistry* registry = nullptr;
  const LedgerUniverse* ledgerUniverse = nullptr;  // Phi/hol context, may be null
  std::map<std::string, MonotoneMap> maps;
  mutable bool truncationSeen = false;

  const MonotoneMap& map(const std::string& name) const;
  EvalContext with_universe(const Universe* u) const;
};

bool eval_formula(const FormulaPtr& f, const Path& p, const EvalContext& ctx);

struct Interpretation {
  std::set<Path> paths;
  long depthBound = 0;
};

Interpretation interpret_formula(const FormulaPtr& f, const EvalContext& ctx,
                                 long depth);

Interpretation pushforward_exists(const MonotoneMap& m, const Interpretation& i);
Interpretation pushforward_forall(const MonotoneMap& m, const Interpretation& i);
Interpretation pullback(const MonotoneMap& m, const Interpretation& i);

/// E_t: the sub-universe of paths still possible after t records. Kept as an
/// explicit selection inside the full universe so the chain E_0 ⊇ E_1 ⊇ ... is
/// nested by construction.
struct Evolution {
  std::size_t t = 0;
  Path established;
  std::shared_ptr<const LedgerUniverse> full;
  std::shared_ptr<const ExplicitTree> universe;
};

Evolution evolution_at(const LedgerState& l, std::size_t t,
                       const ContractRegistry& registry,
                       const std::set<std::string>& contractIds, std::size_t horizon,
                       GateMode gate = GateMode::ContractGated);

struct AxiomReport {
  std::string axiom;
  bool holds = true;
  Path witness;
};

/// Evaluates the transfer axioms (no self-transfers, no transfers out of BOT,
/// nothing after a hand-over to BOT) over every enumerated path, plus
/// evolution nesting on ledger universes.
std::vector<AxiomReport> check_axioms(const EvalContext& ctx, long depth);

/// Builds an evaluation context for a ledger universe: registers, per
/// contract, the occurring maps nu_l/nu_e (into the finite labeling trees)
/// and the factorisation nu_le. The returned context owns the codomain trees.
class LedgerEvalContext {
public:
  LedgerEvalContext(std::shared_ptr<const LedgerUniverse> u);
  const EvalContext& ctx() const { return ctx_; }

private:
  std::shared_ptr<const LedgerUniverse> universe_;
  std::vector<std::shared_ptr<ExplicitTree>> owned_;
  EvalContext ctx_;
};

/// The finite labeling trees of a contract, as explicit universes.
std::set<Path> bundle_labeling_tree(const Contract& c);
std::set<Path> transfer_labeling_tree(const Contract& c);

}  // namespace cledger

#endif  // CLEDGER_LOGIC_HPP

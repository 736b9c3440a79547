#ifndef CLEDGER_AUTOMATA_HPP
#define CLEDGER_AUTOMATA_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cledger/core.hpp"

namespace cledger {

using StateId = std::string;
using ActionId = std::string;

enum class Outcome { Honoured, Breach };

struct LegalTransition {
  std::string id;
  StateId source;
  StateId target;
  std::set<ActionId> actions;  // non-empty
};

/// A contract as a strongly deterministic, acyclic finite state machine over
/// bundles of obligation-discharging actions, together with the resource-based
/// model: one transfer per action and an initial state of affairs.
struct LegalAutomaton {
  std::string id;  // contract id
  std::set<ResourceId> resources;
  EventSet events;
  std::set<std::string> actors;  // proper actor names
  std::set<StateId> states;
  StateId initial;
  std::vector<LegalTransition> transitions;
  std::map<StateId, Outcome> finals;
  std::set<ActionId> actions;
  std::set<ActionId> timeouts;
  std::map<ActionId, Transfer> rho;
  StateOfAffairs initialSoA;
};

enum class ValidationCode {
  NonDeterministic,
  TimeoutNotSingleton,
  Cyclic,
  AmbiguousCompletion,
  InconsistentRho,
  FinalHasOutgoing,
  Unreachable,
  UnknownState,
  BadTransfer,
};

struct ValidationIssue {
  ValidationCode code;
  std::string detail;
};

std::vector<ValidationIssue> validate_legal_automaton(const LegalAutomaton& a);

class InvalidContract : public std::runtime_error {
public:
  InvalidContract(std::vector<ValidationIssue> issues, const std::string& what)
      : std::runtime_error(what), issues_(std::move(issues)) {}
  const std::vector<ValidationIssue>& issues() const { return issues_; }

private:
  std::vector<ValidationIssue> issues_;
};

/// An execution-automaton state: a legal state (done empty) or partial
/// progress at `base` through the action set `done`. Prints as "v" or
/// "v/{a1,a2}".
struct ExecState {
  StateId base;
  std::set<ActionId> done;

  bool is_legal() const { return done.empty(); }
  std::string name() const;

  friend bool operator==(const ExecState& a, const ExecState& b) {
    return a.base == b.base && a.done == b.done;
  }
  friend bool operator<(const ExecState& a, const ExecState& b) {
    if (a.base != b.base) return a.base < b.base;
    return a.done < b.done;
  }
};

struct ExecTransition {
  ExecState source;
  ExecState target;
  ActionId action;
};

struct ExecAutomaton {
  ExecState initial;
  std::set<ExecState> states;
  std::vector<ExecTransition> transitions;
};

/// Construction of the execution automaton: intermediate states are the
/// nonempty subsets of the union of outgoing action sets that complete no
/// outgoing transition; each transition adds one action, and completing the
/// unique finished action set lands on its legal target.
ExecAutomaton derive_execution_automaton(const LegalAutomaton& a);

enum class Flavor { Legal, Exec };

/// A well-chained sequence of transition indices, or the empty trajectory at
/// `start`.
struct Trajectory {
  Flavor flavor = Flavor::Legal;
  std::string start;  // legal StateId, or ExecState name for exec flavor
  std::vector<std::size_t> edges;

  bool empty() const { return edges.empty(); }
  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.flavor == b.flavor && a.start == b.start && a.edges == b.edges;
  }
};

using BundleLabeling = std::vector<Bundle>;
using TransferLabeling = std::vector<Transfer>;

/// A validated contract: the legal automaton plus its derived execution
/// automaton and precomputed indexes.
class Contract {
public:
  static std::shared_ptr<const Contract> build(LegalAutomaton a);

  const std::string& id() const { return legal_.id; }
  const LegalAutomaton& legal() const { return legal_; }
  const ExecAutomaton& exec() const { return exec_; }

  /// beta(edge) = { rho(a) | a in lambda(edge) }.
  const Bundle& beta(std::size_t edgeIndex) const { return betas_[edgeIndex]; }
  const Transfer& transfer_of(const ActionId& a) const { return legal_.rho.at(a); }

  /// The action whose rho image is this transfer, if any.
  const ActionId* action_of(const std::string& transferName) const;
  bool owns_transfer(const std::string& transferName) const {
    return action_of(transferName) != nullptr;
  }

  const std::vector<std::size_t>& outgoing(const StateId& v) const;
  /// U(v): the union of the outgoing action sets of v.
  const std::set<ActionId>& action_universe(const StateId& v) const;

  StateId target_of(std::size_t edgeIndex) const {
    return legal_.transitions[edgeIndex].target;
  }

private:
  Contract() = default;
  LegalAutomaton legal_;
  ExecAutomaton exec_;
  std::vector<Bundle> betas_;
  std::map<std::string, ActionId> actionByTransferName_;
  std::map<StateId, std::vector<std::size_t>> outgoing_;
  std::map<StateId, std::set<ActionId>> universe_;
};

using ContractRegistry = std::map<std::string, std::shared_ptr<const Contract>>;

/// All trajectories from `from` (or from the initial state when initialOnly),
/// including the empty trajectory. The automaton is acyclic, so the result is
/// finite. Throws ModelError(UnknownResource) style errors for unknown states.
std::vector<Trajectory> enumerate_trajectories(const LegalAutomaton& a,
                                               const StateId& from,
                                               bool initialOnly = false);
std::vector<Trajectory> enumerate_trajectories(const ExecAutomaton& a,
                                               const ExecState& from,
                                               bool initialOnly = false);

class FlavorMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

BundleLabeling bundle_labeling(const Contract& c, const Trajectory& t);
TransferLabeling transfer_labeling(const Contract& c, const Trajectory& t);

/// True iff tl is a concatenation of permutations of bl's bundles, in order.
bool is_linearisation(const TransferLabeling& tl, const BundleLabeling& bl);

/// Folds joint application of the bundle labeling over the initial state of
/// affairs; returned as a singleton set to match gamma's signature.
/// Throws ModelError(NotJointlyApplicable) when the contract is inconsistent.
std::vector<StateOfAffairs> derive_gamma(const Contract& c, const Trajectory& t);
StateOfAffairs derive_gamma_state(const Contract& c, const Trajectory& t);

}  // namespace cledger

#endif  // CLEDGER_AUTOMATA_HPP

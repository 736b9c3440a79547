#include "cledger/automata.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace cledger {

namespace {

bool is_subset(const std::set<ActionId>& a, const std::set<ActionId>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string join(const std::set<ActionId>& s) {
  std::string out;
  for (const auto& a : s) out += (out.empty() ? "" : ",") + a;
  return out;
}

}  // namespace

std::string ExecState::name() const {
  if (done.empty()) return base;
  return base + "/{" + join(done) + "}";
}

std::vector<ValidationIssue> validate_legal_automaton(const LegalAutomaton& a) {
  std::vector<ValidationIssue> issues;
  auto add = [&](ValidationCode c, const std::string& d) {
    issues.push_back({c, d});
  };

  if (!a.states.count(a.initial))
    add(ValidationCode::UnknownState, "initial state not declared: " + a.initial);

  std::map<StateId, std::vector<std::size_t>> outgoing;
  std::map<StateId, int> incoming;
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    const auto& e = a.transitions[i];
    if (!a.states.count(e.source))
      add(ValidationCode::UnknownState, "transition " + e.id + ": unknown source " + e.source);
    if (!a.states.count(e.target))
      add(ValidationCode::UnknownState, "transition " + e.id + ": unknown target " + e.target);
    if (e.actions.empty())
      add(ValidationCode::InconsistentRho, "transition " + e.id + ": empty action set");
    outgoing[e.source].push_back(i);
    incoming[e.target]++;
    for (const auto& act : e.actions) {
      if (!a.actions.count(act))
        add(ValidationCode::InconsistentRho,
            "transition " + e.id + ": undeclared action " + act);
      if (a.timeouts.count(act) && e.actions.size() != 1)
        add(ValidationCode::TimeoutNotSingleton,
            "transition " + e.id + ": timeout " + act + " with a non-singleton label");
    }
  }

  // Strong determinism: no same-source labels in subset relation.
  for (const auto& [v, edges] : outgoing) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        const auto& e1 = a.transitions[edges[i]];
        const auto& e2 = a.transitions[edges[j]];
        if (is_subset(e1.actions, e2.actions) || is_subset(e2.actions, e1.actions))
          add(ValidationCode::NonDeterministic,
              "state " + v + ": transitions " + e1.id + " and " + e2.id +
                  " have subset-related action sets");
      }
    }
  }

  for (const auto& [v, out] : a.finals) {
    (void)out;
    if (!a.states.count(v))
      add(ValidationCode::UnknownState, "final state not declared: " + v);
    if (!outgoing[v].empty())
      add(ValidationCode::FinalHasOutgoing, "final state with outgoing transitions: " + v);
  }
  for (const auto& v : a.states) {
    if (v != a.initial && incoming[v] == 0)
      add(ValidationCode::Unreachable, "state with no incoming transitions: " + v);
  }

  // Acyclicity via colored DFS.
  {
    std::map<StateId, int> color;  // 0 white, 1 grey, 2 black
    std::vector<StateId> path;
    std::function<bool(const StateId&)> dfs = [&](const StateId& v) -> bool {
      color[v] = 1;
      path.push_back(v);
      for (auto ei : outgoing[v]) {
        const auto& tgt = a.transitions[ei].target;
        if (color[tgt] == 1) {
          std::string cyc;
          for (const auto& s : path) cyc += s + " -> ";
          add(ValidationCode::Cyclic, "cycle through " + cyc + tgt);
          return false;
        }
        if (color[tgt] == 0 && !dfs(tgt)) return false;
      }
      color[v] = 2;
      path.pop_back();
      return true;
    };
    for (const auto& v : a.states)
      if (color[v] == 0 && !dfs(v)) break;
  }

  // rho: defined and injective on used actions; beta(eta) a valid bundle.
  {
    std::map<std::string, ActionId> byName;
    for (const auto& act : a.actions) {
      auto it = a.rho.find(act);
      if (it == a.rho.end()) {
        add(ValidationCode::InconsistentRho, "no transfer for action " + act);
        continue;
      }
      if (auto err = validate_transfer(it->second, a.events))
        add(ValidationCode::BadTransfer,
            "action " + act + ": invalid transfer " + it->second.name());
      auto [pos, inserted] = byName.emplace(it->second.name(), act);
      if (!inserted)
        add(ValidationCode::InconsistentRho,
            "actions " + pos->second + " and " + act + " map to the same transfer");
    }
    for (const auto& e : a.transitions) {
      std::set<ResourceId> seen;
      for (const auto& act : e.actions) {
        auto it = a.rho.find(act);
        if (it == a.rho.end()) continue;
        if (!seen.insert(it->second.resource).second)
          add(ValidationCode::InconsistentRho,
              "transition " + e.id + ": beta repeats resource " + it->second.resource);
      }
    }
  }

  if (!issues.empty()) return issues;

  // Completion-unambiguity: over every reachable progress set X at v, no
  // single action may finish two distinct outgoing action sets at once.
  for (const auto& v : a.states) {
    const auto& edges = outgoing[v];
    if (edges.empty()) continue;
    std::set<std::set<ActionId>> seen;
    std::deque<std::set<ActionId>> queue;
    queue.push_back({});
    seen.insert({});
    std::set<ActionId> universe;
    for (auto ei : edges)
      universe.insert(a.transitions[ei].actions.begin(), a.transitions[ei].actions.end());
    while (!queue.empty()) {
      auto X = queue.front();
      queue.pop_front();
      for (const auto& act : universe) {
        if (X.count(act)) continue;
        auto X2 = X;
        X2.insert(act);
        std::vector<std::string> completed;
        for (auto ei : edges)
          if (is_subset(a.transitions[ei].actions, X2))
            completed.push_back(a.transitions[ei].id);
        if (completed.size() > 1) {
          add(ValidationCode::AmbiguousCompletion,
              "state " + v + ", progress {" + join(X) + "}: action " + act +
                  " completes transitions " + completed[0] + " and " + completed[1]);
        } else if (completed.empty() && seen.insert(X2).second) {
          queue.push_back(X2);
        }
      }
    }
  }

  return issues;
}

ExecAutomaton derive_execution_automaton(const LegalAutomaton& a) {
  auto issues = validate_legal_automaton(a);
  if (!issues.empty())
    throw InvalidContract(issues, "cannot derive execution automaton: " +
                                      issues.front().detail);

  std::map<StateId, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < a.transitions.size(); ++i)
    outgoing[a.transitions[i].source].push_back(i);

  ExecAutomaton out;
  out.initial = ExecState{a.initial, {}};
  for (const auto& v : a.states) out.states.insert(ExecState{v, {}});

  for (const auto& v : a.states) {
    const auto& edges = outgoing[v];
    if (edges.empty()) continue;
    std::set<ActionId> universe;
    for (auto ei : edges)
      universe.insert(a.transitions[ei].actions.begin(), a.transitions[ei].actions.end());

    auto completes = [&](const std::set<ActionId>& X) -> const LegalTransition* {
      for (auto ei : edges)
        if (is_subset(a.transitions[ei].actions, X)) return &a.transitions[ei];
      return nullptr;
    };

    // Intermediate states: nonempty subsets of U(v) completing no transition.
    std::vector<std::set<ActionId>> subsets = {{}};
    for (const auto& act : universe) {
      std::size_t n = subsets.size();
      for (std::size_t i = 0; i < n; ++i) {
        auto X = subsets[i];
        X.insert(act);
        subsets.push_back(std::move(X));
      }
    }
    for (const auto& X : subsets)
      if (!X.empty() && !completes(X)) out.states.insert(ExecState{v, X});

    for (const auto& X : subsets) {
      if (completes(X)) continue;  // not an exec state at v
      for (const auto& act : universe) {
        if (X.count(act)) continue;
        auto X2 = X;
        X2.insert(act);
        if (const auto* e = completes(X2)) {
          out.transitions.push_back(
              {ExecState{v, X}, ExecState{e->target, {}}, act});
        } else {
          out.transitions.push_back({ExecState{v, X}, ExecState{v, X2}, act});
        }
      }
    }
  }
  return out;
}

std::shared_ptr<const Contract> Contract::build(LegalAutomaton a) {
  auto issues = validate_legal_automaton(a);
  if (!issues.empty()) {
    std::ostringstream what;
    what << "invalid contract " << a.id << ":";
    for (const auto& i : issues) what << "\n  - " << i.detail;
    throw InvalidContract(std::move(issues), what.str());
  }
  auto c = std::shared_ptr<Contract>(new Contract());
  c->legal_ = std::move(a);
  c->exec_ = derive_execution_automaton(c->legal_);
  for (std::size_t i = 0; i < c->legal_.transitions.size(); ++i) {
    const auto& e = c->legal_.transitions[i];
    std::vector<Transfer> members;
    for (const auto& act : e.actions) members.push_back(c->legal_.rho.at(act));
    c->betas_.emplace_back(std::move(members));
    c->outgoing_[e.source].push_back(i);
    c->universe_[e.source].insert(e.actions.begin(), e.actions.end());
  }
  for (const auto& [act, t] : c->legal_.rho)
    c->actionByTransferName_.emplace(t.name(), act);
  return c;
}

const ActionId* Contract::action_of(const std::string& transferName) const {
  auto it = actionByTransferName_.find(transferName);
  return it == actionByTransferName_.end() ? nullptr : &it->second;
}

const std::vector<std::size_t>& Contract::outgoing(const StateId& v) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = outgoing_.find(v);
  return it == outgoing_.end() ? kEmpty : it->second;
}

const std::set<ActionId>& Contract::action_universe(const StateId& v) const {
  static const std::set<ActionId> kEmpty;
  auto it = universe_.find(v);
  return it == universe_.end() ? kEmpty : it->second;
}

std::vector<Trajectory> enumerate_trajectories(const LegalAutomaton& a,
                                               const StateId& from,
                                               bool initialOnly) {
  const StateId start = initialOnly ? a.initial : from;
  if (!a.states.count(start))
    throw ModelError(Errc::UnknownResource, "unknown state: " + start);
  std::map<StateId, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < a.transitions.size(); ++i)
    outgoing[a.transitions[i].source].push_back(i);

  std::vector<Trajectory> result;
  std::vector<std::size_t> edges;
  std::function<void(const StateId&)> dfs = [&](const StateId& v) {
    result.push_back(Trajectory{Flavor::Legal, start, edges});
    for (auto ei : outgoing[v]) {
      edges.push_back(ei);
      dfs(a.transitions[ei].target);
      edges.pop_back();
    }
  };
  dfs(start);
  return result;
}

std::vector<Trajectory> enumerate_trajectories(const ExecAutomaton& a,
                                               const ExecState& from,
                                               bool initialOnly) {
  const ExecState start = initialOnly ? a.initial : from;
  if (!a.states.count(start))
    throw ModelError(Errc::UnknownResource, "unknown exec state: " + start.name());
  std::map<std::string, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < a.transitions.size(); ++i)
    outgoing[a.transitions[i].source.name()].push_back(i);

  std::vector<Trajectory> result;
  std::vector<std::size_t> edges;
  std::function<void(const ExecState&)> dfs = [&](const ExecState& v) {
    result.push_back(Trajectory{Flavor::Exec, start.name(), edges});
    for (auto ei : outgoing[v.name()]) {
      edges.push_back(ei);
      dfs(a.transitions[ei].target);
      edges.pop_back();
    }
  };
  dfs(start);
  return result;
}

BundleLabeling bundle_labeling(const Contract& c, const Trajectory& t) {
  if (t.flavor != Flavor::Legal)
    throw FlavorMismatch("bundle labeling requires a legal trajectory");
  BundleLabeling out;
  for (auto ei : t.edges) out.push_back(c.beta(ei));
  return out;
}

TransferLabeling transfer_labeling(const Contract& c, const Trajectory& t) {
  if (t.flavor != Flavor::Exec)
    throw FlavorMismatch("transfer labeling requires an exec trajectory");
  TransferLabeling out;
  for (auto ei : t.edges)
    out.push_back(c.transfer_of(c.exec().transitions[ei].action));
  return out;
}

bool is_linearisation(const TransferLabeling& tl, const BundleLabeling& bl) {
  std::size_t pos = 0;
  for (const auto& b : bl) {
    if (pos + b.size() > tl.size()) return false;
    std::vector<Transfer> segment(tl.begin() + pos, tl.begin() + pos + b.size());
    std::sort(segment.begin(), segment.end());
    std::vector<Transfer> members = b.transfers();
    std::sort(members.begin(), members.end());
    if (segment != members) return false;
    pos += b.size();
  }
  return pos == tl.size();
}

StateOfAffairs derive_gamma_state(const Contract& c, const Trajectory& t) {
  if (t.flavor != Flavor::Legal)
    throw FlavorMismatch("gamma is defined on legal trajectories");
  StateOfAffairs s = c.legal().initialSoA;
  for (auto ei : t.edges) s = apply_bundle(c.beta(ei), s);
  return s;
}

std::vector<StateOfAffairs> derive_gamma(const Contract& c, const Trajectory& t) {
  return {derive_gamma_state(c, t)};
}

}  // namespace cledger

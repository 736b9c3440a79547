#include "cledger/occurrence.hpp"

#include <algorithm>

namespace cledger {

OccurrenceScan scan_transfers(const Contract& c, const std::vector<Transfer>& seq) {
  OccurrenceScan scan;
  StateId v = c.legal().initial;
  // Open segment: actions discharged since arriving at v, with their positions.
  std::vector<std::pair<ActionId, std::size_t>> segment;

  auto segment_actions = [&]() {
    std::set<ActionId> acts;
    for (const auto& [a, _] : segment) acts.insert(a);
    return acts;
  };

  for (std::size_t i = 0; i < seq.size(); ++i) {
    const ActionId* action = c.action_of(seq[i].name());
    const auto& universe = c.action_universe(v);
    if (!action || !universe.count(*action)) {
      scan.useless.push_back(i);  // can never contribute from the current state
      continue;
    }
    auto acts = segment_actions();
    if (acts.count(*action)) {
      scan.useless.push_back(i);  // re-send: the bundle needs each member once
      continue;
    }
    segment.emplace_back(*action, i);
    scan.accepted.push_back(seq[i]);
    scan.acceptedIndices.push_back(i);

    acts.insert(*action);
    const LegalTransition* fired = nullptr;
    std::size_t firedIdx = 0;
    for (auto ei : c.outgoing(v)) {
      const auto& label = c.legal().transitions[ei].actions;
      if (std::includes(acts.begin(), acts.end(), label.begin(), label.end())) {
        fired = &c.legal().transitions[ei];
        firedIdx = ei;
        break;  // unique by the AmbiguousCompletion validation
      }
    }
    if (fired) {
      scan.bundles.push_back(c.beta(firedIdx));
      for (const auto& [a, pos] : segment) {
        if (fired->actions.count(a))
          scan.useful.push_back(pos);
        else
          scan.useless.push_back(pos);  // orphaned progress toward other bundles
      }
      segment.clear();
      v = fired->target;
    }
  }

  scan.legalState = v;
  std::set<ActionId> open;
  for (const auto& [a, pos] : segment) {
    open.insert(a);
    scan.pending.push_back(pos);
  }
  scan.execState = ExecState{v, open};
  for (auto ei : c.outgoing(v)) {
    const auto& e = c.legal().transitions[ei];
    std::set<ActionId> done;
    for (const auto& a : open)
      if (e.actions.count(a)) done.insert(a);
    if (!done.empty()) scan.inProgress.emplace(e.id, std::move(done));
  }
  std::sort(scan.useless.begin(), scan.useless.end());
  return scan;
}

OccurrenceResult occurring_map(const LedgerState& l, const Contract& c, View view) {
  auto scan = scan_transfers(c, contract_trace(l, c));
  OccurrenceResult out;
  out.view = view;
  if (view == View::Legal)
    out.bundleLabeling = std::move(scan.bundles);
  else
    out.transferLabeling = std::move(scan.accepted);
  out.reachedState = view == View::Legal ? scan.legalState : scan.execState.name();
  out.usefulIndices = std::move(scan.useful);
  out.uselessIndices = std::move(scan.useless);
  out.pendingIndices = std::move(scan.pending);
  out.inProgress = std::move(scan.inProgress);
  return out;
}

BundleLabeling factorise(const TransferLabeling& tl, const Contract& c) {
  auto scan = scan_transfers(c, tl);
  if (scan.acceptedIndices.size() != tl.size())
    throw NotAnInitialLabeling(
        "sequence is not a prefix of an initial transfer trajectory-labeling");
  return scan.bundles;
}

bool is_bundle_complete_seq(const std::vector<Transfer>& seq, const Contract& c) {
  std::vector<Transfer> projection;
  for (const auto& t : seq)
    if (c.owns_transfer(t.name())) projection.push_back(t);
  if (projection.empty()) return true;  // vacuous: no proper prefix to differ from
  auto whole = scan_transfers(c, projection).bundles;
  projection.pop_back();
  auto pred = scan_transfers(c, projection).bundles;
  return whole.size() != pred.size();
}

bool is_bundle_complete(const LedgerState& l, const Contract& c) {
  return is_bundle_complete_seq(contract_trace(l, c), c);
}

SafetyReport check_contract_safety_seq(const std::vector<Transfer>& seq,
                                       const Contract& c) {
  auto bundleRep = check_safety_seq(seq, c, SafetyLevel::Bundle);
  if (!bundleRep.safe)
    return SafetyReport{SafetyLevel::Contract, false, bundleRep.witness};
  auto scan = scan_transfers(c, seq);
  if (scan.acceptedIndices.size() != seq.size()) {
    // First position the execution automaton could not take.
    std::size_t bad = 0;
    std::set<std::size_t> accepted(scan.acceptedIndices.begin(),
                                   scan.acceptedIndices.end());
    while (accepted.count(bad)) ++bad;
    SafetyWitness w;
    w.indices = {bad};
    w.resource = bad < seq.size() ? seq[bad].resource : "";
    w.expected = "a transfer advancing the execution automaton from " +
                 scan.execState.name();
    w.actual = bad < seq.size() ? seq[bad].name() : "";
    w.message = "trace is not a prefix of any initial transfer trajectory-labeling";
    return SafetyReport{SafetyLevel::Contract, false, w};
  }
  return SafetyReport{SafetyLevel::Contract, true, std::nullopt};
}

}  // namespace cledger

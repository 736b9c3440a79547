#ifndef CLEDGER_OCCURRENCE_HPP
#define CLEDGER_OCCURRENCE_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cledger/automata.hpp"
#include "cledger/ledger.hpp"

namespace cledger {

enum class View { Legal, Exec };

/// Result of the left-to-right occurrence scan of a transfer sequence against
/// a contract.
///
/// Index classification (positions into the scanned sequence):
///   - useful: part of a completed bundle,
///   - useless: rejected, or progress orphaned when a different bundle fired,
///   - pending: progress toward a bundle outgoing from the current state.
/// The accepted sequence (useful + pending + orphaned progress, in order) is
/// the transfer labeling of the maximal execution trajectory embedded in the
/// input; the emitted bundles are the bundle labeling of the underlying legal
/// trajectory.
struct OccurrenceScan {
  BundleLabeling bundles;
  TransferLabeling accepted;
  std::vector<std::size_t> acceptedIndices;  // positions of `accepted` members
  StateId legalState;
  ExecState execState;
  std::vector<std::size_t> useful;
  std::vector<std::size_t> useless;
  std::vector<std::size_t> pending;
  /// Progress per outgoing transition of the reached legal state
  /// (transition id -> actions already discharged).
  std::map<std::string, std::set<ActionId>> inProgress;
};

OccurrenceScan scan_transfers(const Contract& c, const std::vector<Transfer>& seq);

struct OccurrenceResult {
  View view;
  /// Legal view: the bundle occurring map's value. Exec view: empty.
  BundleLabeling bundleLabeling;
  /// Exec view: the transfer occurring map's value (includes partial
  /// progress). Legal view: empty.
  TransferLabeling transferLabeling;
  std::string reachedState;  // legal StateId or ExecState name
  std::vector<std::size_t> usefulIndices;
  std::vector<std::size_t> uselessIndices;
  std::vector<std::size_t> pendingIndices;
  std::map<std::string, std::set<ActionId>> inProgress;
};

/// nu^l / nu^e: extracts the maximal initial labeling embedded in the
/// ledger's projection onto the contract. Total on dirty traces; useless
/// records are skipped, never an error.
OccurrenceResult occurring_map(const LedgerState& l, const Contract& c, View view);

class NotAnInitialLabeling : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// nu^l_e: the bundle labeling of the legal trajectory underlying the exec
/// trajectory labeled by tl. Requires tl in PREF(L^{rho,in}).
BundleLabeling factorise(const TransferLabeling& tl, const Contract& c);

/// bc: true iff the last contract-relevant record completes a bundle.
/// Vacuously true on an empty projection.
bool is_bundle_complete(const LedgerState& l, const Contract& c);
bool is_bundle_complete_seq(const std::vector<Transfer>& seq, const Contract& c);

}  // namespace cledger

#endif  // CLEDGER_OCCURRENCE_HPP

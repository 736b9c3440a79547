#ifndef CLEDGER_LEDGER_HPP
#define CLEDGER_LEDGER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cledger/automata.hpp"
#include "cledger/core.hpp"

namespace cledger {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(const std::string& bytes);

inline const std::string kGenesisHash(64, '0');

/// One encoded transfer. The canonical serialization is a single JSON line
/// with keys in fixed order: index, contract, resource, from, to, timestamp,
/// validator, prev_hash. Those exact bytes are what the next record's
/// prev_hash digests.
struct TransferRecord {
  std::uint64_t index = 0;
  std::string contract;
  Transfer transfer;
  std::string timestamp;  // RFC-3339 UTC, seconds precision
  std::string validator;
  std::string prevHash;   // 64 lowercase hex chars; all-zero for index 0

  std::string canonical_line() const;
};

enum class AppendMode { Strict, Permissive };

struct AppendMeta {
  std::string timestamp = "1970-01-01T00:00:00Z";
  std::string validator = "";
};

class LedgerError : public std::runtime_error {
public:
  enum class Code { ResourceSafetyViolation, UnknownContract, ParseError, BadTimestamp };
  LedgerError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

private:
  Code code_;
};

/// An append-only hash-chained sequence of transfer records. Values are
/// immutable snapshots; append returns a new state.
class LedgerState {
public:
  LedgerState() = default;

  const std::vector<TransferRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::string serialize() const;  // one canonical line per record
  static LedgerState parse(const std::string& text);  // throws ParseError

private:
  friend LedgerState append_record(const LedgerState&, const std::string&,
                                   const Transfer&, const AppendMeta&, AppendMode,
                                   const ContractRegistry*);
  std::vector<TransferRecord> records_;
};

/// Appends one record, computing prev_hash from the previous record's
/// canonical bytes. In strict mode the append is gated on resource-safeness
/// of the (contract, resource) projection and, when a registry is given, on
/// the contract being registered and the transfer well-formed.
LedgerState append_record(const LedgerState& l, const std::string& contractId,
                          const Transfer& t, const AppendMeta& meta,
                          AppendMode mode = AppendMode::Strict,
                          const ContractRegistry* registry = nullptr);

/// nullopt when the chain verifies; otherwise the first bad index.
std::optional<std::size_t> verify_chain(const LedgerState& l);

std::vector<TransferRecord> project_by_contract(const LedgerState& l,
                                                const std::string& contractId);
std::vector<TransferRecord> project_by_resource(const LedgerState& l,
                                                const ResourceId& r);

/// The contract projection as plain transfers.
std::vector<Transfer> contract_trace(const LedgerState& l, const Contract& c);

enum class SafetyLevel { Resource, Wallet, Bundle, Contract };

struct SafetyWitness {
  std::vector<std::size_t> indices;  // positions in the contract projection
  ResourceId resource;
  std::string expected;
  std::string actual;
  std::string message;
};

struct SafetyReport {
  SafetyLevel level;
  bool safe = true;
  std::optional<SafetyWitness> witness;
};

/// The four nested conformance levels. Resource level requires the resource
/// argument; the others ignore it.
SafetyReport check_safety(const LedgerState& l, const Contract& c, SafetyLevel level,
                          const std::optional<ResourceId>& resource = std::nullopt);

/// Safety of a bare transfer sequence (used on projections and by oracles).
SafetyReport check_safety_seq(const std::vector<Transfer>& seq, const Contract& c,
                              SafetyLevel level,
                              const std::optional<ResourceId>& resource = std::nullopt);

}  // namespace cledger

#endif  // CLEDGER_LEDGER_HPP

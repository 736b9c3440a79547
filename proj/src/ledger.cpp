#include "cledger/ledger.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace cledger {

// Defined in occurrence.cpp; needs the execution-automaton scan.
SafetyReport check_contract_safety_seq(const std::vector<Transfer>& seq,
                                       const Contract& c);

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string TransferRecord::canonical_line() const {
  nlohmann::ordered_json j;
  j["index"] = index;
  j["contract"] = contract;
  j["resource"] = transfer.resource;
  j["from"] = transfer.from.str();
  j["to"] = transfer.to.str();
  j["timestamp"] = timestamp;
  j["validator"] = validator;
  j["prev_hash"] = prevHash;
  return j.dump();
}

std::string LedgerState::serialize() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.canonical_line();
    out += '\n';
  }
  return out;
}

LedgerState LedgerState::parse(const std::string& text) {
  LedgerState out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw LedgerError(LedgerError::Code::ParseError,
                        "record " + std::to_string(lineNo) + ": " + e.what());
    }
    TransferRecord r;
    try {
      r.index = j.at("index").get<std::uint64_t>();
      r.contract = j.at("contract").get<std::string>();
      r.transfer.resource = j.at("resource").get<std::string>();
      r.transfer.from = ActorId::parse(j.at("from").get<std::string>());
      r.transfer.to = ActorId::parse(j.at("to").get<std::string>());
      r.timestamp = j.at("timestamp").get<std::string>();
      r.validator = j.at("validator").get<std::string>();
      r.prevHash = j.at("prev_hash").get<std::string>();
    } catch (const std::exception& e) {
      throw LedgerError(LedgerError::Code::ParseError,
                        "record " + std::to_string(lineNo) + ": " + e.what());
    }
    if (r.canonical_line() != line)
      throw LedgerError(LedgerError::Code::ParseError,
                        "record " + std::to_string(lineNo) + ": not in canonical form");
    if (r.index != lineNo)
      throw LedgerError(LedgerError::Code::ParseError,
                        "record " + std::to_string(lineNo) + ": index not contiguous");
    out.records_.push_back(std::move(r));
    ++lineNo;
  }
  return out;
}

namespace {

const std::regex kTimestampRe(R"(^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$)");

bool valid_hash(const std::string& h) {
  if (h.size() != 64) return false;
  return std::all_of(h.begin(), h.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f');
  });
}

}  // namespace

LedgerState append_record(const LedgerState& l, const std::string& contractId,
                          const Transfer& t, const AppendMeta& meta, AppendMode mode,
                          const ContractRegistry* registry) {
  if (!std::regex_match(meta.timestamp, kTimestampRe))
    throw LedgerError(LedgerError::Code::BadTimestamp,
                      "timestamp must be RFC-3339 UTC with seconds precision: " +
                          meta.timestamp);

  if (mode == AppendMode::Strict) {
    const Contract* contract = nullptr;
    if (registry) {
      auto it = registry->find(contractId);
      if (it == registry->end())
        throw LedgerError(LedgerError::Code::UnknownContract,
                          "unknown contract: " + contractId);
      contract = it->second.get();
      if (auto err = validate_transfer(t, contract->legal().events)) {
        (void)err;
        throw LedgerError(LedgerError::Code::ResourceSafetyViolation,
                          "ill-formed transfer for contract " + contractId + ": " +
                              t.name());
      }
    }
    // Resource-safeness gate: the new record must extend the hand-over chain
    // of its resource within the contract projection.
    const TransferRecord* last = nullptr;
    for (const auto& r : l.records())
      if (r.contract == contractId && r.transfer.resource == t.resource) last = &r;
    if (last) {
      if (!(last->transfer.to == t.from))
        throw LedgerError(LedgerError::Code::ResourceSafetyViolation,
                          "resource " + t.resource + " is held by " +
                              last->transfer.to.str() + ", not " + t.from.str());
    } else if (contract && contract->legal().resources.count(t.resource)) {
      const auto& holder = contract->legal().initialSoA.holder(t.resource);
      if (!(holder == t.from))
        throw LedgerError(LedgerError::Code::ResourceSafetyViolation,
                          "resource " + t.resource + " starts at " + holder.str() +
                              ", not " + t.from.str());
    }
  }

  LedgerState out = l;
  TransferRecord r;
  r.index = l.size();
  r.contract = contractId;
  r.transfer = t;
  r.timestamp = meta.timestamp;
  r.validator = meta.validator;
  r.prevHash = l.empty() ? kGenesisHash : sha256_hex(l.records().back().canonical_line());
  out.records_.push_back(std::move(r));
  return out;
}

std::optional<std::size_t> verify_chain(const LedgerState& l) {
  for (std::size_t i = 0; i < l.size(); ++i) {
    const auto& r = l.records()[i];
    if (!valid_hash(r.prevHash)) return i;
    const std::string expected =
        i == 0 ? kGenesisHash : sha256_hex(l.records()[i - 1].canonical_line());
    if (r.prevHash != expected) return i;
  }
  return std::nullopt;
}

std::vector<TransferRecord> project_by_contract(const LedgerState& l,
                                                const std::string& contractId) {
  std::vector<TransferRecord> out;
  for (const auto& r : l.records())
    if (r.contract == contractId) out.push_back(r);
  return out;
}

std::vector<TransferRecord> project_by_resource(const LedgerState& l,
                                                const ResourceId& res) {
  std::vector<TransferRecord> out;
  for (const auto& r : l.records())
    if (r.transfer.resource == res) out.push_back(r);
  return out;
}

std::vector<Transfer> contract_trace(const LedgerState& l, const Contract& c) {
  std::vector<Transfer> out;
  for (const auto& r : l.records())
    if (r.contract == c.id()) out.push_back(r.transfer);
  return out;
}

namespace {

SafetyReport resource_safety(const std::vector<Transfer>& seq, const Contract& c,
                             const ResourceId& res, SafetyLevel reportedLevel) {
  SafetyReport report{reportedLevel, true, std::nullopt};
  std::optional<ActorId> holder;
  if (c.legal().resources.count(res)) holder = c.legal().initialSoA.holder(res);
  std::optional<std::size_t> prevIdx;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].resource != res) continue;
    if (holder && !(seq[i].from == *holder)) {
      SafetyWitness w;
      if (prevIdx) w.indices.push_back(*prevIdx);
      w.indices.push_back(i);
      w.resource = res;
      w.expected = holder->str();
      w.actual = seq[i].from.str();
      w.message = "hand-over chain broken for " + res + " at position " +
                  std::to_string(i);
      return SafetyReport{reportedLevel, false, w};
    }
    holder = seq[i].to;
    prevIdx = i;
  }
  return report;
}

}  // namespace

SafetyReport check_safety_seq(const std::vector<Transfer>& seq, const Contract& c,
                              SafetyLevel level,
                              const std::optional<ResourceId>& resource) {
  switch (level) {
    case SafetyLevel::Resource: {
      if (!resource)
        throw ModelError(Errc::UnknownResource,
                         "resource-level safety needs a resource argument");
      return resource_safety(seq, c, *resource, SafetyLevel::Resource);
    }
    case SafetyLevel::Wallet: {
      std::set<ResourceId> resources = c.legal().resources;
      for (const auto& t : seq) resources.insert(t.resource);
      for (const auto& r : resources) {
        auto rep = resource_safety(seq, c, r, SafetyLevel::Wallet);
        if (!rep.safe) return rep;
      }
      return SafetyReport{SafetyLevel::Wallet, true, std::nullopt};
    }
    case SafetyLevel::Bundle: {
      auto wallet = check_safety_seq(seq, c, SafetyLevel::Wallet);
      if (!wallet.safe) return SafetyReport{SafetyLevel::Bundle, false, wallet.witness};
      for (std::size_t b = 0; b < c.legal().transitions.size(); ++b) {
        const Bundle& bundle = c.beta(b);
        for (std::size_t i = 0; i < seq.size(); ++i) {
          if (!bundle.contains(seq[i])) continue;
          for (std::size_t j = i + 1; j < seq.size(); ++j) {
            if (seq[j].resource != seq[i].resource) continue;
            // Next transfer of this resource: the whole bundle must already
            // be encoded strictly before it.
            for (const auto& member : bundle) {
              bool found = false;
              for (std::size_t k = 0; k < j; ++k)
                if (seq[k] == member) { found = true; break; }
              if (!found) {
                SafetyWitness w;
                w.indices = {i, j};
                w.resource = seq[i].resource;
                w.expected = "bundle " + bundle.name() + " completed before position " +
                             std::to_string(j);
                w.actual = "member " + member.name() + " missing";
                w.message = "transactionality violated for " + bundle.name();
                return SafetyReport{SafetyLevel::Bundle, false, w};
              }
            }
            break;  // only the next transfer of the resource is constrained
          }
        }
      }
      return SafetyReport{SafetyLevel::Bundle, true, std::nullopt};
    }
    case SafetyLevel::Contract:
      break;
  }
  return check_contract_safety_seq(seq, c);
}

SafetyReport check_safety(const LedgerState& l, const Contract& c, SafetyLevel level,
                          const std::optional<ResourceId>& resource) {
  return check_safety_seq(contract_trace(l, c), c, level, resource);
}

}  // namespace cledger

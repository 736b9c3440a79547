#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cledger/query.hpp"

namespace {

using namespace cledger;

struct Output {
  std::string command;
  bool json = false;
  std::string verdict;
  std::vector<std::string> witnesses;
  bool truncated = false;

  int finish(int code) const {
    if (json) {
      nlohmann::ordered_json j;
      j["command"] = command;
      j["verdict"] = verdict;
      j["witnesses"] = witnesses;
      j["truncated_at_horizon"] = truncated;
      std::cout << j.dump() << "\n";
    } else {
      std::cout << verdict << "\n";
      for (const auto& w : witnesses) std::cout << "  " << w << "\n";
      if (truncated) std::cout << "  (result truncated at horizon)\n";
    }
    return code;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

LedgerState load_ledger(const std::string& path) {
  return LedgerState::parse(read_file(path));
}

ContractRegistry load_registry(const std::vector<std::string>& specFiles) {
  ContractRegistry reg;
  for (const auto& f : specFiles) {
    auto c = load_contract_spec_file(f);
    reg.emplace(c->id(), c);
  }
  return reg;
}

std::string safety_name(SafetyLevel level) {
  switch (level) {
    case SafetyLevel::Resource: return "resource";
    case SafetyLevel::Wallet: return "wallet";
    case SafetyLevel::Bundle: return "bundle";
    case SafetyLevel::Contract: return "contract";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contract-aware hash-chained ledger toolkit"};
  app.require_subcommand(1);
  bool jsonOut = false;
  app.add_flag("--json", jsonOut, "machine-readable output");

  // ledger init / append / verify / check
  auto* ledgerCmd = app.add_subcommand("ledger", "ledger file operations");
  ledgerCmd->require_subcommand(1);

  std::string file;
  auto* initCmd = ledgerCmd->add_subcommand("init", "create an empty ledger file");
  initCmd->add_option("file", file)->required();

  std::string apContract, apResource, apFrom, apTo;
  std::string apTimestamp = "1970-01-01T00:00:00Z", apValidator;
  bool apPermissive = false;
  std::vector<std::string> apSpecs;
  auto* appendCmd = ledgerCmd->add_subcommand("append", "append one transfer record");
  appendCmd->add_option("file", file)->required();
  appendCmd->add_option("--contract", apContract)->required();
  appendCmd->add_option("--resource", apResource)->required();
  appendCmd->add_option("--from", apFrom)->required();
  appendCmd->add_option("--to", apTo)->required();
  appendCmd->add_option("--timestamp", apTimestamp);
  appendCmd->add_option("--validator", apValidator);
  appendCmd->add_flag("--permissive", apPermissive, "skip the strict-append gates");
  appendCmd->add_option("--spec", apSpecs, "contract spec JSON (repeatable)");

  auto* verifyCmd = ledgerCmd->add_subcommand("verify", "verify the hash chain");
  verifyCmd->add_option("file", file)->required();

  std::string ckContract, ckProperty, ckResource;
  std::vector<std::string> ckSpecs;
  auto* checkCmd = ledgerCmd->add_subcommand("check", "check a conformance property");
  checkCmd->add_option("file", file)->required();
  checkCmd->add_option("--contract", ckContract)->required();
  checkCmd->add_option("--spec", ckSpecs, "contract spec JSON (repeatable)")->required();
  checkCmd->add_option("--property", ckProperty)
      ->required()
      ->check(CLI::IsMember({"resource", "wallet", "bundle", "contract"}));
  checkCmd->add_option("--resource", ckResource, "resource for --property resource");

  // contract add / state
  auto* contractCmd = app.add_subcommand("contract", "contract spec operations");
  contractCmd->require_subcommand(1);

  std::string specFile;
  auto* addCmd = contractCmd->add_subcommand("add", "validate a contract spec");
  addCmd->add_option("spec", specFile)->required();

  std::string stContract;
  std::vector<std::string> stSpecs;
  long stAt = -1;
  auto* stateCmd = contractCmd->add_subcommand("state", "reached contract state");
  stateCmd->add_option("file", file)->required();
  stateCmd->add_option("--contract", stContract)->required();
  stateCmd->add_option("--spec", stSpecs)->required();
  stateCmd->add_option("--at", stAt, "ledger step (default: whole ledger)");

  // query eval
  std::string queryText;
  std::vector<std::string> quSpecs;
  std::vector<std::string> quContracts;
  long quAt = -1;
  std::size_t quHorizon = 6;
  std::string quGate = "contract";
  auto* queryCmd = app.add_subcommand("query", "temporal queries");
  auto* evalCmd = queryCmd->add_subcommand("eval", "evaluate a formula");
  evalCmd->add_option("file", file)->required();
  evalCmd->add_option("formula", queryText)->required();
  evalCmd->add_option("--spec", quSpecs)->required();
  evalCmd->add_option("--contract", quContracts, "contract ids (default: all specs)");
  evalCmd->add_option("--at", quAt, "ledger step (default: whole ledger)");
  evalCmd->add_option("--horizon", quHorizon, "future bound in steps");
  evalCmd->add_option("--gate", quGate)->check(CLI::IsMember({"resource", "contract"}));

  // audit pattern
  std::string auFirst, auThen;
  auto* auditCmd = app.add_subcommand("audit", "trace pattern reports");
  auto* patternCmd = auditCmd->add_subcommand("pattern", "first-then transfer pairs");
  patternCmd->add_option("file", file)->required();
  patternCmd->add_option("--first", auFirst, "transfer name (r,from,to)")->required();
  patternCmd->add_option("--then", auThen, "transfer name (r,from,to)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Output out;
  out.json = jsonOut;
  try {
    if (initCmd->parsed()) {
      out.command = "ledger init";
      std::ofstream f(file);
      if (!f) throw std::runtime_error("cannot open " + file);
      f << LedgerState().serialize();
      out.verdict = "initialized " + file;
      return out.finish(0);
    }
    if (appendCmd->parsed()) {
      out.command = "ledger append";
      auto l = load_ledger(file);
      auto reg = load_registry(apSpecs);
      Transfer t{apResource, ActorId::parse(apFrom), ActorId::parse(apTo)};
      AppendMeta meta{apTimestamp, apValidator};
      auto next = append_record(l, apContract, t, meta,
                                apPermissive ? AppendMode::Permissive
                                             : AppendMode::Strict,
                                apSpecs.empty() ? nullptr : &reg);
      std::ofstream f(file);
      if (!f) throw std::runtime_error("cannot open " + file);
      f << next.serialize();
      out.verdict = "appended record " + std::to_string(next.size() - 1);
      return out.finish(0);
    }
    if (verifyCmd->parsed()) {
      out.command = "ledger verify";
      LedgerState l;
      try {
        l = load_ledger(file);
      } catch (const LedgerError& e) {
        out.verdict = std::string("invalid ledger: ") + e.what();
        return out.finish(1);
      }
      auto bad = verify_chain(l);
      if (bad) {
        out.verdict = "chain broken at index " + std::to_string(*bad);
        return out.finish(1);
      }
      out.verdict = "chain verified (" + std::to_string(l.size()) + " records)";
      return out.finish(0);
    }
    if (checkCmd->parsed()) {
      out.command = "ledger check";
      auto l = load_ledger(file);
      auto reg = load_registry(ckSpecs);
      auto it = reg.find(ckContract);
      if (it == reg.end()) throw std::runtime_error("unknown contract: " + ckContract);
      SafetyLevel level = ckProperty == "resource" ? SafetyLevel::Resource
                          : ckProperty == "wallet" ? SafetyLevel::Wallet
                          : ckProperty == "bundle" ? SafetyLevel::Bundle
                                                   : SafetyLevel::Contract;
      std::optional<ResourceId> res;
      if (level == SafetyLevel::Resource) {
        if (ckResource.empty())
          throw CLI::ValidationError("--resource is required for --property resource");
        res = ckResource;
      }
      auto rep = check_safety(l, *it->second, level, res);
      if (rep.safe) {
        out.verdict = safety_name(level) + "-safe";
        return out.finish(0);
      }
      out.verdict = "not " + safety_name(level) + "-safe";
      if (rep.witness) {
        out.witnesses.push_back(rep.witness->message);
        std::string idx = "positions:";
        for (auto i : rep.witness->indices) idx += " " + std::to_string(i);
        out.witnesses.push_back(idx);
      }
      return out.finish(1);
    }
    if (addCmd->parsed()) {
      out.command = "contract add";
      auto c = load_contract_spec_file(specFile);
      out.verdict = "contract " + c->id() + " valid (" +
                    std::to_string(c->legal().states.size()) + " states, " +
                    std::to_string(c->legal().transitions.size()) + " transitions)";
      return out.finish(0);
    }
    if (stateCmd->parsed()) {
      out.command = "contract state";
      auto l = load_ledger(file);
      auto reg = load_registry(stSpecs);
      auto it = reg.find(stContract);
      if (it == reg.end()) throw std::runtime_error("unknown contract: " + stContract);
      std::optional<std::size_t> at;
      if (stAt >= 0) at = static_cast<std::size_t>(stAt);
      auto ans = contract_state_at(l, *it->second, at);
      out.verdict = "legal: " + ans.legalState + "; exec: " + ans.execState;
      if (ans.outcome)
        out.witnesses.push_back(*ans.outcome == Outcome::Honoured ? "HON" : "BRC");
      return out.finish(0);
    }
    if (evalCmd->parsed()) {
      out.command = "query eval";
      auto l = load_ledger(file);
      auto reg = load_registry(quSpecs);
      std::set<std::string> cids(quContracts.begin(), quContracts.end());
      if (cids.empty())
        for (const auto& [cid, _] : reg) cids.insert(cid);
      QueryAst ast;
      ast.formula = parse_formula(queryText);
      if (quAt >= 0) ast.at = static_cast<std::size_t>(quAt);
      ast.horizon = quHorizon;
      ast.gate = quGate == "resource" ? GateMode::ResourceSafe : GateMode::ContractGated;
      auto res = run_query(l, reg, cids, ast);
      out.verdict = res.verdict ? "true" : "false";
      out.witnesses = res.witnesses;
      out.truncated = res.truncatedAtHorizon;
      return out.finish(res.verdict ? 0 : 1);
    }
    if (patternCmd->parsed()) {
      out.command = "audit pattern";
      auto l = load_ledger(file);
      auto first = Transfer::parse_name(auFirst);
      auto then = Transfer::parse_name(auThen);
      if (!first || !then)
        throw CLI::ValidationError("transfer names must look like (r,from,to)");
      auto hits = audit_pattern(l, *first, *then);
      out.verdict = std::to_string(hits.size()) + " occurrence(s)";
      for (const auto& h : hits)
        out.witnesses.push_back("first at " + std::to_string(h.firstIndex) +
                                ", then at " + std::to_string(h.thenIndex));
      return out.finish(hits.empty() ? 1 : 0);
    }
  } catch (const SyntaxError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const UnknownIdentifier& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    out.verdict = e.what();
    return out.finish(1);
  }
  return 2;
}

#ifndef TESTS_SUPPORT_FIXTURES_HPP
#define TESTS_SUPPORT_FIXTURES_HPP

#include <memory>
#include <string>
#include <vector>

#include "cledger/automata.hpp"
#include "cledger/ledger.hpp"
#include "cledger/query.hpp"

namespace fixtures {

using namespace cledger;

inline Transfer tr(const std::string& r, const std::string& from,
                   const std::string& to) {
  return Transfer{r, ActorId::parse(from), ActorId::parse(to)};
}

/// The damage-coverage insurance contract, built programmatically so tests do
/// not depend on the JSON loader.
inline LegalAutomaton insurance_automaton() {
  LegalAutomaton a;
  a.id = "Cd";
  a.resources = {"oldPrem", "claim", "damageEv", "damageDoc", "offer", "reject",
                 "accept", "raise", "refund", "out0", "out1", "out2", "out3"};
  a.events.events = {"damageEv", "out0", "out1", "out2", "out3"};
  a.actors = {"customer", "insurer"};
  a.states = {"In", "Active", "Claimed", "Offered", "Accepted", "Refunded",
              "Rejected", "Out0", "Out1", "Out2", "Out3"};
  a.initial = "In";
  a.finals = {{"Refunded", Outcome::Honoured}, {"Rejected", Outcome::Honoured},
              {"Out0", Outcome::Honoured},     {"Out1", Outcome::Breach},
              {"Out2", Outcome::Honoured},     {"Out3", Outcome::Breach}};
  a.rho = {
      {"dmgEvent", tr("damageEv", "TOP", "BOT")},
      {"produceDoc", tr("damageDoc", "TOP", "customer")},
      {"claim", tr("claim", "TOP", "insurer")},
      {"sendDoc", tr("damageDoc", "customer", "insurer")},
      {"offer", tr("offer", "TOP", "customer")},
      {"accept", tr("accept", "TOP", "insurer")},
      {"refund", tr("refund", "TOP", "customer")},
      {"dropOldPrem", tr("oldPrem", "customer", "BOT")},
      {"raise", tr("raise", "TOP", "customer")},
      {"reject", tr("reject", "TOP", "insurer")},
      {"timeOut0", tr("out0", "TOP", "BOT")},
      {"timeOut1", tr("out1", "TOP", "BOT")},
      {"timeOut2", tr("out2", "TOP", "BOT")},
      {"timeOut3", tr("out3", "TOP", "BOT")},
  };
  for (const auto& [name, _] : a.rho) a.actions.insert(name);
  a.timeouts = {"timeOut0", "timeOut1", "timeOut2", "timeOut3"};

  auto edge = [&](const std::string& from, const std::string& to,
                  std::set<ActionId> acts) {
    LegalTransition t;
    t.source = from;
    t.target = to;
    t.actions = std::move(acts);
    t.id = "t" + std::to_string(a.transitions.size()) + ":" + from + "->" + to;
    a.transitions.push_back(std::move(t));
  };
  edge("In", "Active", {"dmgEvent", "produceDoc"});
  edge("Active", "Claimed", {"claim", "sendDoc"});
  edge("Claimed", "Offered", {"offer"});
  edge("Offered", "Accepted", {"accept"});
  edge("Accepted", "Refunded", {"refund", "dropOldPrem", "raise"});
  edge("Offered", "Rejected", {"reject"});
  edge("Active", "Out0", {"timeOut0"});
  edge("Active", "Out1", {"timeOut1"});
  edge("Active", "Out2", {"timeOut2"});
  edge("Active", "Out3", {"timeOut3"});

  a.initialSoA = new_state_of_affairs(a.resources, a.events,
                                      {{"oldPrem", ActorId::parse("customer")}});
  return a;
}

inline std::shared_ptr<const Contract> insurance_contract() {
  static std::shared_ptr<const Contract> c = Contract::build(insurance_automaton());
  return c;
}

/// The 9-transfer honoured run reaching Refunded.
inline std::vector<Transfer> honoured_run() {
  return {
      tr("damageEv", "TOP", "BOT"),
      tr("damageDoc", "TOP", "customer"),
      tr("claim", "TOP", "insurer"),
      tr("damageDoc", "customer", "insurer"),
      tr("offer", "TOP", "customer"),
      tr("accept", "TOP", "insurer"),
      tr("refund", "TOP", "customer"),
      tr("oldPrem", "customer", "BOT"),
      tr("raise", "TOP", "customer"),
  };
}

/// Records the given transfers against the given contract id, permissively so
/// dirty traces can be built too.
inline LedgerState make_ledger(const std::vector<Transfer>& seq,
                               const std::string& contractId = "Cd") {
  LedgerState l;
  for (const auto& t : seq)
    l = append_record(l, contractId, t, AppendMeta{}, AppendMode::Permissive, nullptr);
  return l;
}

inline ContractRegistry insurance_registry() {
  ContractRegistry reg;
  auto c = insurance_contract();
  reg.emplace(c->id(), c);
  return reg;
}

}  // namespace fixtures

#endif  // TESTS_SUPPORT_FIXTURES_HPP

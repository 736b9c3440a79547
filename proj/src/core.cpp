#include "cledger/core.hpp"

#include <algorithm>
#include <sstream>

namespace cledger {

ActorId ActorId::proper(const std::string& name) {
  if (name.empty() || name == "TOP" || name == "BOT")
    throw ModelError(Errc::InvalidActorName,
                     "proper actor name must be non-empty and not a reserved word: '" +
                         name + "'");
  return ActorId(Kind::Proper, name);
}

ActorId ActorId::parse(const std::string& text) {
  if (text == "TOP") return top();
  if (text == "BOT") return bottom();
  return proper(text);
}

std::string ActorId::str() const {
  switch (kind_) {
    case Kind::Top: return "TOP";
    case Kind::Bottom: return "BOT";
    case Kind::Proper: return name_;
  }
  return "";
}

std::string Transfer::name() const {
  return "(" + resource + "," + from.str() + "," + to.str() + ")";
}

std::optional<Transfer> Transfer::parse_name(const std::string& text) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') return std::nullopt;
  std::string body = text.substr(1, text.size() - 2);
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || body[i] == ',') {
      parts.push_back(body.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 3) return std::nullopt;
  for (const auto& p : parts)
    if (p.empty()) return std::nullopt;
  try {
    return Transfer{parts[0], ActorId::parse(parts[1]), ActorId::parse(parts[2])};
  } catch (const ModelError&) {
    return std::nullopt;
  }
}

Bundle::Bundle(std::vector<Transfer> transfers) : transfers_(std::move(transfers)) {
  if (transfers_.empty())
    throw ModelError(Errc::NotJointlyApplicable, "a bundle must be non-empty");
  std::sort(transfers_.begin(), transfers_.end(),
            [](const Transfer& a, const Transfer& b) { return a.name() < b.name(); });
  for (std::size_t i = 1; i < transfers_.size(); ++i) {
    if (transfers_[i].resource == transfers_[i - 1].resource)
      throw ModelError(Errc::DuplicateAllocation,
                       "bundle members must have pairwise distinct resources: " +
                           transfers_[i].resource);
  }
}

bool Bundle::contains(const Transfer& t) const {
  return std::find(transfers_.begin(), transfers_.end(), t) != transfers_.end();
}

std::string Bundle::name() const {
  std::ostringstream out;
  out << "{";
  for (std::size_t i = 0; i < transfers_.size(); ++i) {
    if (i) out << ",";
    out << transfers_[i].name();
  }
  out << "}";
  return out.str();
}

const ActorId& StateOfAffairs::holder(const ResourceId& r) const {
  auto it = alloc_.find(r);
  if (it == alloc_.end())
    throw ModelError(Errc::UnknownResource, "unknown resource: " + r);
  return it->second;
}

std::map<ResourceId, ActorId> StateOfAffairs::non_top_allocations() const {
  std::map<ResourceId, ActorId> out;
  for (const auto& [r, k] : alloc_)
    if (!k.is_top()) out.emplace(r, k);
  return out;
}

StateOfAffairs new_state_of_affairs(const std::set<ResourceId>& resources,
                                    const EventSet& events,
                                    const std::vector<Allocation>& allocations) {
  StateOfAffairs s;
  for (const auto& a : allocations) {
    if (!resources.count(a.resource))
      throw ModelError(Errc::UnknownResource,
                       "allocation of undeclared resource: " + a.resource);
    if (events.contains(a.resource) && a.holder.is_proper())
      throw ModelError(Errc::EventHeldByProper,
                       "event token held by proper actor: " + a.resource);
    auto [_, inserted] = s.alloc_.emplace(a.resource, a.holder);
    if (!inserted)
      throw ModelError(Errc::DuplicateAllocation,
                       "resource allocated twice: " + a.resource);
  }
  for (const auto& r : resources) s.alloc_.emplace(r, ActorId::top());
  return s;
}

std::optional<Errc> validate_transfer(const Transfer& t, const EventSet& events) {
  if (t.from == t.to) return Errc::SelfTransfer;
  if (t.from.is_bottom()) return Errc::FromBottom;
  if (events.contains(t.resource) && !(t.from.is_top() && t.to.is_bottom()))
    return Errc::MalformedEventTransfer;
  return std::nullopt;
}

bool is_applicable(const Transfer& t, const StateOfAffairs& s) {
  return s.has_resource(t.resource) && s.holder(t.resource) == t.from;
}

bool is_jointly_applicable(const Bundle& b, const StateOfAffairs& s) {
  for (const auto& t : b.transfers())
    if (!is_applicable(t, s)) return false;
  return true;
}

StateOfAffairs apply_transfer(const Transfer& t, const StateOfAffairs& s) {
  if (!is_applicable(t, s))
    throw ModelError(Errc::NotApplicable,
                     "transfer not applicable: " + t.name() + " (holder of " +
                         t.resource + " is " +
                         (s.has_resource(t.resource) ? s.holder(t.resource).str()
                                                     : std::string("<absent>")) +
                         ")");
  StateOfAffairs out = s;
  out.alloc_.at(t.resource) = t.to;
  return out;
}

StateOfAffairs apply_bundle(const Bundle& b, const StateOfAffairs& s) {
  std::vector<Transfer> failing;
  for (const auto& t : b.transfers())
    if (!is_applicable(t, s)) failing.push_back(t);
  if (!failing.empty()) {
    std::string names;
    for (const auto& t : failing) names += (names.empty() ? "" : ", ") + t.name();
    throw ModelError(Errc::NotJointlyApplicable,
                     "bundle not jointly applicable; failing members: " + names);
  }
  StateOfAffairs out = s;
  for (const auto& t : b.transfers()) out.alloc_.at(t.resource) = t.to;
  return out;
}

}  // namespace cledger

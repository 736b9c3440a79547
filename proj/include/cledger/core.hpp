#ifndef CLEDGER_CORE_HPP
#define CLEDGER_CORE_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cledger {

/// Error codes for the resource/actor model and everything layered on it.
enum class Errc {
  DuplicateAllocation,
  UnknownResource,
  EventHeldByProper,
  SelfTransfer,
  FromBottom,
  MalformedEventTransfer,
  NotApplicable,
  NotJointlyApplicable,
  InvalidActorName,
  InvalidResourceName,
};

class ModelError : public std::runtime_error {
public:
  ModelError(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

using ResourceId = std::string;

/// A contract party. Top is the environment source of not-yet-produced
/// resources, Bottom the sink for consumed resources and occurred events.
class ActorId {
public:
  enum class Kind { Top, Bottom, Proper };

  static ActorId top() { return ActorId(Kind::Top, ""); }
  static ActorId bottom() { return ActorId(Kind::Bottom, ""); }
  static ActorId proper(const std::string& name);

  /// Parses the wire spelling: "TOP", "BOT", or a proper actor name.
  static ActorId parse(const std::string& text);

  Kind kind() const { return kind_; }
  bool is_top() const { return kind_ == Kind::Top; }
  bool is_bottom() const { return kind_ == Kind::Bottom; }
  bool is_proper() const { return kind_ == Kind::Proper; }
  const std::string& name() const { return name_; }

  /// Wire spelling; "TOP" and "BOT" are reserved.
  std::string str() const;

  friend bool operator==(const ActorId& a, const ActorId& b) {
    return a.kind_ == b.kind_ && a.name_ == b.name_;
  }
  friend bool operator!=(const ActorId& a, const ActorId& b) { return !(a == b); }
  friend bool operator<(const ActorId& a, const ActorId& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    return a.name_ < b.name_;
  }

private:
  ActorId(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}
  Kind kind_;
  std::string name_;
};

struct Allocation {
  ResourceId resource;
  ActorId holder;
};

/// The event tokens of a contract, a subset of its resources.
struct EventSet {
  std::set<ResourceId> events;
  bool contains(const ResourceId& r) const { return events.count(r) > 0; }
};

/// One hand-over of a resource between actors.
struct Transfer {
  ResourceId resource;
  ActorId from = ActorId::top();
  ActorId to = ActorId::top();

  /// Canonical name "(resource,from,to)" with TOP/BOT spelled literally.
  std::string name() const;

  /// Inverse of name(); returns nullopt if the text is not a transfer name.
  static std::optional<Transfer> parse_name(const std::string& text);

  friend bool operator==(const Transfer& a, const Transfer& b) {
    return a.resource == b.resource && a.from == b.from && a.to == b.to;
  }
  friend bool operator!=(const Transfer& a, const Transfer& b) { return !(a == b); }
  friend bool operator<(const Transfer& a, const Transfer& b) {
    if (a.resource != b.resource) return a.resource < b.resource;
    if (!(a.from == b.from)) return a.from < b.from;
    return a.to < b.to;
  }
};

/// A transactional set of transfers on pairwise distinct resources.
class Bundle {
public:
  explicit Bundle(std::vector<Transfer> transfers);

  const std::vector<Transfer>& transfers() const { return transfers_; }
  std::size_t size() const { return transfers_.size(); }
  auto begin() const { return transfers_.begin(); }
  auto end() const { return transfers_.end(); }
  bool contains(const Transfer& t) const;

  /// Canonical name: "{t1,t2,...}" with member names sorted lexicographically.
  std::string name() const;

  friend bool operator==(const Bundle& a, const Bundle& b) {
    return a.transfers_ == b.transfers_;
  }
  friend bool operator!=(const Bundle& a, const Bundle& b) { return !(a == b); }

private:
  std::vector<Transfer> transfers_;  // kept sorted by name
};

/// Total allocation map: every resource of the contract held by exactly one
/// actor. Immutable; applications return new values.
class StateOfAffairs {
public:
  StateOfAffairs() = default;

  const ActorId& holder(const ResourceId& r) const;
  bool has_resource(const ResourceId& r) const { return alloc_.count(r) > 0; }
  const std::map<ResourceId, ActorId>& allocations() const { return alloc_; }

  /// The allocations to proper actors plus Bottom (everything not parked at Top).
  std::map<ResourceId, ActorId> non_top_allocations() const;

  friend bool operator==(const StateOfAffairs& a, const StateOfAffairs& b) {
    return a.alloc_ == b.alloc_;
  }
  friend bool operator!=(const StateOfAffairs& a, const StateOfAffairs& b) {
    return !(a == b);
  }

private:
  friend StateOfAffairs new_state_of_affairs(const std::set<ResourceId>&,
                                             const EventSet&,
                                             const std::vector<Allocation>&);
  friend StateOfAffairs apply_transfer(const Transfer&, const StateOfAffairs&);
  friend StateOfAffairs apply_bundle(const Bundle&, const StateOfAffairs&);
  std::map<ResourceId, ActorId> alloc_;
};

/// Builds a validated total allocation map. Resources absent from
/// `allocations` default to holder Top.
StateOfAffairs new_state_of_affairs(const std::set<ResourceId>& resources,
                                    const EventSet& events,
                                    const std::vector<Allocation>& allocations);

/// Checks the transfer invariants: from != to, from != BOT, and event tokens
/// only move (e,TOP,BOT).
std::optional<Errc> validate_transfer(const Transfer& t, const EventSet& events);

bool is_applicable(const Transfer& t, const StateOfAffairs& s);
bool is_jointly_applicable(const Bundle& b, const StateOfAffairs& s);

/// apl: replaces [r,from] by [r,to]. Throws NotApplicable when the current
/// holder of r is not t.from.
StateOfAffairs apply_transfer(const Transfer& t, const StateOfAffairs& s);

/// jpl: transactional joint application. Throws NotJointlyApplicable listing
/// the failing members; on error the input is unchanged.
StateOfAffairs apply_bundle(const Bundle& b, const StateOfAffairs& s);

}  // namespace cledger

#endif  // CLEDGER_CORE_HPP

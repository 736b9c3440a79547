#include "cledger/logic.hpp"

#include <algorithm>
#include <sstream>

namespace cledger {

bool is_prefix(const Path& a, const Path& b) {
  if (a.size() > b.size()) return false;
  return std::equal(a.begin(), a.end(), b.begin());
}

Path longest_common_prefix(const Path& a, const Path& b) {
  Path out;
  for (std::size_t i = 0; i < a.size() && i < b.size() && a[i] == b[i]; ++i)
    out.push_back(a[i]);
  return out;
}

namespace {

std::string path_str(const Path& p) {
  std::string out = "<";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    out += p[i];
  }
  return out + ">";
}

std::vector<Transfer> path_transfers(const Path& p) {
  std::vector<Transfer> out;
  for (const auto& name : p)
    if (auto t = Transfer::parse_name(name)) out.push_back(*t);
  return out;
}

}  // namespace

std::vector<Path> Universe::successors(const Path& p) const {
  std::vector<Path> out;
  for (const auto& q : enumeration())
    if (q.size() == p.size() + 1 && is_prefix(p, q)) out.push_back(q);
  return out;
}

const Path* Universe::predecessor(const Path& p) const {
  if (p.empty()) return nullptr;
  Path parent(p.begin(), p.end() - 1);
  auto it = enumeration().find(parent);
  return it == enumeration().end() ? nullptr : &*it;
}

ExplicitTree::ExplicitTree(std::set<Path> paths, bool close) : paths_(std::move(paths)) {
  paths_.insert(Path{});
  if (close) {
    std::set<Path> closed;
    for (const auto& p : paths_)
      for (std::size_t n = 0; n <= p.size(); ++n)
        closed.insert(Path(p.begin(), p.begin() + n));
    paths_ = std::move(closed);
    return;
  }
  for (const auto& p : paths_) {
    if (p.empty()) continue;
    Path parent(p.begin(), p.end() - 1);
    if (!paths_.count(parent))
      throw LogicError(LogicError::Code::NotPrefixClosed,
                       "missing prefix " + path_str(parent));
  }
}

LedgerUniverse::LedgerUniverse(LedgerState ledger, ContractRegistry registry,
                               std::set<std::string> contractIds, std::size_t horizon,
                               GateMode gate)
    : ledger_(std::move(ledger)),
      registry_(std::move(registry)),
      contractIds_(std::move(contractIds)),
      horizon_(horizon),
      gate_(gate) {
  std::set<Transfer> alphabet;
  std::map<ResourceId, ActorId> init;
  for (const auto& cid : contractIds_) {
    auto it = registry_.find(cid);
    if (it == registry_.end())
      throw LogicError(LogicError::Code::UnregisteredMap, "unknown contract: " + cid);
    const auto& legal = it->second->legal();
    for (const auto& [a, t] : legal.rho) alphabet.insert(t);
    for (const auto& [r, k] : legal.initialSoA.allocations()) init.emplace(r, k);
  }
  alphabet_.assign(alphabet.begin(), alphabet.end());
  std::set<ResourceId> resources;
  std::vector<Allocation> allocs;
  for (const auto& [r, k] : init) {
    resources.insert(r);
    allocs.push_back({r, k});
  }
  initial_ = new_state_of_affairs(resources, EventSet{}, allocs);
  base_ = established(ledger_.size());
}

Path LedgerUniverse::established(std::size_t t) const {
  if (t > ledger_.size())
    throw LogicError(LogicError::Code::IndexOutOfRange,
                     "step " + std::to_string(t) + " beyond ledger of size " +
                         std::to_string(ledger_.size()));
  Path out;
  for (std::size_t i = 0; i < t; ++i) {
    const auto& r = ledger_.records()[i];
    if (contractIds_.count(r.contract)) out.push_back(r.transfer.name());
  }
  return out;
}

std::vector<Transfer> LedgerUniverse::admissible_next(const Path& p) const {
  // Literal replay of holders; resources never mentioned sit at their initial
  // holder (TOP when undeclared).
  std::map<ResourceId, ActorId> holder;
  for (const auto& t : path_transfers(p)) holder.insert_or_assign(t.resource, t.to);
  auto holder_of = [&](const ResourceId& r) {
    auto it = holder.find(r);
    if (it != holder.end()) return it->second;
    return initial_.has_resource(r) ? initial_.holder(r) : ActorId::top();
  };

  std::vector<Transfer> out;
  for (const auto& t : alphabet_) {
    if (!(holder_of(t.resource) == t.from)) continue;
    if (gate_ == GateMode::ContractGated) {
      bool advances = false;
      for (const auto& cid : contractIds_) {
        const Contract& c = *registry_.at(cid);
        std::vector<Transfer> projected;
        for (const auto& u : path_transfers(p))
          if (c.owns_transfer(u.name())) projected.push_back(u);
        if (!c.owns_transfer(t.name())) continue;
        projected.push_back(t);
        auto scan = scan_transfers(c, projected);
        if (!scan.acceptedIndices.empty() &&
            scan.acceptedIndices.back() == projected.size() - 1) {
          advances = true;
          break;
        }
      }
      if (!advances) continue;
    }
    out.push_back(t);
  }
  return out;
}

void LedgerUniverse::ensure_enumerated() const {
  if (enumerated_) return;
  enumerated_ = true;

  // Each recorded prefix seeds a divergence budget of `horizon_` steps;
  // children that stay on the recorded spine are reached with a fresh budget
  // through the next seed instead.
  std::function<void(const Path&, std::size_t)> grow = [&](const Path& p,
                                                           std::size_t budget) {
    paths_.insert(p);
    auto next = admissible_next(p);
    if (budget == 0) {
      if (!next.empty()) truncated_ = true;
      return;
    }
    for (const auto& t : next) {
      Path child = p;
      child.push_back(t.name());
      if (is_prefix(child, base_)) continue;
      grow(child, budget - 1);
    }
  };

  for (std::size_t n = 0; n <= base_.size(); ++n)
    grow(Path(base_.begin(), base_.begin() + n), horizon_);
}

const std::set<Path>& LedgerUniverse::enumeration() const {
  ensure_enumerated();
  return paths_;
}

bool LedgerUniverse::truncated() const {
  ensure_enumerated();
  return truncated_;
}

// ---------------------------------------------------------------------------
// Formula construction

namespace {
FormulaPtr node(FormulaKind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}
}  // namespace

FormulaPtr Formula::make_true() { return node(FormulaKind::True); }
FormulaPtr Formula::make_false() { return node(FormulaKind::False); }

FormulaPtr Formula::negation(FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Not;
  f->lhs = std::move(a);
  return f;
}

FormulaPtr Formula::conjunction(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::And;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr Formula::disjunction(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Or;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr Formula::implication(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Implies;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr Formula::modal(FormulaKind k, FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->lhs = std::move(a);
  return f;
}

FormulaPtr Formula::along(FormulaKind k, std::string mapName, FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->name = std::move(mapName);
  f->lhs = std::move(a);
  return f;
}

FormulaPtr Formula::chi(long t) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomChi;
  f->t = t;
  return f;
}

FormulaPtr Formula::app(const Transfer& t) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomApp;
  f->name = t.name();
  return f;
}

FormulaPtr Formula::app_at(const Transfer& t, long n) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomAppAt;
  f->name = t.name();
  f->t = n;
  return f;
}

FormulaPtr Formula::app_last(const Transfer& t, long bound) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomAppLast;
  f->name = t.name();
  f->t = bound;
  return f;
}

FormulaPtr Formula::hol(std::string resource, std::string actor, long t) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomHol;
  f->name = std::move(resource);
  f->actor = std::move(actor);
  f->t = t;
  return f;
}

FormulaPtr Formula::phi(long t) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomPhi;
  f->t = t;
  return f;
}

FormulaPtr Formula::bc(std::string contractId) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomBc;
  f->name = std::move(contractId);
  return f;
}

FormulaPtr Formula::one_of(std::set<Path> paths) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::AtomOneOf;
  f->oneOf = std::move(paths);
  return f;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind || a->t != b->t || a->name != b->name ||
      a->actor != b->actor || a->oneOf != b->oneOf)
    return false;
  return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
}

// ---------------------------------------------------------------------------
// Evaluation

const MonotoneMap& EvalContext::map(const std::string& name) const {
  auto it = maps.find(name);
  if (it == maps.end())
    throw LogicError(LogicError::Code::UnregisteredMap, "unregistered map: " + name);
  return it->second;
}

EvalContext EvalContext::with_universe(const Universe* u) const {
  EvalContext out = *this;
  out.universe = u;
  return out;
}

namespace {

bool hol_replay(const Path& p, long t, const std::string& resource,
                const std::string& actor, const EvalContext& ctx) {
  if (t < 0 || p.size() < static_cast<std::size_t>(t)) return false;
  std::map<ResourceId, ActorId> holder;
  for (long i = 0; i < t; ++i)
    if (auto tr = Transfer::parse_name(p[i]))
      holder.insert_or_assign(tr->resource, tr->to);
  ActorId who = ActorId::parse(actor);
  auto it = holder.find(resource);
  if (it != holder.end()) return it->second == who;
  if (ctx.ledgerUniverse && ctx.ledgerUniverse->initial_state().has_resource(resource))
    return ctx.ledgerUniverse->initial_state().holder(resource) == who;
  return who.is_top();
}

bool phi_holds(const Path& p, long t, const EvalContext& ctx) {
  if (!ctx.ledgerUniverse)
    throw LogicError(LogicError::Code::UnsupportedAtom,
                     "phi needs a ledger universe");
  std::size_t bound = std::min<std::size_t>(
      t < 0 ? 0 : static_cast<std::size_t>(t), ctx.ledgerUniverse->recorded_length());
  Path est = ctx.ledgerUniverse->established(bound);
  for (std::size_t i = 0; i < std::min(p.size(), est.size()); ++i)
    if (p[i] != est[i]) return false;
  return true;
}

}  // namespace

bool eval_formula(const FormulaPtr& f, const Path& p, const EvalContext& ctx) {
  const Universe& u = *ctx.universe;
  if (!u.contains(p))
    throw LogicError(LogicError::Code::PathOutsideUniverse,
                     "path outside universe: " + path_str(p));
  switch (f->kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Not:
      return !eval_formula(f->lhs, p, ctx);
    case FormulaKind::And:
      return eval_formula(f->lhs, p, ctx) && eval_formula(f->rhs, p, ctx);
    case FormulaKind::Or:
      return eval_formula(f->lhs, p, ctx) || eval_formula(f->rhs, p, ctx);
    case FormulaKind::Implies:
      return !eval_formula(f->lhs, p, ctx) || eval_formula(f->rhs, p, ctx);
    case FormulaKind::DiamondUp:
    case FormulaKind::BoxDown: {
      if (u.truncated()) ctx.truncationSeen = true;
      bool forall = f->kind == FormulaKind::BoxDown;
      for (const auto& q : u.enumeration()) {
        if (!is_prefix(p, q)) continue;
        bool v = eval_formula(f->lhs, q, ctx);
        if (forall && !v) return false;
        if (!forall && v) return true;
      }
      return forall;
    }
    case FormulaKind::DiamondDown:
    case FormulaKind::BoxUp: {
      bool forall = f->kind == FormulaKind::BoxUp;
      for (std::size_t n = 0; n <= p.size(); ++n) {
        Path q(p.begin(), p.begin() + n);
        bool v = eval_formula(f->lhs, q, ctx);
        if (forall && !v) return false;
        if (!forall && v) return true;
      }
      return forall;
    }
    case FormulaKind::NextDia:
    case FormulaKind::NextBox: {
      if (u.truncated()) ctx.truncationSeen = true;
      bool forall = f->kind == FormulaKind::NextBox;
      for (const auto& q : u.successors(p)) {
        bool v = eval_formula(f->lhs, q, ctx);
        if (forall && !v) return false;
        if (!forall && v) return true;
      }
      return forall;
    }
    case FormulaKind::PrevDia:
    case FormulaKind::PrevBox: {
      const Path* q = u.predecessor(p);
      if (!q) return f->kind == FormulaKind::PrevBox;
      return eval_formula(f->lhs, *q, ctx);
    }
    case FormulaKind::Pullback: {
      const MonotoneMap& m = ctx.map(f->name);
      return eval_formula(f->lhs, m.fn(p), ctx.with_universe(m.codomain));
    }
    case FormulaKind::ExistsAlong:
    case FormulaKind::ForallAlong: {
      const MonotoneMap& m = ctx.map(f->name);
      bool forall = f->kind == FormulaKind::ForallAlong;
      auto inner = ctx.with_universe(m.domain);
      for (const auto& q : m.domain->enumeration()) {
        if (m.fn(q) != p) continue;
        bool v = eval_formula(f->lhs, q, inner);
        if (forall && !v) return false;
        if (!forall && v) return true;
      }
      return forall;
    }
    case FormulaKind::AtomChi:
      return f->t >= 0 && p.size() <= static_cast<std::size_t>(f->t);
    case FormulaKind::AtomApp:
      return std::find(p.begin(), p.end(), f->name) != p.end();
    case FormulaKind::AtomAppAt:
      return f->t >= 1 && static_cast<std::size_t>(f->t) <= p.size() &&
             p[f->t - 1] == f->name;
    case FormulaKind::AtomAppLast:
      return f->t >= 0 && p.size() <= static_cast<std::size_t>(f->t) &&
             !p.empty() && p.back() == f->name;
    case FormulaKind::AtomHol:
      return hol_replay(p, f->t, f->name, f->actor, ctx);
    case FormulaKind::AtomPhi:
      return phi_holds(p, f->t, ctx);
    case FormulaKind::AtomBc: {
      if (!ctx.registry)
        throw LogicError(LogicError::Code::UnsupportedAtom, "bc needs a registry");
      auto it = ctx.registry->find(f->name);
      if (it == ctx.registry->end())
        throw LogicError(LogicError::Code::UnregisteredMap,
                         "unknown contract: " + f->name);
      return is_bundle_complete_seq(path_transfers(p), *it->second);
    }
    case FormulaKind::AtomOneOf:
      return f->oneOf.count(p) > 0;
  }
  return false;
}

Interpretation interpret_formula(const FormulaPtr& f, const EvalContext& ctx,
                                 long depth) {
  Interpretation out;
  out.depthBound = depth;
  for (const auto& p : ctx.universe->enumeration()) {
    if (depth >= 0 && p.size() > static_cast<std::size_t>(depth)) continue;
    if (eval_formula(f, p, ctx)) out.paths.insert(p);
  }
  return out;
}

Interpretation pushforward_exists(const MonotoneMap& m, const Interpretation& i) {
  Interpretation out;
  out.depthBound = i.depthBound;
  for (const auto& p : i.paths) out.paths.insert(m.fn(p));
  return out;
}

Interpretation pushforward_forall(const MonotoneMap& m, const Interpretation& i) {
  Interpretation out;
  out.depthBound = i.depthBound;
  for (const auto& q : m.codomain->enumeration()) {
    bool all = true;
    for (const auto& p : m.domain->enumeration()) {
      if (m.fn(p) != q) continue;
      if (!i.paths.count(p)) {
        all = false;
        break;
      }
    }
    if (all) out.paths.insert(q);
  }
  return out;
}

Interpretation pullback(const MonotoneMap& m, const Interpretation& i) {
  Interpretation out;
  out.depthBound = i.depthBound;
  for (const auto& p : m.domain->enumeration())
    if (i.paths.count(m.fn(p))) out.paths.insert(p);
  return out;
}

Evolution evolution_at(const LedgerState& l, std::size_t t,
                       const ContractRegistry& registry,
                       const std::set<std::string>& contractIds, std::size_t horizon,
                       GateMode gate) {
  if (t > l.size())
    throw LogicError(LogicError::Code::IndexOutOfRange,
                     "step " + std::to_string(t) + " beyond ledger of size " +
                         std::to_string(l.size()));
  Evolution out;
  out.t = t;
  out.full = std::make_shared<LedgerUniverse>(l, registry, contractIds, horizon, gate);
  out.established = out.full->established(t);
  std::set<Path> selected;
  for (const auto& p : out.full->enumeration()) {
    bool agrees = true;
    for (std::size_t i = 0; i < std::min(p.size(), out.established.size()); ++i)
      if (p[i] != out.established[i]) {
        agrees = false;
        break;
      }
    if (agrees) selected.insert(p);
  }
  out.universe = std::make_shared<ExplicitTree>(std::move(selected));
  return out;
}

std::vector<AxiomReport> check_axioms(const EvalContext& ctx, long depth) {
  std::vector<AxiomReport> out;
  AxiomReport selfT{"no-self-transfer", true, {}};
  AxiomReport fromBot{"no-transfer-from-bottom", true, {}};
  AxiomReport postBot{"nothing-after-bottom", true, {}};

  for (const auto& p : ctx.universe->enumeration()) {
    if (depth >= 0 && p.size() > static_cast<std::size_t>(depth)) continue;
    std::set<ResourceId> sunk;
    for (const auto& name : p) {
      auto t = Transfer::parse_name(name);
      if (!t) continue;
      if (selfT.holds && t->from == t->to) selfT = {selfT.axiom, false, p};
      if (fromBot.holds && t->from.is_bottom()) fromBot = {fromBot.axiom, false, p};
      if (postBot.holds && sunk.count(t->resource)) postBot = {postBot.axiom, false, p};
      if (t->to.is_bottom()) sunk.insert(t->resource);
    }
  }
  out.push_back(selfT);
  out.push_back(fromBot);
  out.push_back(postBot);

  if (ctx.ledgerUniverse) {
    AxiomReport nesting{"evolution-nesting", true, {}};
    std::size_t n = ctx.ledgerUniverse->recorded_length();
    for (std::size_t t = 0; t + 1 <= n && nesting.holds; ++t) {
      auto phiNext = Formula::phi(static_cast<long>(t) + 1);
      auto phiNow = Formula::phi(static_cast<long>(t));
      for (const auto& p : ctx.universe->enumeration()) {
        if (depth >= 0 && p.size() > static_cast<std::size_t>(depth)) continue;
        if (eval_formula(phiNext, p, ctx) && !eval_formula(phiNow, p, ctx)) {
          nesting = {nesting.axiom, false, p};
          break;
        }
      }
    }
    out.push_back(nesting);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeling trees and occurring maps as registered monotone maps

std::set<Path> bundle_labeling_tree(const Contract& c) {
  std::set<Path> out;
  for (const auto& tr : enumerate_trajectories(c.legal(), c.legal().initial)) {
    Path p;
    for (const auto& b : bundle_labeling(c, tr)) p.push_back(b.name());
    out.insert(std::move(p));
  }
  return out;
}

std::set<Path> transfer_labeling_tree(const Contract& c) {
  std::set<Path> out;
  for (const auto& tr : enumerate_trajectories(c.exec(), c.exec().initial)) {
    Path p;
    for (const auto& t : transfer_labeling(c, tr)) p.push_back(t.name());
    out.insert(std::move(p));
  }
  return out;
}

LedgerEvalContext::LedgerEvalContext(std::shared_ptr<const LedgerUniverse> u)
    : universe_(std::move(u)) {
  ctx_.universe = universe_.get();
  ctx_.ledgerUniverse = universe_.get();
  ctx_.registry = &universe_->registry();

  for (const auto& cid : universe_->contract_ids()) {
    std::shared_ptr<const Contract> c = universe_->registry().at(cid);
    auto bTree = std::make_shared<ExplicitTree>(bundle_labeling_tree(*c));
    auto lTree = std::make_shared<ExplicitTree>(transfer_labeling_tree(*c));
    owned_.push_back(bTree);
    owned_.push_back(lTree);

    MonotoneMap nuL;
    nuL.domain = universe_.get();
    nuL.codomain = bTree.get();
    nuL.fn = [c](const Path& p) {
      Path out;
      for (const auto& b : scan_transfers(*c, path_transfers(p)).bundles)
        out.push_back(b.name());
      return out;
    };
    ctx_.maps["nu_l:" + cid] = std::move(nuL);

    MonotoneMap nuE;
    nuE.domain = universe_.get();
    nuE.codomain = lTree.get();
    nuE.fn = [c](const Path& p) {
      Path out;
      for (const auto& t : scan_transfers(*c, path_transfers(p)).accepted)
        out.push_back(t.name());
      return out;
    };
    ctx_.maps["nu_e:" + cid] = std::move(nuE);

    MonotoneMap nuLe;
    nuLe.domain = lTree.get();
    nuLe.codomain = bTree.get();
    nuLe.fn = [c](const Path& p) {
      Path out;
      for (const auto& b : factorise(path_transfers(p), *c)) out.push_back(b.name());
      return out;
    };
    ctx_.maps["nu_le:" + cid] = std::move(nuLe);
  }
}

}  // namespace cledger

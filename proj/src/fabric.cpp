#include "objstore/fabric.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace objstore {

std::string toString(ProcessId id) {
  std::string s(id.kind == ActorKind::Server ? "S" : "C");
  s += std::to_string(id.rank);
  return s;
}

Tick ActorContext::now() const { return fabric_->actorNow(self_); }

void ActorContext::advance(Tick dt) {
  if (self_.kind == ActorKind::Server)
    fabric_->servers_[self_.rank].localNow += dt;
  else
    fabric_->clients_[self_.rank]->localNow += dt;
}

void ActorContext::send(ProcessId dst, Tag tag, Payload payload) {
  fabric_->sendFrom(self_, dst, tag, std::move(payload));
}

int ActorContext::numServers() const { return fabric_->numServers(); }
int ActorContext::numClients() const { return fabric_->numClients(); }

Envelope ActorContext::receive(const std::string& why) {
  assert(self_.kind == ActorKind::Client);
  return fabric_->clientReceive(self_.rank, why);
}

std::optional<Envelope> ActorContext::tryReceive() {
  assert(self_.kind == ActorKind::Client);
  return fabric_->clientTryReceive(self_.rank);
}

Fabric::Fabric(FabricConfig cfg, int numServers, int numClients)
    : cfg_(cfg), servers_(numServers) {
  clients_.reserve(numClients);
  for (int i = 0; i < numClients; ++i)
    clients_.push_back(std::make_unique<ClientState>());
}

Fabric::~Fabric() {
  abortFibers();
  joinFibers();
}

void Fabric::attachServer(int rank, ServerHandler* handler) {
  servers_.at(rank).handler = handler;
}

void Fabric::attachClient(int rank, ClientProgram program) {
  clients_.at(rank)->program = std::move(program);
}

Tick Fabric::actorNow(ProcessId id) const {
  return id.kind == ActorKind::Server ? servers_[id.rank].localNow
                                      : clients_[id.rank]->localNow;
}

static std::uint64_t pairKey(ProcessId src, ProcessId dst) {
  auto half = [](ProcessId p) {
    return (std::uint64_t(p.kind) << 30) | std::uint64_t(std::uint32_t(p.rank));
  };
  return (half(src) << 32) | half(dst);
}

void Fabric::sendFrom(ProcessId src, ProcessId dst, Tag tag, Payload payload) {
  Envelope env;
  env.src = src;
  env.dst = dst;
  env.tag = tag;
  env.payload = std::move(payload);
  env.sendTick = actorNow(src);
  env.deliverTick = env.sendTick + cfg_.latencyTicks +
                    Tick(std::llround(cfg_.perByteCost * double(env.payload.size())));
  env.sequence = nextSeq_++;
  if (trace_) trace_->onSend(env);
  scheduleArrival(std::move(env));
}

void Fabric::scheduleArrival(Envelope env) {
  // A channel delivers in send order: a later small message cannot overtake an
  // earlier bulk one between the same pair, so clamp to the pair's last
  // arrival. deliverTick itself keeps the unclamped per-message cost.
  std::uint64_t key = pairKey(env.src, env.dst);
  Tick eff = env.deliverTick;
  auto it = pairLastArrival_.find(key);
  if (it != pairLastArrival_.end() && it->second > eff) eff = it->second;
  pairLastArrival_[key] = eff;
  if (env.dst.kind == ActorKind::Client)
    clients_[env.dst.rank]->pendingArrivals.insert(eff);

  auto ev = std::make_unique<Event>();
  ev->tick = eff;
  ev->kindOrder = std::uint8_t(env.src.kind);
  ev->rank = env.src.rank;
  ev->seq = env.sequence;
  ev->type = Event::Type::Arrival;
  ev->env = std::move(env);
  events_.push(std::move(ev));
}

void Fabric::scheduleServerPoll(int rank, Tick tick) {
  ServerState& s = servers_[rank];
  if (s.pollScheduled) return;
  s.pollScheduled = true;
  auto ev = std::make_unique<Event>();
  ev->tick = tick;
  ev->kindOrder = std::uint8_t(ActorKind::Server);
  ev->rank = rank;
  ev->seq = nextSeq_++;
  ev->type = Event::Type::ServerPoll;
  ev->actor = {ActorKind::Server, rank};
  events_.push(std::move(ev));
}

void Fabric::serverPoll(int rank, Tick tick) {
  ServerState& s = servers_[rank];
  s.pollScheduled = false;
  if (tick > s.localNow) {
    s.idleTicks += tick - s.localNow;
    s.localNow = tick;
  }
  ActorContext ctx(this, {ActorKind::Server, rank});
  if (!s.inbox.empty()) {
    Envelope env = std::move(s.inbox.front());
    s.inbox.pop_front();
    if (trace_) trace_->onProcess(env, s.localNow);
    s.handler->onMessage(ctx, std::move(env));
    scheduleServerPoll(rank, s.localNow);
  } else if (s.handler->idleWork(ctx)) {
    scheduleServerPoll(rank, s.localNow);
  }
  // else: truly idle until the next arrival reschedules us
}

void Fabric::resumeClient(int rank) {
  ClientState& c = *clients_[rank];
  {
    std::unique_lock lk(c.mtx);
    c.clientTurn = true;
    c.cv.notify_all();
    c.cv.wait(lk, [&] { return !c.clientTurn; });
  }
  if (c.error) {
    std::exception_ptr err = c.error;
    c.error = nullptr;
    abortFibers();
    joinFibers();
    std::rethrow_exception(err);
  }
}

void Fabric::clientYield(ClientState& c) {
  std::unique_lock lk(c.mtx);
  c.clientTurn = false;
  c.cv.notify_all();
  c.cv.wait(lk, [&] { return c.clientTurn; });
  if (c.abort) throw FiberAbort{};
}

Envelope Fabric::clientReceive(int rank, const std::string& why) {
  ClientState& c = *clients_[rank];
  while (c.inbox.empty()) {
    c.blockReason = why;
    clientYield(c);
  }
  c.blockReason.clear();
  Envelope env = std::move(c.inbox.front());
  c.inbox.pop_front();
  if (trace_) trace_->onProcess(env, c.localNow);
  return env;
}

std::optional<Envelope> Fabric::clientTryReceive(int rank) {
  ClientState& c = *clients_[rank];
  // The fiber runs ahead of the scheduler in zero virtual time, so a message
  // timestamped at or before the client's clock can still sit in the event
  // queue. Yield until every such arrival has been dispatched; none of the
  // yields moves the client's clock.
  while (c.inbox.empty() && !c.pendingArrivals.empty() &&
         *c.pendingArrivals.begin() <= c.localNow) {
    c.blockReason = "delivery poll";
    clientYield(c);
  }
  if (c.inbox.empty()) return std::nullopt;
  c.blockReason.clear();
  Envelope env = std::move(c.inbox.front());
  c.inbox.pop_front();
  if (trace_) trace_->onProcess(env, c.localNow);
  return env;
}

void Fabric::fiberMain(int rank) {
  ClientState& c = *clients_[rank];
  {
    std::unique_lock lk(c.mtx);
    c.cv.wait(lk, [&] { return c.clientTurn; });
  }
  if (!c.abort) {
    try {
      ActorContext ctx(this, {ActorKind::Client, rank});
      c.program(ctx);
    } catch (FiberAbort&) {
    } catch (...) {
      c.error = std::current_exception();
    }
  }
  std::unique_lock lk(c.mtx);
  c.finished = true;
  c.clientTurn = false;
  c.cv.notify_all();
}

void Fabric::abortFibers() {
  for (auto& cp : clients_) {
    ClientState& c = *cp;
    if (!c.thread.joinable()) continue;
    std::unique_lock lk(c.mtx);
    while (!c.finished) {
      c.abort = true;
      c.clientTurn = true;
      c.cv.notify_all();
      c.cv.wait(lk, [&] { return !c.clientTurn; });
    }
  }
}

void Fabric::joinFibers() {
  for (auto& cp : clients_)
    if (cp->thread.joinable()) cp->thread.join();
}

void Fabric::reportDeadlock() {
  std::ostringstream msg;
  msg << "deadlock: no messages in flight;";
  for (int i = 0; i < int(clients_.size()); ++i) {
    ClientState& c = *clients_[i];
    if (!c.finished)
      msg << " C" << i << " blocked on ["
          << (c.blockReason.empty() ? "start" : c.blockReason) << "]";
  }
  abortFibers();
  joinFibers();
  throw DeadlockError(msg.str());
}

void Fabric::run() {
  if (started_) throw std::logic_error("fabric: run() called twice");
  started_ = running_ = true;

  for (int i = 0; i < int(clients_.size()); ++i)
    clients_[i]->thread = std::thread([this, i] { fiberMain(i); });

  for (int i = 0; i < int(clients_.size()); ++i) {
    auto ev = std::make_unique<Event>();
    ev->tick = 0;
    ev->kindOrder = std::uint8_t(ActorKind::Client);
    ev->rank = i;
    ev->seq = nextSeq_++;
    ev->type = Event::Type::ClientStart;
    ev->actor = {ActorKind::Client, i};
    events_.push(std::move(ev));
  }

  try {
    while (!events_.empty()) {
      std::unique_ptr<Event> ev =
          std::move(const_cast<std::unique_ptr<Event>&>(events_.top()));
      events_.pop();
      switch (ev->type) {
        case Event::Type::ClientStart:
          resumeClient(ev->actor.rank);
          break;
        case Event::Type::ServerPoll:
          serverPoll(ev->actor.rank, ev->tick);
          break;
        case Event::Type::Arrival: {
          Envelope& env = ev->env;
          ProcessId dst = env.dst;
          if (dst.kind == ActorKind::Server) {
            ServerState& s = servers_[dst.rank];
            s.inbox.push_back(std::move(env));
            scheduleServerPoll(dst.rank, std::max(ev->tick, s.localNow));
          } else {
            ClientState& c = *clients_[dst.rank];
            auto pit = c.pendingArrivals.find(ev->tick);
            if (pit != c.pendingArrivals.end()) c.pendingArrivals.erase(pit);
            if (c.finished) break; // client already closed; drop
            c.localNow = std::max(c.localNow, ev->tick);
            c.inbox.push_back(std::move(env));
            resumeClient(dst.rank);
          }
          break;
        }
      }
    }
  } catch (...) {
    abortFibers();
    joinFibers();
    running_ = false;
    throw;
  }

  bool allDone = true;
  for (auto& cp : clients_)
    if (!cp->finished) allDone = false;
  if (!allDone) {
    running_ = false;
    reportDeadlock();
  }
  joinFibers();
  running_ = false;
}

} // namespace objstore

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "objstore/ids.hpp"
#include "objstore/wire.hpp"

namespace objstore {

enum class ActorKind : std::uint8_t { Server = 0, Client = 1 };

struct ProcessId {
  ActorKind kind = ActorKind::Server;
  int rank = 0;

  bool operator==(const ProcessId&) const = default;
};

std::string toString(ProcessId id);

struct Envelope {
  ProcessId src;
  ProcessId dst;
  Tag tag = Tag::Close;
  Payload payload;
  Tick sendTick = 0;
  Tick deliverTick = 0; // sendTick + latency + perByteCost * payload bytes
  std::uint64_t sequence = 0;
};

struct FabricConfig {
  Tick latencyTicks = 1350;
  double perByteCost = 0.45; // ticks per payload byte
};

class TraceSink {
public:
  virtual ~TraceSink() = default;
  virtual void onSend(const Envelope&) {}
  // Called when the destination actually starts handling the message, which
  // can be later than deliverTick if the destination was busy.
  virtual void onProcess(const Envelope&, Tick /*processTick*/) {}
};

class Fabric;

// Handle actors use to interact with the fabric. Server handlers may not call
// receive(); client programs run on their own fiber and may block in it.
class ActorContext {
public:
  ProcessId self() const { return self_; }
  Tick now() const;
  void advance(Tick dt);
  void send(ProcessId dst, Tag tag, Payload payload);
  int numServers() const;
  int numClients() const;

  // Blocks until the next message for this client arrives. `why` is surfaced
  // in the deadlock report if the simulation wedges.
  Envelope receive(const std::string& why);

  // Non-blocking in virtual time: returns the next message already delivered
  // by the client's local clock, or nothing. Messages timestamped at or before
  // now count as delivered even if the scheduler has not dispatched them yet.
  std::optional<Envelope> tryReceive();

  Fabric* fabric() const { return fabric_; }

private:
  friend class Fabric;
  ActorContext(Fabric* f, ProcessId id) : fabric_(f), self_(id) {}
  Fabric* fabric_;
  ProcessId self_;
};

class ServerHandler {
public:
  virtual ~ServerHandler() = default;
  virtual void onMessage(ActorContext& ctx, Envelope env) = 0;
  // One unit of background work (prefetch queue). Runs only when the inbox is
  // empty. Return false when there is nothing to do.
  virtual bool idleWork(ActorContext& ctx) = 0;
};

using ClientProgram = std::function<void(ActorContext&)>;

class DeadlockError : public std::runtime_error {
public:
  explicit DeadlockError(const std::string& what) : std::runtime_error(what) {}
};

// Discrete-event message fabric. Servers are reactive handlers polled off a
// single event queue; each client runs on a dedicated thread that alternates
// strictly with the scheduler, so execution is deterministic for a given
// configuration regardless of host scheduling.
class Fabric {
public:
  Fabric(FabricConfig cfg, int numServers, int numClients);
  ~Fabric();

  Fabric(const Fabric&) = delete;
  Fabric& operator=(const Fabric&) = delete;

  void attachServer(int rank, ServerHandler* handler);
  void attachClient(int rank, ClientProgram program);
  void setTrace(TraceSink* sink) { trace_ = sink; }

  void run();

  Tick serverIdleTicks(int rank) const { return servers_[rank].idleTicks; }
  Tick actorNow(ProcessId id) const;
  const FabricConfig& config() const { return cfg_; }
  int numServers() const { return int(servers_.size()); }
  int numClients() const { return int(clients_.size()); }

private:
  friend class ActorContext;

  struct Event {
    enum class Type : std::uint8_t { Arrival, ServerPoll, ClientStart };
    Tick tick;
    std::uint8_t kindOrder; // tie-break: source actor kind
    int rank;               // tie-break: source actor rank
    std::uint64_t seq;      // tie-break: global creation order
    Type type;
    Envelope env;    // Arrival
    ProcessId actor; // ServerPoll / ClientStart

    bool after(const Event& o) const {
      if (tick != o.tick) return tick > o.tick;
      if (kindOrder != o.kindOrder) return kindOrder > o.kindOrder;
      if (rank != o.rank) return rank > o.rank;
      return seq > o.seq;
    }
  };
  struct EventCmp {
    bool operator()(const std::unique_ptr<Event>& a, const std::unique_ptr<Event>& b) const {
      return a->after(*b);
    }
  };

  struct ServerState {
    ServerHandler* handler = nullptr;
    std::deque<Envelope> inbox;
    Tick localNow = 0;
    Tick idleTicks = 0;
    Tick idleSince = 0;
    bool pollScheduled = false;
  };

  struct ClientState {
    ClientProgram program;
    std::thread thread;
    std::mutex mtx;
    std::condition_variable cv;
    bool clientTurn = false;
    bool finished = false;
    bool abort = false;
    std::deque<Envelope> inbox;
    std::multiset<Tick> pendingArrivals; // effective ticks of in-flight messages
    Tick localNow = 0;
    std::string blockReason;
    std::exception_ptr error;
  };

  void sendFrom(ProcessId src, ProcessId dst, Tag tag, Payload payload);
  void scheduleArrival(Envelope env);
  void scheduleServerPoll(int rank, Tick tick);
  void serverPoll(int rank, Tick tick);
  void resumeClient(int rank);
  void clientYield(ClientState& c);
  Envelope clientReceive(int rank, const std::string& why);
  std::optional<Envelope> clientTryReceive(int rank);
  void fiberMain(int rank);
  void abortFibers();
  void joinFibers();
  [[noreturn]] void reportDeadlock();

  FabricConfig cfg_;
  std::vector<ServerState> servers_;
  std::vector<std::unique_ptr<ClientState>> clients_;
  std::priority_queue<std::unique_ptr<Event>, std::vector<std::unique_ptr<Event>>, EventCmp>
      events_;
  std::unordered_map<std::uint64_t, Tick> pairLastArrival_;
  std::uint64_t nextSeq_ = 0;
  TraceSink* trace_ = nullptr;
  bool running_ = false;
  bool started_ = false;

  struct FiberAbort {}; // unwinds a client fiber when the run is cancelled
};

} // namespace objstore

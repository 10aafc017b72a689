#include "objstore/stats.hpp"

#include <ostream>

namespace objstore {

StatsRecord StatsRecord::plus(const StatsRecord& o) const {
  StatsRecord r = *this;
  r.fetch = fetch.plus(o.fetch);
  r.createObject = createObject.plus(o.createObject);
  r.createGroup = createGroup.plus(o.createGroup);
  r.spaceRecovery = spaceRecovery.plus(o.spaceRecovery);
  r.rotSearch = rotSearch.plus(o.rotSearch);
  r.incomingMessage = incomingMessage.plus(o.incomingMessage);
  r.wait = wait.plus(o.wait);
  r.signal = signal.plus(o.signal);
  r.synchronise = synchronise.plus(o.synchronise);
  r.messagesReceived += o.messagesReceived;
  r.idleTicks += o.idleTicks;
  r.replicasDiscardedClean += o.replicasDiscardedClean;
  r.replicasDiscardedDirty += o.replicasDiscardedDirty;
  r.prefetchedAccepted += o.prefetchedAccepted;
  r.prefetchedUnused += o.prefetchedUnused;
  r.executionTicks += o.executionTicks;
  return r;
}

StatsRecord StatsRecord::minus(const StatsRecord& o) const {
  StatsRecord r = *this;
  r.fetch = fetch.minus(o.fetch);
  r.createObject = createObject.minus(o.createObject);
  r.createGroup = createGroup.minus(o.createGroup);
  r.spaceRecovery = spaceRecovery.minus(o.spaceRecovery);
  r.rotSearch = rotSearch.minus(o.rotSearch);
  r.incomingMessage = incomingMessage.minus(o.incomingMessage);
  r.wait = wait.minus(o.wait);
  r.signal = signal.minus(o.signal);
  r.synchronise = synchronise.minus(o.synchronise);
  r.messagesReceived -= o.messagesReceived;
  r.idleTicks -= o.idleTicks;
  r.replicasDiscardedClean -= o.replicasDiscardedClean;
  r.replicasDiscardedDirty -= o.replicasDiscardedDirty;
  r.prefetchedAccepted -= o.prefetchedAccepted;
  r.prefetchedUnused -= o.prefetchedUnused;
  r.executionTicks -= o.executionTicks;
  return r;
}

const std::vector<std::string>& StatsRecord::columnNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const char* op : {"fetch", "createObject", "createGroup", "spaceRecovery",
                           "rotSearch", "incomingMessage", "wait", "signal",
                           "synchronise"})
      for (const char* f : {"Count", "TotalTicks", "MinTicks", "MaxTicks"})
        v.push_back(std::string(op) + f);
    for (const char* c : {"messagesReceived", "idleTicks", "replicasDiscardedClean",
                          "replicasDiscardedDirty", "prefetchedAccepted",
                          "prefetchedUnused", "executionTicks"})
      v.push_back(c);
    return v;
  }();
  return names;
}

void StatsRecord::appendCsv(std::ostream& out) const {
  const OpStat* ops[] = {&fetch,       &createObject,    &createGroup,
                         &spaceRecovery, &rotSearch,     &incomingMessage,
                         &wait,        &signal,          &synchronise};
  bool first = true;
  for (const OpStat* s : ops) {
    if (!first) out << ',';
    first = false;
    out << s->count << ',' << s->totalTicks << ',' << s->minTicks << ',' << s->maxTicks;
  }
  for (std::uint64_t c : {messagesReceived, idleTicks, replicasDiscardedClean,
                          replicasDiscardedDirty, prefetchedAccepted, prefetchedUnused,
                          executionTicks})
    out << ',' << c;
}

} // namespace objstore

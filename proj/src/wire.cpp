#include "objstore/wire.hpp"

namespace objstore {

const char* tagName(Tag t) {
  switch (t) {
    case Tag::CreateGroup: return "CREATE_GROUP";
    case Tag::GroupNotify: return "GROUP_NOTIFY";
    case Tag::CreateObject: return "CREATE_OBJECT";
    case Tag::CreateReply: return "CREATE_REPLY";
    case Tag::Fetch: return "FETCH";
    case Tag::ReplicaObject: return "REPLICA_OBJECT";
    case Tag::ReplicaSegment: return "REPLICA_SEGMENT";
    case Tag::ReturnObjects: return "RETURN_OBJECTS";
    case Tag::ReturnSegment: return "RETURN_SEGMENT";
    case Tag::DiscardNotice: return "DISCARD_NOTICE";
    case Tag::Receipt: return "RECEIPT";
    case Tag::AcceptSegment: return "ACCEPT_SEGMENT";
    case Tag::Name: return "NAME";
    case Tag::NamedQuery: return "NAMED_QUERY";
    case Tag::NamedReply: return "NAMED_REPLY";
    case Tag::Wait: return "WAIT";
    case Tag::Grant: return "GRANT";
    case Tag::Signal: return "SIGNAL";
    case Tag::Sync: return "SYNC";
    case Tag::SyncAck: return "SYNC_ACK";
    case Tag::Prefetch: return "PREFETCH";
    case Tag::Close: return "CLOSE";
  }
  return "?";
}

} // namespace objstore

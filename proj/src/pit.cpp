#include "reservoir/pit.hpp"

namespace reservoir {

PitEntry*
Pit::find(const Name& name)
{
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

PitEntry&
Pit::insert(const Name& name, FaceId in_face, SimTime now, Duration lifetime, InstanceId instance)
{
  PitEntry entry;
  entry.name = name;
  entry.downstream_faces.insert(in_face);
  entry.created = now;
  entry.expiry = now + lifetime;
  entry.instance = instance;
  auto [it, inserted] = entries_.insert_or_assign(name, std::move(entry));
  return it->second;
}

void
Pit::erase(const Name& name)
{
  entries_.erase(name);
}

std::vector<Name>
Pit::expire(SimTime now)
{
  std::vector<Name> purged;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.expiry < now) {
      purged.push_back(it->first);
      it = entries_.erase(it);
    }
    else {
      ++it;
    }
  }
  return purged;
}

} // namespace reservoir

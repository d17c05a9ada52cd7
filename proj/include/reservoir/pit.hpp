#pragma once

#include "reservoir/name.hpp"

#include <map>
#include <set>
#include <vector>

namespace reservoir {

struct PitEntry
{
  Name name;
  std::set<FaceId> downstream_faces;
  SimTime created{0};
  SimTime expiry{0};
  /// Instance of the Interest that created the entry.
  InstanceId instance = 0;
};

/// At most one entry per name.
class Pit
{
public:
  PitEntry*
  find(const Name& name);

  PitEntry&
  insert(const Name& name, FaceId in_face, SimTime now, Duration lifetime, InstanceId instance);

  void
  erase(const Name& name);

  /// Removes entries whose expiry is before `now`; returns their names.
  std::vector<Name>
  expire(SimTime now);

  std::size_t
  size() const
  {
    return entries_.size();
  }

  bool
  empty() const
  {
    return entries_.empty();
  }

private:
  std::map<Name, PitEntry> entries_;
};

} // namespace reservoir

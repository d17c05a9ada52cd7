#include "reservoir/run_log.hpp"

namespace reservoir {

std::string_view
to_string(CompletionSource s)
{
  switch (s) {
    case CompletionSource::LocalCs:
      return "local_cs";
    case CompletionSource::NetworkCs:
      return "network_cs";
    case CompletionSource::PitAggregate:
      return "pit_aggregate";
    case CompletionSource::EnReuse:
      return "en_reuse";
    case CompletionSource::EnScratch:
      return "en_scratch";
  }
  return "unknown";
}

std::string_view
to_string(ArrivalOutcome o)
{
  switch (o) {
    case ArrivalOutcome::Reuse:
      return "reuse";
    case ArrivalOutcome::Scratch:
      return "scratch";
    case ArrivalOutcome::JoinedPending:
      return "joined_pending";
    case ArrivalOutcome::NoReuse:
      return "noreuse";
    case ArrivalOutcome::Failed:
      return "failed";
  }
  return "unknown";
}

} // namespace reservoir

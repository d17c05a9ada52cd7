#pragma once

#include "reservoir/common.hpp"
#include "reservoir/lsh.hpp"

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reservoir {

/// '/'-separated hierarchical name. The root name "/" has no components.
class Name
{
public:
  Name() = default;

  /// Parses "/a/b/c". Empty components are ignored.
  explicit Name(std::string_view uri);

  static Name
  from_components(std::vector<std::string> components);

  std::size_t
  size() const
  {
    return components_.size();
  }

  bool
  empty() const
  {
    return components_.empty();
  }

  const std::string&
  operator[](std::size_t i) const
  {
    return components_[i];
  }

  const std::vector<std::string>&
  components() const
  {
    return components_;
  }

  /// First n components.
  Name
  prefix(std::size_t n) const;

  /// Components from position n onward.
  Name
  suffix_from(std::size_t n) const;

  Name&
  append(std::string component);

  Name&
  append(const Name& other);

  bool
  is_prefix_of(const Name& other) const;

  std::string
  to_uri() const;

  friend bool
  operator==(const Name&, const Name&) = default;

  friend std::strong_ordering
  operator<=>(const Name& a, const Name& b)
  {
    return a.components_ <=> b.components_;
  }

private:
  std::vector<std::string> components_;
};

inline Name
operator/(Name n, std::string component)
{
  n.append(std::move(component));
  return n;
}

inline constexpr std::string_view kTaskKeyword = "task";
inline constexpr std::string_view kNoReuseKeyword = "task-noreuse";

enum class TaskKeyword
{
  Reuse,
  NoReuse,
};

std::string_view
to_string(TaskKeyword k);

/// "/<service>/<keyword>/<hash>" or, for result fetches, "/<en>/<service>/<keyword>/<hash>".
struct TaskName
{
  Name service;
  TaskKeyword keyword = TaskKeyword::Reuse;
  std::string hash_hex;
  std::optional<Name> en_prefix;

  bool
  is_result_fetch() const
  {
    return en_prefix.has_value();
  }

  Name
  to_name() const;

  std::string
  to_uri() const
  {
    return to_name().to_uri();
  }

  /// Same task without the EN prefix.
  TaskName
  offload_form() const;

  TaskName
  result_fetch_form(const Name& en) const;

  friend bool
  operator==(const TaskName&, const TaskName&) = default;
};

/// Per-task values carried in the Interest's application parameters; opaque to forwarding.
struct TaskParameters
{
  std::optional<Duration> deadline;
  double similarity_threshold = 0.9;
  std::optional<FeatureVector> inline_input;
  std::optional<std::uint64_t> input_size_bytes;
  std::optional<Name> device_prefix;

  /// Either an inline input or a declared size plus device prefix. The device
  /// prefix may also accompany an inline input when results are pushed.
  void
  validate() const;
};

struct ForwardingHint
{
  Name en_prefix;
};

TaskName
build_task_name(const Name& service, const ConcatenatedHash& hash, bool reuse_enabled);

/// Non-reuse form named by a CRC32 of the serialized input.
TaskName
build_noreuse_task_name(const Name& service, std::uint32_t checksum);

std::string
checksum_hex(std::uint32_t checksum);

enum class NameClass
{
  Plain,
  ReuseTask,
  NonReuseTask,
  ResultFetch,
};

std::string_view
to_string(NameClass c);

struct ParsedName
{
  NameClass kind = NameClass::Plain;
  Name name;
  std::optional<TaskName> task;
};

/// Classifies a name. Leading components matching one of `en_prefixes` mark a
/// result fetch; without them every component before the keyword is the service.
/// Throws MalformedNameError for a task name with a bad hash component.
ParsedName
parse_name(const Name& name, std::span<const Name> en_prefixes = {});

ParsedName
parse_name(std::string_view uri, std::span<const Name> en_prefixes = {});

} // namespace reservoir

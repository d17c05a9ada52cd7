#include "reservoir/name.hpp"

#include <algorithm>
#include <cstdio>

namespace reservoir {

Name::Name(std::string_view uri)
{
  std::size_t pos = 0;
  while (pos <= uri.size()) {
    const std::size_t next = uri.find('/', pos);
    const std::size_t end = next == std::string_view::npos ? uri.size() : next;
    if (end > pos) {
      components_.emplace_back(uri.substr(pos, end - pos));
    }
    if (next == std::string_view::npos) {
      break;
    }
    pos = next + 1;
  }
}

Name
Name::from_components(std::vector<std::string> components)
{
  Name n;
  n.components_ = std::move(components);
  return n;
}

Name
Name::prefix(std::size_t n) const
{
  Name out;
  out.components_.assign(components_.begin(),
                         components_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size())));
  return out;
}

Name
Name::suffix_from(std::size_t n) const
{
  Name out;
  if (n < size()) {
    out.components_.assign(components_.begin() + static_cast<std::ptrdiff_t>(n), components_.end());
  }
  return out;
}

Name&
Name::append(std::string component)
{
  components_.push_back(std::move(component));
  return *this;
}

Name&
Name::append(const Name& other)
{
  components_.insert(components_.end(), other.components_.begin(), other.components_.end());
  return *this;
}

bool
Name::is_prefix_of(const Name& other) const
{
  if (size() > other.size()) {
    return false;
  }
  return std::equal(components_.begin(), components_.end(), other.components_.begin());
}

std::string
Name::to_uri() const
{
  if (components_.empty()) {
    return "/";
  }
  std::string out;
  for (const auto& c : components_) {
    out.push_back('/');
    out += c;
  }
  return out;
}

std::string_view
to_string(TaskKeyword k)
{
  return k == TaskKeyword::Reuse ? kTaskKeyword : kNoReuseKeyword;
}

Name
TaskName::to_name() const
{
  Name n = en_prefix.value_or(Name{});
  n.append(service);
  n.append(std::string(to_string(keyword)));
  n.append(hash_hex);
  return n;
}

TaskName
TaskName::offload_form() const
{
  TaskName t = *this;
  t.en_prefix.reset();
  return t;
}

TaskName
TaskName::result_fetch_form(const Name& en) const
{
  TaskName t = *this;
  t.en_prefix = en;
  return t;
}

void
TaskParameters::validate() const
{
  if (similarity_threshold < 0.0 || similarity_threshold > 1.0) {
    throw ConfigError("similarity threshold must be in [0, 1]");
  }
  const bool has_inline = inline_input.has_value();
  const bool has_pull = input_size_bytes.has_value();
  if (has_inline == has_pull) {
    throw ConfigError("task parameters need exactly one of an inline input or a declared input size");
  }
  if (has_pull && (!device_prefix || device_prefix->empty())) {
    throw ConfigError("a declared input size requires the device prefix");
  }
  if (has_pull && *input_size_bytes == 0) {
    throw ConfigError("declared input size must be positive");
  }
}

TaskName
build_task_name(const Name& service, const ConcatenatedHash& hash, bool reuse_enabled)
{
  TaskName t;
  t.service = service;
  t.keyword = reuse_enabled ? TaskKeyword::Reuse : TaskKeyword::NoReuse;
  t.hash_hex = encode_hash(hash);
  return t;
}

std::string
checksum_hex(std::uint32_t checksum)
{
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08X", checksum);
  return buf;
}

TaskName
build_noreuse_task_name(const Name& service, std::uint32_t checksum)
{
  TaskName t;
  t.service = service;
  t.keyword = TaskKeyword::NoReuse;
  t.hash_hex = checksum_hex(checksum);
  return t;
}

std::string_view
to_string(NameClass c)
{
  switch (c) {
    case NameClass::Plain:
      return "plain";
    case NameClass::ReuseTask:
      return "reuse-task";
    case NameClass::NonReuseTask:
      return "noreuse-task";
    case NameClass::ResultFetch:
      return "result-fetch";
  }
  return "unknown";
}

ParsedName
parse_name(const Name& name, std::span<const Name> en_prefixes)
{
  ParsedName out;
  out.name = name;
  if (name.size() < 2) {
    return out;
  }
  const std::string& keyword = name[name.size() - 2];
  TaskKeyword kw;
  if (keyword == kTaskKeyword) {
    kw = TaskKeyword::Reuse;
  }
  else if (keyword == kNoReuseKeyword) {
    kw = TaskKeyword::NoReuse;
  }
  else {
    return out;
  }

  const std::string& hash = name[name.size() - 1];
  if (!is_hex_string(hash)) {
    throw MalformedNameError("task name " + name.to_uri() + " has a non-hex hash component");
  }
  const Name leading = name.prefix(name.size() - 2);
  if (leading.empty()) {
    throw MalformedNameError("task name " + name.to_uri() + " has no service component");
  }

  TaskName task;
  task.keyword = kw;
  task.hash_hex = hash;

  const Name* best = nullptr;
  for (const Name& en : en_prefixes) {
    if (!en.empty() && en.size() < leading.size() && en.is_prefix_of(leading) &&
        (best == nullptr || en.size() > best->size())) {
      best = &en;
    }
  }
  if (best != nullptr) {
    task.en_prefix = *best;
    task.service = leading.suffix_from(best->size());
    out.kind = NameClass::ResultFetch;
  }
  else {
    task.service = leading;
    out.kind = kw == TaskKeyword::Reuse ? NameClass::ReuseTask : NameClass::NonReuseTask;
  }
  out.task = std::move(task);
  return out;
}

ParsedName
parse_name(std::string_view uri, std::span<const Name> en_prefixes)
{
  return parse_name(Name(uri), en_prefixes);
}

} // namespace reservoir

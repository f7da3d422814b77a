#include "anonelect/budget.hpp"

#include <charconv>
#include <cstdlib>
#include <string>
#include <vector>

#include "anonelect/error.hpp"

namespace anonelect {
namespace {

using Code = Error::Code;

std::vector<std::string_view> split_items(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ',' || text[i] == ' ')) i += 1;
    std::size_t j = i;
    while (j < text.size() && text[j] != ',' && text[j] != ' ') j += 1;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(Code::kInvalidInput,
                "budget value is not a number: " + std::string(s));
  return v;
}

}  // namespace

Budget parse_budget(std::string_view text, Budget base) {
  for (std::string_view item : split_items(text)) {
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      base.max_ticks = parse_u64(item);
      continue;
    }
    std::string_view key = item.substr(0, eq);
    std::string_view val = item.substr(eq + 1);
    if (key == "ticks")
      base.max_ticks = parse_u64(val);
    else if (key == "memory")
      base.max_memory_tokens = parse_u64(val);
    else if (key == "trail")
      base.max_trail_elements = parse_u64(val);
    else if (key == "threads")
      base.threads = static_cast<int>(parse_u64(val));
    else
      throw Error(Code::kInvalidInput,
                  "unknown budget key: " + std::string(key));
  }
  return base;
}

Budget budget_from_env(Budget base) {
  const char* v = std::getenv("ANONELECT_BUDGET");
  if (v != nullptr && *v != '\0') return parse_budget(v, base);
  return base;
}

}  // namespace anonelect

#pragma once

#include <cstdint>
#include <string_view>

namespace anonelect {

// Resource caps shared by the CLI and the heavier test drivers. The
// ANONELECT_BUDGET environment variable overrides fields with comma- or
// space-separated key=value pairs (ticks, memory, trail, threads); a bare
// number sets ticks.
struct Budget {
  std::uint64_t max_ticks = 1'000'000;
  std::uint64_t max_memory_tokens = 10'000'000;
  std::uint64_t max_trail_elements = 10'000'000;
  int threads = 0;  // 0 picks hardware concurrency
};

Budget parse_budget(std::string_view text, Budget base = {});

// `base` updated from ANONELECT_BUDGET, when set and nonempty.
Budget budget_from_env(Budget base = {});

}  // namespace anonelect

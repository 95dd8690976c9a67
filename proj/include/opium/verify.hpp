#pragma once

// Property battery behind `opium verify`. Every check draws its random
// instances from a seed, so a failure is reproduced exactly by re-running the
// same check with the same seed (see the replay file helpers).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace opium {

struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;     // largest observed error measure
    double tolerance = 0.0; // pass iff worst <= tolerance
    std::string detail;
    double seconds = 0.0;
};

/// Names of all checks, in run order.
std::vector<std::string> check_names();

/// Throws Errc::invalid_argument for an unknown name.
CheckResult run_check(std::string_view name, std::uint64_t seed);

std::vector<CheckResult> run_all_checks(std::uint64_t seed);

struct Replay {
    std::string check;
    std::uint64_t seed = 0;
};

inline constexpr int kReplayVersion = 1;

//   opium-replay 1
//   check <name>
//   seed <n>
//   end
std::string serialize(const Replay& replay);
/// Throws Errc::parse_error naming the offending line.
Replay parse_replay(std::string_view text);

} // namespace opium

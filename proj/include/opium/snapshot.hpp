#pragma once

// Versioned text snapshots of hidden layers and solver states.
//
//   opium-snapshot 1
//   kind <hidden-layer|opium|greville|light|dynamic>
//   dims <M> <N or L>
//   param <name> <value>        (zero or more)
//   k <updates>
//   matrix <name> <rows> <cols>
//   <rows lines of hex-float values>
//   end
//
// Reals are written with %a so a snapshot round-trips bit-exactly.

#include "opium/elm.hpp"
#include "opium/solvers.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace opium {

inline constexpr int kSnapshotVersion = 1;

std::string serialize(const HiddenLayer& layer);
std::string serialize(const AnySolver& solver);

HiddenLayer parse_hidden_layer(std::string_view text);
AnySolver parse_solver(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace opium

#pragma once

#include <cstdint>
#include <string>

#include "nnlif/io.hpp"

namespace nnlif {

// exit codes shared by the CLI and the acceptance harness
inline constexpr int EXIT_OK = 0;
inline constexpr int EXIT_VALIDATION = 2;
inline constexpr int EXIT_NUMERIC = 3;
inline constexpr int EXIT_BLOW_UP = 4;

// Runs one named scenario (simulate | steady | stefan-oracle | entropy |
// periodicity-scan | particle-compare | supersolution-check), writing CSV
// artifacts and a summary file into out_dir.  Returns an exit code;
// exceptions from bad configs or numerics are mapped by the caller.
int run_scenario(const std::string& name, const Config& cfg,
                 const std::string& out_dir, std::uint64_t seed);

} // namespace nnlif

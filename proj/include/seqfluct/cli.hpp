#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace seqfluct {

/// Entry point of the `seqfluct` command. args excludes the program name.
/// Returns the process exit code: 0 ok, 2 validation, 3 invariant, 4 guard.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 16 hex digits of FNV-1a over the canonical config text.
std::string config_fingerprint(std::string_view canonical);

/// Shortest round-trip text for a double.
std::string format_number(double x);

}  // namespace seqfluct

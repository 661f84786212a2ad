#pragma once

#include "wacrisk/network_model.hpp"
#include "wacrisk/steady_state_stats.hpp"

#include <string>
#include <vector>

namespace wacrisk {

/// Parses {"generators": [{"J", "beta", "E"}...], "susceptance": [[...]],
/// "equilibrium_theta": [...], "power_inputs": [...], "laplacian": [[...]]}.
NetworkModel parse_network_json(const std::string& text);
NetworkModel load_network_json(const std::string& path);

/// {"M": [[...]], "K": [[...]]} for dense gains, or {"mu": [...], "kappa": [...]}
/// for per-mode gains.
GainSpec parse_gains_json(const std::string& text);
GainSpec load_gains_json(const std::string& path);

std::string read_text_file(const std::string& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

/// Shortest round-trippable decimal; "inf" / "-inf" / "nan" for non-finite values.
std::string format_number(double v);

/// Parses a number written by format_number.
double parse_number(const std::string& s);

/// Reads the i, j, sigma columns of a pair CSV with a header row.
std::vector<PairSigma> read_pair_csv(const std::string& text);

}  // namespace wacrisk

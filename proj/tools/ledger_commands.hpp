#pragma once

#include <CLI11.hpp>

namespace omic::tools {

// Adds `genesis`, `run` and `verify` under `parent`; each sets `rc`.
void add_ledger_commands(CLI::App& parent, int& rc);

}  // namespace omic::tools

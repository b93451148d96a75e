#pragma once

// Built-in three-mode benchmark system used by the demo subcommand and the
// acceptance suite.

#include "mjsmc/model.hpp"

namespace mjsmc {

/// Two-state, single-input, three-mode jump system with mode-dependent
/// sinusoidal delays and a partly unknown rate matrix. The fully known
/// generator carried alongside (for simulation only) fills the masked
/// entries consistently with the known ones.
MjlsSystem three_mode_benchmark();

}  // namespace mjsmc

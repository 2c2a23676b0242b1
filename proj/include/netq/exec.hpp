#pragma once

namespace netq {

// Batch operations accept an execution mode. Serial is the reference path;
// the OpenMP path must produce bit-identical results (every element is
// computed independently and reductions happen in index order).
enum class ExecMode { Serial, Parallel };

} // namespace netq

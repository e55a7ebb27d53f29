#pragma once

namespace massive {

/// Every data-parallel kernel has an OpenMP path and a serial reference path.
/// Both produce identical results; the serial path is what tests compare to.
enum class Exec { serial, parallel };

/// Sets the OpenMP worker count (0 keeps the runtime default).
void set_worker_count(int n);
int worker_count();

}  // namespace massive

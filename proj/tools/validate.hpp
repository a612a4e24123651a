#pragma once

// Quick oracle/property suite behind `sparsebench validate`. Prints one
// line per check and returns the number of failures.
int run_validation_suite();

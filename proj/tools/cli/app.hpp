#pragma once

namespace mtd::cli {

/// Entry point of the mtd tool. Returns the process exit code: 0 success,
/// 2 configuration/packing errors, 3 numeric divergence, 4 I/O or format
/// errors.
int run(int argc, char** argv);

}  // namespace mtd::cli

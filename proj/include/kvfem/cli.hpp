#pragma once

namespace kvfem {

/// Entry point of the `kvfem` tool:
///   kvfem <convergence|decay|cavity|single> --config <path>
///         [--output-dir <path>] [--threads <n>]
int run_cli(int argc, const char* const* argv);

}  // namespace kvfem

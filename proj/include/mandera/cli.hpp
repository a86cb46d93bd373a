#pragma once

namespace mandera {

/// Command-line entry point (simulate / detect / verify-theory / bench /
/// metrics). Returns 0 on success, 2 on validation errors, 1 on runtime
/// errors.
int cli_main(int argc, const char* const* argv);

}  // namespace mandera

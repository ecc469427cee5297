#pragma once
#include <ostream>
#include <string>
#include <vector>

namespace nikeq {

// Exit codes: 0 all checks pass, 1 a check failed, 2 bad input, 3 numerical failure.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// EQUILIB_BITS if set (and sane), else 256.
int default_bits();

}  // namespace nikeq

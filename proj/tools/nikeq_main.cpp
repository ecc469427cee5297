#include <iostream>

#include "nikeq/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nikeq::run_command(args, std::cout, std::cerr);
}

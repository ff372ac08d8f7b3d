#include <iostream>
#include <string>
#include <vector>

#include "sepwalk/commands.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return sepwalk::run_cli(args, std::cout, std::cerr);
}

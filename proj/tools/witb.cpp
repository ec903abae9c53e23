#include <iostream>
#include <string>
#include <vector>

#include "witb/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return witb::run_cli(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "twistrank/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return twistrank::run_cli(args, std::cout, std::cerr);
}

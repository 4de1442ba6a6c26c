#include <iostream>
#include <string>
#include <vector>

#include "clustersig/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return clustersig::cli::run(args, std::cout, std::cerr);
}

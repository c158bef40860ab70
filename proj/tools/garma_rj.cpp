#include "garma/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    if (!args.empty()) args.front() = "garma-rj";
    return garma::cli::run(args, std::cout, std::cerr);
}

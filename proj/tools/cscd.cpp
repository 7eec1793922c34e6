#include "cscd/cli.hpp"
#include "cscd/runtime.hpp"

#include <iostream>

int main(int argc, char** argv) {
    cscd::tune_allocator();
    return cscd::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

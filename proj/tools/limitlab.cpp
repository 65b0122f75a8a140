#include <iostream>

#include "limitlab/cli.hpp"

int main(int argc, char** argv) { return limitlab::run_cli(argc, argv, std::cout, std::cerr); }

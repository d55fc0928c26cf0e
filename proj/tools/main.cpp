#include <iostream>

#include "mbfuse/cli.hpp"

int main(int argc, char** argv) { return mbfuse::run_cli(argc, argv, std::cout, std::cerr); }

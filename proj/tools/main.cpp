#include <iostream>

#include "tprk/harness.hpp"

int main(int argc, char** argv) { return tprk::cli_main(argc, argv, std::cout, std::cerr); }

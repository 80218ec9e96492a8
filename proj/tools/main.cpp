#include <iostream>

#include "qcfb/commands.hpp"

int main(int argc, char** argv) { return qcfb::cli::run(argc, argv, std::cout, std::cerr); }

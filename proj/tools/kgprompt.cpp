#include <iostream>

#include "kgprompt/cli.hpp"

int main(int argc, char** argv) { return kgprompt::cli::run(argc, argv, std::cout, std::cerr); }

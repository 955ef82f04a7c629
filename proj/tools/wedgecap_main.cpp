#include <iostream>

#include "wedgecap/cli.hpp"

int main(int argc, char** argv) { return wedgecap::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "chartreview/cli.hpp"

int main(int argc, char** argv) { return chartreview::cli_dispatch(argc, argv, std::cout, std::cerr); }

#include <qenergy/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return qenergy::run_cli(argc, argv, std::cout, std::cerr); }

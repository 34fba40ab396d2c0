#include "pompkit/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return pompkit::run_cli(argc, argv, std::cout, std::cerr);
}

#include <iostream>

#include "qspec/cli.hpp"

int main(int argc, char **argv)
{
    return qspec::run_cli(argc, argv, std::cout, std::cerr);
}

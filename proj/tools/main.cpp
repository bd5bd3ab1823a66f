#include <iostream>

#include "hdpca/cli.hpp"

int main(int argc, char** argv)
{
    return hdpca::run_cli(argc, argv, std::cout, std::cerr);
}

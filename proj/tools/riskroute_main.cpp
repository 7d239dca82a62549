#include <iostream>
#include <string>
#include <vector>

#include "riskroute/cli.hpp"

int main(int argc, char** argv)
{
    return riskroute::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

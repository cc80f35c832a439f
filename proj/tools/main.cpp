#include <iostream>

#include "dicke/cli.hpp"

int main(int argc, char** argv) {
    return dicke::cli::cli_main(argc, argv, std::cout, std::cerr);
}

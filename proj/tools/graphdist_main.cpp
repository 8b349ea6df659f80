#include <string>
#include <vector>

#include "graphdist/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return graphdist::cli::run(args);
}

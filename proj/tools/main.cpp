#include <string>
#include <vector>

#include "metaor/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return metaor::run_cli(args);
}

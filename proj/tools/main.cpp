#include <string>
#include <vector>

#include "vprmon/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return vprmon::cli_dispatch(args);
}

#include <string>
#include <vector>

#include "zv/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return zv::dispatch(args);
}
